#ifndef TMT_MODEL_HPP
#define TMT_MODEL_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tmt/error.hpp"

namespace tmt {

using ThimacId = int;
using StageId = int;
using FlowId = int;
using TriggerId = int;

/// The five generic stage kinds. There is deliberately no sixth value:
/// every operation a machine performs on a thing is one of these.
enum class StageKind { Create, Process, Release, Transfer, Receive };

const char* stage_kind_name(StageKind k);
std::optional<StageKind> stage_kind_from_name(const std::string& name);

/// A thimac is simultaneously a thing (it can flow through other machines)
/// and a machine (it creates/processes/releases/transfers/receives things).
/// Thimacs form a forest: nested machines are children of their enclosing
/// machine.
struct Thimac {
    ThimacId id = -1;
    std::string name;
    std::string path; // dotted path from the root, e.g. "BobMailServer.Ehlo"
    std::optional<ThimacId> parent;
    std::vector<ThimacId> children; // declaration order
    std::vector<StageId> stages;    // declaration order
};

struct Stage {
    StageId id = -1;
    StageKind kind = StageKind::Create;
    ThimacId owner = -1;
    std::string name;
    std::string path; // owner path + "." + name
    std::optional<std::string> guard; // predicate name; only meaningful on Process stages
    bool sink = false;                // drop point: entering terminates the token
    std::vector<int> anchors;         // diagram step numbers, documentation only
    std::optional<std::string> label;
};

/// Solid arrow: the same thing moves between stages (possibly across a
/// machine boundary). `guard_branch` selects the branch ("true"/"false")
/// when the source stage carries a guard.
struct Flow {
    FlowId id = -1;
    StageId from = -1;
    StageId to = -1;
    std::optional<std::string> guard_branch;
    std::vector<int> anchors;
};

/// Dashed arrow: completion of `from` activates `to`. When `to` is a
/// Create stage, `constructor` names the payload constructor applied to
/// the causing token to build the new thing.
struct Trigger {
    TriggerId id = -1;
    StageId from = -1;
    StageId to = -1;
    std::optional<std::string> constructor;
};

/// Immutable after construction (see ModelBuilder); safe to share across
/// threads. Flow and trigger order is declaration order and is load-bearing:
/// the simulator's scheduling policy depends on it.
class Model {
public:
    std::vector<Thimac> thimacs;
    std::vector<Stage> stages;
    std::vector<Flow> flows;
    std::vector<Trigger> triggers;

    const Thimac& thimac(ThimacId id) const;
    const Stage& stage(StageId id) const;

    std::optional<ThimacId> find_thimac(const std::string& path) const;
    std::optional<StageId> find_stage(const std::string& path) const;

    /// Stage ids marked as drop points.
    std::set<StageId> sinks() const;

    /// Root thimacs in declaration order.
    std::vector<ThimacId> roots() const;

    /// Flows leaving `s`, in declaration order.
    const std::vector<FlowId>& flows_from(StageId s) const;
    /// Triggers leaving `s`, in declaration order.
    const std::vector<TriggerId>& triggers_from(StageId s) const;

    /// Declared kind of a stage; throws UnknownStage for a bad id.
    StageKind stage_kind(StageId s) const;
    StageKind stage_kind(const std::string& path) const;

    /// True when both endpoints are owned by the same thimac.
    bool same_machine(const Flow& f) const { return stage(f.from).owner == stage(f.to).owner; }

    /// Transitive closure over flow and trigger edges, including `starts`.
    /// Throws UnknownStage if a start id is out of range.
    std::set<StageId> reachable_stages(const std::set<StageId>& starts) const;

    /// Sub-model spanning the stages owned by `t` and its descendants plus
    /// the edges internal to that set. Paths are preserved verbatim.
    Model submachine_subgraph(ThimacId t) const;
    Model submachine_subgraph(const std::string& thimac_path) const;

    /// All thimacs in the subtree rooted at `t` (including `t`).
    std::vector<ThimacId> descendants(ThimacId t) const;

private:
    friend class ModelBuilder;
    std::map<std::string, ThimacId> thimac_by_path_;
    std::map<std::string, StageId> stage_by_path_;
    std::vector<std::vector<FlowId>> out_flows_;
    std::vector<std::vector<TriggerId>> out_triggers_;
    void reindex();
};

/// Two-pass construction: declarations first (ids or dotted paths may refer
/// forward), then build() resolves every cross-reference. Reference errors
/// carry the offending path and, when supplied, the source position.
class ModelBuilder {
public:
    ThimacId add_thimac(const std::string& name, std::optional<ThimacId> parent = std::nullopt,
                        const std::string& at = "");
    StageId add_stage(ThimacId owner, StageKind kind, const std::string& name,
                      std::optional<std::string> guard = std::nullopt, bool sink = false,
                      std::vector<int> anchors = {}, const std::string& at = "");
    void add_flow(const std::string& from_path, const std::string& to_path,
                  std::optional<std::string> guard_branch = std::nullopt,
                  std::vector<int> anchors = {}, const std::string& scope = "",
                  const std::string& at = "");
    void add_trigger(const std::string& from_path, const std::string& to_path,
                     std::optional<std::string> constructor = std::nullopt,
                     const std::string& scope = "", const std::string& at = "");

    /// Resolves all references; throws Error(DuplicateId) or
    /// Error(UnresolvedReference) naming the offending id.
    Model build();

private:
    struct PendingEdge {
        bool is_trigger;
        std::string from, to;
        std::optional<std::string> branch_or_ctor;
        std::vector<int> anchors;
        std::string scope; // thimac path the declaration appeared in, "" for root
        std::string at;
    };
    Model model_;
    std::vector<PendingEdge> edges_;
    StageId resolve_stage(const std::string& path, const std::string& scope,
                          const std::string& at) const;
};

/// Structural equality: thimac forest by path, stage attributes by path,
/// and flow/trigger sequences in declaration order.
bool model_equal(const Model& a, const Model& b);

} // namespace tmt

#endif
