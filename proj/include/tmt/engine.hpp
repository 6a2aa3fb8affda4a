#ifndef TMT_ENGINE_HPP
#define TMT_ENGINE_HPP

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tmt/model.hpp"
#include "tmt/scenario.hpp"

namespace tmt {

/// A named region of the static model plus time: the unit of dynamic
/// behavior. An occurrence is detected once every region stage has been
/// visited since the previous occurrence.
struct Event {
    int id = -1;
    std::string name;
    std::set<StageId> region_stages;
    std::set<FlowId> region_flows;
};

/// Precedence DAG over events.
struct Chronology {
    std::vector<std::string> events; // declared event names, in order
    std::vector<std::pair<std::string, std::string>> edges; // (before, after)
};

enum class StepKind { Create, Move, StageOp, TriggerFire, Drop };
const char* step_kind_name(StepKind k);

/// One scheduler action. `index` values are dense and strictly increasing
/// within a trace.
struct MicroStep {
    int index = -1;
    int token = -1;
    StepKind kind = StepKind::Move;
    StageId from = -1;    // move, trigger-fire
    StageId to = -1;      // every kind: the stage acted on / arrived at
    FlowId flow = -1;     // move
    TriggerId trigger = -1; // trigger-fire
    int spawned = -1;     // trigger-fire: id of the token it birthed
};

struct Occurrence {
    int event = -1; // index into the event list passed to the run
    int step = -1;  // step index that completed the region
};

enum class TokenFate { Resting, Dropped, Live };
const char* token_fate_name(TokenFate f);

struct TokenSummary {
    int id = -1;
    int born_at = -1; // step index of its create step, -1 if never scheduled
    TokenFate fate = TokenFate::Live;
    StageId location = -1;
    Payload payload;
};

/// Total record of a run. Serialization (trace_io) is byte-stable:
/// identical inputs yield identical trace files.
struct Trace {
    std::vector<MicroStep> steps;
    std::vector<Occurrence> occurrences;
    std::vector<TokenSummary> tokens;
    std::vector<std::string> event_names; // names for occurrence indices
    bool step_limit_exceeded = false;
};

struct SimLimits {
    long long max_steps = 100000;
};

/// Mutable state of one run. A run owns its state exclusively; distinct
/// runs over the same Model/Scenario may proceed in parallel.
class SimState {
public:
    SimState(const Model& model, const Scenario& scenario);

    /// True when no token has a pending action.
    bool quiescent() const;

    /// Executes exactly one micro-step under the deterministic policy:
    /// lowest pending token id first, then earliest-declared enabled edge.
    /// Throws Error(Quiescent) when nothing is enabled.
    void step();

    long long steps_executed() const { return static_cast<long long>(steps_.size()); }
    const std::vector<MicroStep>& steps() const { return steps_; }

    /// Trigger activations recorded against non-Create targets:
    /// (trigger id, causing token id). Queryable causal annotations.
    const std::vector<std::pair<TriggerId, int>>& activations() const { return activations_; }

    Trace finish(const std::vector<Event>& events, bool limit_hit) const;

private:
    struct TokenState {
        int id;
        Payload payload;
        StageId location = -1; // stage it is at (or will be born at)
        bool alive = true;
        bool born = false;
        enum class Phase { AwaitBirth, AwaitStageOp, AwaitTriggers, AwaitMove, AwaitDrop, Done };
        Phase phase = Phase::AwaitBirth;
        size_t next_trigger = 0; // position in the owner stage's trigger list
        int born_step = -1;
    };

    const Model& model_;
    const Scenario& scenario_;
    std::vector<TokenState> tokens_;
    std::vector<MicroStep> steps_;
    std::vector<std::pair<TriggerId, int>> activations_;

    int pick_token() const;
    bool has_pending(const TokenState& t) const;
    void after_arrival(TokenState& t);
    std::optional<FlowId> enabled_flow(const TokenState& t) const;
    void record(MicroStep s);
};

/// Runs micro-steps until quiescence or the step limit, then detects event
/// occurrences. Requires a statically valid model; guard and constructor
/// names are checked up front (GuardUnbound / ConstructorUnbound).
Trace simulate(const Model& model, const Scenario& scenario,
               const std::vector<Event>& events = {}, SimLimits limits = {});

/// Replays the region-coverage scan over recorded steps. Regions reset
/// after each occurrence, so repeated behavior yields repeated occurrences.
std::vector<Occurrence> detect_occurrences(const std::vector<MicroStep>& steps,
                                           const std::vector<Event>& events);

struct ConformanceResult {
    bool ok = true;
    std::string before, after; // violated edge
    int k = 0;                 // 1-based occurrence index of `after` lacking cover
    std::string message;
};

/// True iff for every chronology edge (A, B) the k-th occurrence of B is
/// preceded by at least k occurrences of A.
ConformanceResult conforms(const std::vector<Occurrence>& occurrences,
                           const std::vector<Event>& events, const Chronology& chronology);

} // namespace tmt

#endif
