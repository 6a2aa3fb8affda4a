#ifndef TMT_VALIDATOR_HPP
#define TMT_VALIDATOR_HPP

#include <optional>
#include <string>
#include <vector>

#include "tmt/engine.hpp"
#include "tmt/model.hpp"

namespace tmt {

// Static semantic checks against the stage grammar.
//
// Intra-machine flows must be one of:
//   create   -> process | release
//   receive  -> process | release
//   process  -> release
//   release  -> transfer
//   transfer -> receive
// The only legal boundary crossing is transfer -> transfer. Triggers are
// exempt from the table and may connect any pair of stages.
//
// Codes: E_ADJ illegal intra-machine pair, E_XFER illegal boundary crossing,
// E_ORPHAN stage with no incident edges, E_GUARD guard/branch misuse,
// E_REGION bad event region, E_CHRONO bad chronology, W_UNREACHABLE stage
// not reachable from any start, W_TRIGGER trigger aimed at a stage kind
// that cannot consume an activation (not Create, not Process).

enum class Severity { Error, Warning };
const char* severity_name(Severity s);

struct Diagnostic {
    std::string code;
    Severity severity = Severity::Error;
    std::string subject; // element path or edge description
    std::string message;

    std::string line() const; // "CODE severity subject message"
};

struct ValidateOptions {
    /// Extra reachability starts beyond the model's Create stages, e.g. a
    /// scenario's injection stages. Paths that do not resolve are ignored.
    std::vector<std::string> injectable_stages;
};

/// Runs every static check over the model. Empty result iff the model is
/// clean; diagnostics come back ordered by subject declaration order.
/// Problems are returned, never thrown.
std::vector<Diagnostic> validate(const Model& model, const ValidateOptions& opts = {});

/// Full check including events and their chronology.
std::vector<Diagnostic> validate(const Model& model, const std::vector<Event>& events,
                                 const Chronology& chronology, const ValidateOptions& opts = {});

/// Adjacency check for one flow; nullopt when the pair is legal.
std::optional<Diagnostic> check_stage_adjacency(const Flow& flow, const Model& model);

/// E_REGION unless every region element exists and the region's stages are
/// connected via undirected model edges or shared ownership.
std::optional<Diagnostic> check_event_region(const Event& event, const Model& model);

/// E_CHRONO on cycles and on edges (A, B) with no flow/trigger path from
/// A's region to B's region.
std::vector<Diagnostic> check_chronology(const Chronology& chronology, const Model& model,
                                         const std::vector<Event>& events);

} // namespace tmt

#endif
