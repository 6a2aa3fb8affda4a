#ifndef TMT_TRACE_IO_HPP
#define TMT_TRACE_IO_HPP

#include <string>
#include <vector>

#include "tmt/engine.hpp"
#include "tmt/scenario.hpp"

namespace tmt {

// Trace files are JSON with a fixed field layout so diffs between runs are
// stable:
//
// {
//   "version": 1,
//   "step_limit_exceeded": false,
//   "steps":       [ {"i","kind","token", then per kind:
//                      create/stage-op/drop -> "stage",
//                      move                 -> "from","to",
//                      trigger-fire         -> "from","to","spawned"} ],
//   "occurrences": [ {"event","step"} ],
//   "tokens":      [ {"id","born_at","fate","at","payload"} ],
//   "outcomes":    [ {"token","class","location","reason"} ]
// }
//
// Expectation files carry the comparable subset:
//
// { "occurrences": ["EventName", ...],
//   "outcomes":    [ {"class","location"}, ... ] }

std::string trace_to_json(const Trace& trace, const Model& model,
                          const std::vector<Outcome>& outcomes);

void write_trace_file(const std::string& path, const Trace& trace, const Model& model,
                      const std::vector<Outcome>& outcomes);

/// The comparable projection of a trace or expectation file.
struct TraceSummary {
    std::vector<std::string> occurrence_events; // in occurrence order
    std::vector<std::pair<std::string, std::string>> outcomes; // (class, location)
};

TraceSummary summarize(const Trace& trace, const std::vector<Outcome>& outcomes);

/// Reads the comparable subset back out of a trace file.
/// Throws Error(IoError) when the file is missing or not parseable JSON.
TraceSummary read_trace_file(const std::string& path);

/// Reads an expectation file. Same error contract as read_trace_file.
TraceSummary read_expected_file(const std::string& path);

struct TraceCheck {
    bool ok = true;
    std::string mismatch; // description of the first difference
};

/// Occurrence order first, then outcomes; reports the first mismatch.
TraceCheck check_trace_against(const TraceSummary& trace, const TraceSummary& expected);

} // namespace tmt

#endif
