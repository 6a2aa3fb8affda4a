#ifndef TMT_OUTCOMES_HPP
#define TMT_OUTCOMES_HPP

#include <vector>

#include "tmt/engine.hpp"
#include "tmt/scenario.hpp"

namespace tmt {

/// End-of-run classification. A token disposed of by the run gets exactly
/// one outcome:
///   - Dropped: terminated by a sink stage (location = the sink's path);
///   - DeliveredLocal: resting on a terminal receive stage (an inbox);
///   - DeliveredExternal: resting on a terminal transfer stage (an outbound
///     boundary, e.g. a router's uplink).
/// Tokens resting elsewhere are latent residue of the run (consumed inputs,
/// extracted copies) and are not classified.
std::vector<Outcome> classify_outcomes(const Trace& trace, const Model& model);

} // namespace tmt

#endif
