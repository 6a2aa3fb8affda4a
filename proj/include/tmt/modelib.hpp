#ifndef TMT_MODELIB_HPP
#define TMT_MODELIB_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tmt/model.hpp"
#include "tmt/scenario.hpp"

namespace tmt {

/// Sources and expectations of one bundled case study. Cases live under a
/// `cases/` tree (cases/<name>/model.tm, events.tme, scenarios/*.scn,
/// expected/*.json); the TM_CASES_DIR environment variable overrides the
/// built-in location.
struct BundledCase {
    std::string name;
    std::string dir;
    std::string model_source;
    std::string events_source;
    std::map<std::string, std::string> extra_event_sources; // e.g. firewall events
    std::map<std::string, std::string> scenario_sources;    // scenario name -> text
    std::map<std::string, std::string> expected_sources;    // scenario name -> text
    std::pair<int, int> anchor_range{0, 0};                 // inclusive; 0,0 = none
    std::vector<int> anchor_exclusions;                     // numbers documented as absent
};

/// Directory the bundled cases are read from.
std::string cases_dir();

/// Loads "smtp" or "email-security"; anything else raises UnknownCase.
BundledCase builtin_case(const std::string& name);

/// The SMTP event names in protocol order.
std::vector<std::string> expected_smtp_order();

/// Expected terminal classification for the five canonical email scenarios;
/// unknown names raise UnknownScenario.
std::pair<OutcomeClass, std::string> expected_email_outcome(const std::string& scenario);

struct AnchorAudit {
    int range_lo = 0, range_hi = 0;
    std::vector<int> missing;    // neither anchored nor excluded
    std::vector<int> duplicated; // anchored on more than one element
    int accounted = 0;           // anchored or excluded, within range

    bool complete() const { return missing.empty() && duplicated.empty(); }
};

/// Checks that every number in the case's anchor range appears on exactly
/// one stage or flow, or is listed in the case's documented exclusions.
AnchorAudit audit_anchors(const BundledCase& c, const Model& parsed);

} // namespace tmt

#endif
