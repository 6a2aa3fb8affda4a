#ifndef TMT_SCENARIO_HPP
#define TMT_SCENARIO_HPP

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tmt/error.hpp"
#include "tmt/model.hpp"

namespace tmt {

/// Token payload values: text, integer, boolean, or a sequence of text
/// (body lines, content flags, ...).
using Value = std::variant<std::string, long long, bool, std::vector<std::string>>;
using Payload = std::map<std::string, Value>;

std::string value_text(const Value& v);

/// One firewall/gateway rule: first match wins. An entry with no match
/// fields is the default and must close every policy list.
struct Policy {
    enum class Action { Permit, Deny };
    Action action = Action::Deny;
    std::optional<std::string> dest_domain; // matches the domain of payload "destination"
    std::optional<std::string> source;      // matches payload "source_server"
    std::optional<std::string> flag;        // matches membership in payload "flags"

    bool is_default() const { return !dest_domain && !source && !flag; }
    bool matches(const Payload& p) const;
};

struct MxRecord {
    std::string mx_host;
    std::string ip;
};

struct Injection {
    std::string stage_path; // must resolve to a Create or Receive stage
    Payload payload;
    int count = 1;
};

/// Environment tables for a simulation run. Immutable after load; the
/// predicates and constructors that consult it are pure.
struct Scenario {
    std::string current_domain;
    std::string email_server_id;
    std::vector<std::string> mailboxes;
    std::vector<Policy> internal_fw;
    std::vector<Policy> gateway;
    std::vector<Policy> external_fw;
    std::map<std::string, MxRecord> dns; // domain -> record
    std::map<std::string, std::string> nat; // private ip -> public ip
    std::map<std::string, std::string> routes; // ip prefix -> next-hop label
    std::vector<Injection> injections;
    std::vector<std::string> payload_schema; // optional; empty = unconstrained
};

struct ScenarioLoadResult {
    std::optional<Scenario> scenario;
    std::vector<std::string> diagnostics; // SchemaViolation messages with field paths

    bool ok() const { return diagnostics.empty(); }
};

/// Loads and validates the documented JSON schema: functional dns/nat/routes
/// maps (duplicate keys rejected), policy lists closed by an explicit
/// default, injection counts >= 1.
ScenarioLoadResult load_scenario_text(const std::string& text);
ScenarioLoadResult load_scenario_file(const std::string& path);

/// Checks injection stage paths against a model (Create or Receive stages
/// only). Throws Error(SchemaViolation) on the first bad injection.
void bind_scenario(const Scenario& s, const Model& m);

/// Registered guard predicates:
///   same_domain, mailbox_exists, source_is_email_server,
///   internal_fw_permits, gateway_permits, external_fw_permits,
///   more_lines_pending, mx_exists, nat_exists
/// Pure function of (payload, scenario); unknown names raise GuardUnbound.
bool eval_predicate(const std::string& name, const Payload& payload, const Scenario& s);
bool predicate_known(const std::string& name);

/// Registered payload constructors (applied to the causing token's payload
/// when a trigger births a new thing):
///   copy, reply, first_line, next_line, typed_destination, dest_format,
///   header_template, body_text, attachment_file, build_header,
///   generate_packet, extract_destination, extract_header, mx_record,
///   apply_mx, apply_nat
/// Unknown names raise ConstructorUnbound.
Payload apply_constructor(const std::string& name, const Payload& cause, const Scenario& s);
bool constructor_known(const std::string& name);

/// MX lookup for a mail domain; NoMXRecord when absent.
MxRecord mx_lookup(const std::string& domain, const Scenario& s);

/// NAT image of a private address; NoNatMapping when absent.
std::string nat_translate(const std::string& ip, const Scenario& s);

/// Domain part of "user@domain" addresses (the whole text when no '@').
std::string domain_of(const std::string& address);

enum class OutcomeClass { DeliveredLocal, DeliveredExternal, Dropped };
const char* outcome_class_name(OutcomeClass c);
std::optional<OutcomeClass> outcome_class_from_name(const std::string& name);

struct Outcome {
    int token = -1;
    OutcomeClass cls = OutcomeClass::Dropped;
    std::string location; // stage path
    std::string reason;
};

} // namespace tmt

#endif
