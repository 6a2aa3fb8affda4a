#include "tmt/scenario.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "tmt/outcomes.hpp"

namespace tmt {

using nlohmann::json;

std::string value_text(const Value& v) {
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    if (auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
    if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    const auto& list = std::get<std::vector<std::string>>(v);
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < list.size(); ++i) {
        if (i) os << ",";
        os << list[i];
    }
    os << "]";
    return os.str();
}

std::string domain_of(const std::string& address) {
    auto at = address.rfind('@');
    return at == std::string::npos ? address : address.substr(at + 1);
}

namespace {

std::string payload_text(const Payload& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) return "";
    return value_text(it->second);
}

std::vector<std::string> payload_list(const Payload& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) return {};
    if (auto* list = std::get_if<std::vector<std::string>>(&it->second)) return *list;
    return {value_text(it->second)};
}

bool policy_permits(const std::vector<Policy>& policies, const Payload& p) {
    for (const Policy& rule : policies)
        if (rule.matches(p)) return rule.action == Policy::Action::Permit;
    // Loaders enforce a trailing default, so this is unreachable for loaded
    // scenarios; deny is the conservative answer for hand-built ones.
    return false;
}

} // namespace

bool Policy::matches(const Payload& p) const {
    if (dest_domain && domain_of(payload_text(p, "destination")) != *dest_domain) return false;
    if (source && payload_text(p, "source_server") != *source) return false;
    if (flag) {
        auto flags = payload_list(p, "flags");
        bool found = false;
        for (const auto& f : flags)
            if (f == *flag) found = true;
        if (!found) return false;
    }
    return true;
}

bool predicate_known(const std::string& name) {
    static const std::set<std::string> names = {
        "same_domain",        "mailbox_exists",     "source_is_email_server",
        "internal_fw_permits", "gateway_permits",   "external_fw_permits",
        "more_lines_pending", "mx_exists",          "nat_exists"};
    return names.count(name) > 0;
}

bool eval_predicate(const std::string& name, const Payload& payload, const Scenario& s) {
    if (name == "same_domain")
        return domain_of(payload_text(payload, "destination")) == s.current_domain;
    if (name == "mailbox_exists") {
        const std::string dest = payload_text(payload, "destination");
        for (const auto& m : s.mailboxes)
            if (m == dest) return true;
        return false;
    }
    if (name == "source_is_email_server")
        return !s.email_server_id.empty() &&
               payload_text(payload, "source_server") == s.email_server_id;
    if (name == "internal_fw_permits") return policy_permits(s.internal_fw, payload);
    if (name == "gateway_permits") return policy_permits(s.gateway, payload);
    if (name == "external_fw_permits") return policy_permits(s.external_fw, payload);
    if (name == "more_lines_pending") return !payload_list(payload, "remaining").empty();
    if (name == "mx_exists")
        return s.dns.count(domain_of(payload_text(payload, "destination"))) > 0;
    if (name == "nat_exists") return s.nat.count(payload_text(payload, "src_ip")) > 0;
    throw Error(Errc::GuardUnbound, name);
}

MxRecord mx_lookup(const std::string& domain, const Scenario& s) {
    auto it = s.dns.find(domain);
    if (it == s.dns.end()) throw Error(Errc::NoMXRecord, domain);
    return it->second;
}

std::string nat_translate(const std::string& ip, const Scenario& s) {
    auto it = s.nat.find(ip);
    if (it == s.nat.end()) throw Error(Errc::NoNatMapping, ip);
    return it->second;
}

bool constructor_known(const std::string& name) {
    static const std::set<std::string> names = {
        "copy",          "reply",           "first_line",       "next_line",
        "typed_destination", "dest_format", "header_template",  "body_text",
        "attachment_file", "build_header",  "generate_packet",  "extract_destination",
        "extract_header", "mx_record",      "apply_mx",         "apply_nat"};
    return names.count(name) > 0;
}

Payload apply_constructor(const std::string& name, const Payload& cause, const Scenario& s) {
    if (!constructor_known(name)) throw Error(Errc::ConstructorUnbound, name);
    Payload out = cause; // every constructor starts from the causing thing

    if (name == "first_line") {
        auto lines = payload_list(cause, "lines");
        if (lines.empty()) {
            out["current"] = std::string();
            out["remaining"] = std::vector<std::string>{};
        } else {
            out["current"] = lines.front();
            out["remaining"] = std::vector<std::string>(lines.begin() + 1, lines.end());
        }
        return out;
    }
    if (name == "next_line") {
        auto remaining = payload_list(cause, "remaining");
        if (remaining.empty())
            throw Error(Errc::ConstructorFailed, "next_line: no lines remaining");
        out["current"] = remaining.front();
        out["remaining"] = std::vector<std::string>(remaining.begin() + 1, remaining.end());
        return out;
    }
    if (name == "mx_record") {
        auto rec = mx_lookup(domain_of(payload_text(cause, "destination")), s);
        out["mx_host"] = rec.mx_host;
        out["mx_ip"] = rec.ip;
        return out;
    }
    if (name == "apply_mx") {
        auto it = cause.find("mx_ip");
        if (it == cause.end())
            throw Error(Errc::ConstructorFailed, "apply_mx: cause carries no mx_ip");
        out["dest_ip"] = value_text(it->second);
        return out;
    }
    if (name == "apply_nat") {
        out["src_ip"] = nat_translate(payload_text(cause, "src_ip"), s);
        return out;
    }
    // The remaining constructors model copies/derivations whose payload is
    // the conversational state itself; the distinct names keep traces and
    // model files self-describing.
    return out;
}

const char* outcome_class_name(OutcomeClass c) {
    switch (c) {
    case OutcomeClass::DeliveredLocal: return "DeliveredLocal";
    case OutcomeClass::DeliveredExternal: return "DeliveredExternal";
    case OutcomeClass::Dropped: return "Dropped";
    }
    return "?";
}

std::optional<OutcomeClass> outcome_class_from_name(const std::string& name) {
    if (name == "DeliveredLocal") return OutcomeClass::DeliveredLocal;
    if (name == "DeliveredExternal") return OutcomeClass::DeliveredExternal;
    if (name == "Dropped") return OutcomeClass::Dropped;
    return std::nullopt;
}

namespace {

class ScenarioReader {
public:
    explicit ScenarioReader(ScenarioLoadResult& out) : out_(out) {}

    void fail(const std::string& field, const std::string& why) {
        out_.diagnostics.push_back("SchemaViolation(" + field + "): " + why);
    }

    Value value_from_json(const json& j, const std::string& field) {
        if (j.is_string()) return j.get<std::string>();
        if (j.is_number_integer()) return j.get<long long>();
        if (j.is_boolean()) return j.get<bool>();
        if (j.is_array()) {
            std::vector<std::string> list;
            for (const auto& el : j) {
                if (!el.is_string()) {
                    fail(field, "sequence values must be text");
                    return std::string();
                }
                list.push_back(el.get<std::string>());
            }
            return list;
        }
        fail(field, "unsupported value type");
        return std::string();
    }

    std::vector<Policy> read_policies(const json& j, const std::string& field) {
        std::vector<Policy> out;
        if (!j.is_array()) {
            fail(field, "must be a list of policy entries");
            return out;
        }
        for (size_t i = 0; i < j.size(); ++i) {
            const auto& e = j[i];
            std::string at = field + "[" + std::to_string(i) + "]";
            if (!e.is_object() || !e.contains("action")) {
                fail(at, "policy entry needs an action");
                continue;
            }
            Policy p;
            std::string action = e["action"].get<std::string>();
            if (action == "permit")
                p.action = Policy::Action::Permit;
            else if (action == "deny")
                p.action = Policy::Action::Deny;
            else {
                fail(at, "action must be permit or deny");
                continue;
            }
            if (e.contains("dest_domain")) p.dest_domain = e["dest_domain"].get<std::string>();
            if (e.contains("source")) p.source = e["source"].get<std::string>();
            if (e.contains("flag")) p.flag = e["flag"].get<std::string>();
            for (auto it = e.begin(); it != e.end(); ++it)
                if (it.key() != "action" && it.key() != "dest_domain" && it.key() != "source" &&
                    it.key() != "flag")
                    fail(at, "unknown policy field '" + it.key() + "'");
            out.push_back(std::move(p));
        }
        if (out.empty() || !out.back().is_default())
            fail(field, "policy list must end with an explicit default entry");
        return out;
    }

    // Functional maps are written as entry lists so duplicate keys are
    // detectable (JSON objects silently collapse them).
    template <typename Fn>
    void read_entries(const json& j, const std::string& field, const char* key_name, Fn&& insert) {
        if (!j.is_array()) {
            fail(field, "must be a list of entries");
            return;
        }
        for (size_t i = 0; i < j.size(); ++i) {
            const auto& e = j[i];
            std::string at = field + "[" + std::to_string(i) + "]";
            if (!e.is_object() || !e.contains(key_name)) {
                fail(at, std::string("entry needs '") + key_name + "'");
                continue;
            }
            if (!insert(e)) fail(field, "duplicate key '" + e[key_name].get<std::string>() + "'");
        }
    }

private:
    ScenarioLoadResult& out_;
};

} // namespace

namespace {
ScenarioLoadResult load_scenario_checked(const std::string& text);
} // namespace

ScenarioLoadResult load_scenario_text(const std::string& text) {
    try {
        return load_scenario_checked(text);
    } catch (const json::exception& e) {
        // A section held the wrong JSON type somewhere the reader expected
        // better; report it instead of propagating.
        ScenarioLoadResult out;
        out.diagnostics.push_back(std::string("SchemaViolation(<root>): ") + e.what());
        return out;
    }
}

namespace {

ScenarioLoadResult load_scenario_checked(const std::string& text) {
    ScenarioLoadResult out;
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
        out.diagnostics.push_back("SchemaViolation(<root>): not valid JSON");
        return out;
    }
    if (!j.is_object()) {
        out.diagnostics.push_back("SchemaViolation(<root>): top level must be an object");
        return out;
    }

    ScenarioReader r(out);
    Scenario s;
    if (j.contains("current_domain")) s.current_domain = j["current_domain"].get<std::string>();
    if (j.contains("email_server_id")) s.email_server_id = j["email_server_id"].get<std::string>();
    if (j.contains("mailboxes")) {
        for (const auto& m : j["mailboxes"]) {
            if (!m.is_string() || m.get<std::string>().empty()) {
                r.fail("mailboxes", "addresses must be non-empty text");
                continue;
            }
            s.mailboxes.push_back(m.get<std::string>());
        }
    }
    s.internal_fw = r.read_policies(j.value("internal_fw", json::array({{{"action", "permit"}}})),
                                    "internal_fw");
    s.gateway = r.read_policies(j.value("gateway", json::array({{{"action", "permit"}}})),
                                "gateway");
    s.external_fw = r.read_policies(j.value("external_fw", json::array({{{"action", "permit"}}})),
                                    "external_fw");

    if (j.contains("dns"))
        r.read_entries(j["dns"], "dns", "domain", [&](const json& e) {
            MxRecord rec;
            rec.mx_host = e.value("mx_host", "");
            rec.ip = e.value("ip", "");
            if (rec.mx_host.empty() || rec.ip.empty()) {
                r.fail("dns", "entry needs mx_host and ip");
                return true;
            }
            return s.dns.emplace(e["domain"].get<std::string>(), rec).second;
        });
    if (j.contains("nat"))
        r.read_entries(j["nat"], "nat", "from", [&](const json& e) {
            std::string to = e.value("to", "");
            if (to.empty()) {
                r.fail("nat", "entry needs a 'to' address");
                return true;
            }
            return s.nat.emplace(e["from"].get<std::string>(), to).second;
        });
    if (j.contains("routes"))
        r.read_entries(j["routes"], "routes", "prefix", [&](const json& e) {
            std::string hop = e.value("next_hop", "");
            if (hop.empty()) {
                r.fail("routes", "entry needs a next_hop label");
                return true;
            }
            return s.routes.emplace(e["prefix"].get<std::string>(), hop).second;
        });

    if (j.contains("payload_schema"))
        for (const auto& k : j["payload_schema"]) s.payload_schema.push_back(k.get<std::string>());

    if (j.contains("injections")) {
        const auto& inj = j["injections"];
        if (!inj.is_array()) {
            r.fail("injections", "must be a list");
        } else {
            for (size_t i = 0; i < inj.size(); ++i) {
                const auto& e = inj[i];
                std::string at = "injections[" + std::to_string(i) + "]";
                if (!e.is_object() || !e.contains("stage")) {
                    r.fail(at, "entry needs a stage path");
                    continue;
                }
                Injection x;
                x.stage_path = e["stage"].get<std::string>();
                x.count = e.value("count", 1);
                if (x.count < 1) {
                    r.fail(at, "count must be >= 1");
                    continue;
                }
                if (e.contains("payload")) {
                    if (!e["payload"].is_object()) {
                        r.fail(at + ".payload", "must be an object");
                        continue;
                    }
                    for (auto it = e["payload"].begin(); it != e["payload"].end(); ++it) {
                        if (!s.payload_schema.empty()) {
                            bool ok = false;
                            for (const auto& k : s.payload_schema)
                                if (k == it.key()) ok = true;
                            if (!ok) r.fail(at + ".payload." + it.key(), "key not in payload_schema");
                        }
                        x.payload[it.key()] = r.value_from_json(it.value(), at + ".payload");
                    }
                }
                s.injections.push_back(std::move(x));
            }
        }
    }

    for (auto it = j.begin(); it != j.end(); ++it) {
        static const std::set<std::string> known = {
            "current_domain", "email_server_id", "mailboxes", "internal_fw", "gateway",
            "external_fw",    "dns",             "nat",       "routes",      "injections",
            "payload_schema", "description"};
        if (!known.count(it.key())) r.fail(it.key(), "unknown section");
    }

    if (out.diagnostics.empty()) out.scenario = std::move(s);
    return out;
}

} // namespace

ScenarioLoadResult load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario_text(buf.str());
}

void bind_scenario(const Scenario& s, const Model& m) {
    for (const auto& inj : s.injections) {
        auto sid = m.find_stage(inj.stage_path);
        if (!sid)
            throw Error(Errc::SchemaViolation,
                        "injections: stage '" + inj.stage_path + "' does not exist");
        StageKind k = m.stages[*sid].kind;
        if (k != StageKind::Create && k != StageKind::Receive)
            throw Error(Errc::SchemaViolation, "injections: stage '" + inj.stage_path +
                                                   "' is neither a create nor a receive stage");
    }
}

std::vector<Outcome> classify_outcomes(const Trace& trace, const Model& model) {
    std::vector<Outcome> out;
    for (const TokenSummary& t : trace.tokens) {
        const Stage& at = model.stage(t.location);
        if (t.fate == TokenFate::Dropped) {
            out.push_back({t.id, OutcomeClass::Dropped, at.path, "entered sink"});
            continue;
        }
        if (t.fate != TokenFate::Resting) continue;
        if (!model.flows_from(t.location).empty()) continue;
        if (at.kind == StageKind::Receive)
            out.push_back({t.id, OutcomeClass::DeliveredLocal, at.path, "terminal receive"});
        else if (at.kind == StageKind::Transfer)
            out.push_back({t.id, OutcomeClass::DeliveredExternal, at.path, "terminal transfer"});
    }
    return out;
}

} // namespace tmt
