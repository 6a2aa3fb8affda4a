#include <doctest.h>

#include "helpers.hpp"
#include "tmt/dsl.hpp"
#include "tmt/outcomes.hpp"
#include "tmt/scenario.hpp"

using namespace tmt;

TEST_CASE("minimal scenario loads with defaulted tables") {
    auto res = load_scenario_text(R"({
      "injections": [{"stage": "M.c", "count": 1, "payload": {}}]
    })");
    REQUIRE(res.ok());
    CHECK(res.scenario->injections.size() == 1);
    CHECK(res.scenario->internal_fw.size() == 1);
    CHECK(res.scenario->internal_fw[0].is_default());
    CHECK(res.scenario->gateway[0].action == Policy::Action::Permit);
}

TEST_CASE("bundled email-local scenario round-trips through the loader") {
    auto raw = builtin_case("email-security");
    auto res = load_scenario_text(raw.scenario_sources.at("local-delivered"));
    REQUIRE(res.ok());
    const Scenario& s = *res.scenario;
    CHECK(s.current_domain == "corp.gov");
    CHECK(s.mailboxes.size() == 2);
    CHECK(s.dns.at("yahoo.com").ip == "203.0.113.5");
    CHECK(s.nat.at("10.0.0.5") == "198.51.100.7");
    CHECK(s.injections.size() == 1);
    CHECK(s.injections[0].stage_path == "Workstation.User.intent");
}

TEST_CASE("load_scenario_file reads from disk and rejects missing paths") {
    auto raw = builtin_case("smtp");
    auto res = load_scenario_file(raw.dir + "/scenarios/default.scn");
    REQUIRE(res.ok());
    CHECK(res.scenario->injections[0].stage_path == "BobMailServer.Ehlo.c");
    CHECK_THROWS_AS(load_scenario_file("/nonexistent/nope.scn"), Error);
}

TEST_CASE("duplicate nat key is a schema violation naming the table") {
    auto res = load_scenario_text(R"({
      "nat": [{"from": "10.0.0.5", "to": "a"}, {"from": "10.0.0.5", "to": "b"}]
    })");
    REQUIRE_FALSE(res.ok());
    bool named = false;
    for (const auto& d : res.diagnostics)
        if (d.find("SchemaViolation(nat)") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("policy lists must end with an explicit default") {
    auto res = load_scenario_text(R"({
      "gateway": [{"action": "deny", "flag": "confidential"}]
    })");
    REQUIRE_FALSE(res.ok());
    bool named = false;
    for (const auto& d : res.diagnostics)
        if (d.find("SchemaViolation(gateway)") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("schema violations carry field paths") {
    auto res = load_scenario_text(R"({
      "injections": [{"count": 2}]
    })");
    REQUIRE_FALSE(res.ok());
    CHECK(res.diagnostics[0].find("injections[0]") != std::string::npos);

    auto bad_count = load_scenario_text(R"({
      "injections": [{"stage": "M.c", "count": 0}]
    })");
    REQUIRE_FALSE(bad_count.ok());

    auto unknown = load_scenario_text(R"({"nonsense": 1})");
    REQUIRE_FALSE(unknown.ok());
    CHECK(unknown.diagnostics[0].find("nonsense") != std::string::npos);

    auto not_json = load_scenario_text("machine M {}");
    REQUIRE_FALSE(not_json.ok());

    // Wrong JSON types surface as diagnostics, never as crashes.
    for (const char* text : {R"({"mailboxes": 42})", R"({"current_domain": []})",
                             R"({"internal_fw": [{"action": 3}]})",
                             R"({"dns": [{"domain": 9, "mx_host": "m", "ip": "i"}]})",
                             R"({"injections": [{"stage": ["list"]}]})"}) {
        auto res = load_scenario_text(text);
        CHECK_FALSE(res.ok());
    }
}

TEST_CASE("payload schema, when declared, constrains injection keys") {
    auto res = load_scenario_text(R"({
      "payload_schema": ["destination"],
      "injections": [{"stage": "M.c", "payload": {"destination": "a@b", "rogue": 1}}]
    })");
    REQUIRE_FALSE(res.ok());
    bool named = false;
    for (const auto& d : res.diagnostics)
        if (d.find("rogue") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("bind_scenario rejects injections at non create/receive stages") {
    auto model = dsl::parse("machine M { create c; release r; transfer t; receive v;"
                            " flow c -> r; flow r -> t; flow t -> v; }");
    REQUIRE(model.ok());
    CHECK_NOTHROW(bind_scenario(test::minimal_scenario("M.c"), *model.model));
    CHECK_NOTHROW(bind_scenario(test::minimal_scenario("M.v"), *model.model));
    CHECK_THROWS_AS(bind_scenario(test::minimal_scenario("M.r"), *model.model), Error);
    CHECK_THROWS_AS(bind_scenario(test::minimal_scenario("M.ghost"), *model.model), Error);
}

TEST_CASE("predicates evaluate the documented decision points") {
    Scenario s;
    s.current_domain = "corp.gov";
    s.email_server_id = "exchange-01";
    s.mailboxes = {"alice@corp.gov"};
    Policy permit_yahoo;
    permit_yahoo.action = Policy::Action::Permit;
    permit_yahoo.dest_domain = "yahoo.com";
    Policy deny_all;
    deny_all.action = Policy::Action::Deny;
    s.internal_fw = {permit_yahoo, deny_all};
    Policy deny_conf;
    deny_conf.action = Policy::Action::Deny;
    deny_conf.flag = "confidential";
    Policy permit_all;
    permit_all.action = Policy::Action::Permit;
    s.gateway = {deny_conf, permit_all};
    s.external_fw = {permit_all};
    s.dns["yahoo.com"] = {"mx1.yahoo.com", "203.0.113.5"};
    s.nat["10.0.0.5"] = "198.51.100.7";

    Payload local{{"destination", std::string("alice@corp.gov")}};
    CHECK(eval_predicate("same_domain", local, s));
    CHECK(eval_predicate("mailbox_exists", local, s));

    Payload stranger{{"destination", std::string("bob@corp.gov")}};
    CHECK(eval_predicate("same_domain", stranger, s));
    CHECK_FALSE(eval_predicate("mailbox_exists", stranger, s));

    Payload outbound{{"destination", std::string("p@yahoo.com")},
                     {"source_server", std::string("exchange-01")},
                     {"src_ip", std::string("10.0.0.5")},
                     {"flags", std::vector<std::string>{}}};
    CHECK_FALSE(eval_predicate("same_domain", outbound, s));
    CHECK(eval_predicate("source_is_email_server", outbound, s));
    CHECK(eval_predicate("internal_fw_permits", outbound, s));
    CHECK(eval_predicate("gateway_permits", outbound, s));
    CHECK(eval_predicate("external_fw_permits", outbound, s));
    CHECK(eval_predicate("mx_exists", outbound, s));
    CHECK(eval_predicate("nat_exists", outbound, s));

    Payload spoofed = outbound;
    spoofed.erase("source_server");
    CHECK_FALSE(eval_predicate("source_is_email_server", spoofed, s));

    Payload secret = outbound;
    secret["flags"] = std::vector<std::string>{"confidential"};
    CHECK_FALSE(eval_predicate("gateway_permits", secret, s));

    Payload elsewhere = outbound;
    elsewhere["destination"] = std::string("p@example.org");
    CHECK_FALSE(eval_predicate("internal_fw_permits", elsewhere, s));
    CHECK_FALSE(eval_predicate("mx_exists", elsewhere, s));

    CHECK_THROWS_AS(eval_predicate("no_such_predicate", local, s), Error);
    try {
        eval_predicate("no_such_predicate", local, s);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::GuardUnbound);
    }

    // Purity: repeated evaluation over the same inputs agrees.
    for (int i = 0; i < 3; ++i) CHECK(eval_predicate("mailbox_exists", local, s));
}

TEST_CASE("policy totality: every payload matches some entry") {
    Scenario s;
    Policy deny_conf;
    deny_conf.action = Policy::Action::Deny;
    deny_conf.flag = "confidential";
    Policy permit_all;
    permit_all.action = Policy::Action::Permit;
    s.gateway = {deny_conf, permit_all};

    std::mt19937 rng(3);
    for (int i = 0; i < 50; ++i) {
        Payload p{{"destination", std::string("u") + std::to_string(rng() % 9) + "@d" +
                                      std::to_string(rng() % 9)},
                  {"flags", rng() % 2 ? std::vector<std::string>{"confidential"}
                                      : std::vector<std::string>{}}};
        bool matched = false;
        for (const auto& rule : s.gateway)
            if (rule.matches(p)) {
                matched = true;
                break;
            }
        CHECK(matched);
    }
}

TEST_CASE("mx_lookup and nat_translate") {
    Scenario s;
    s.dns["yahoo.com"] = {"mx1.yahoo.com", "203.0.113.5"};
    s.dns["google.com"] = {"www.google.com", "8.8.8.8"};
    s.nat["10.0.0.5"] = "198.51.100.7";
    s.nat["10.0.0.9"] = "10.0.0.9"; // identity entry

    auto rec = mx_lookup("yahoo.com", s);
    CHECK(rec.mx_host == "mx1.yahoo.com");
    CHECK(rec.ip == "203.0.113.5");
    CHECK(mx_lookup("google.com", s).ip == "8.8.8.8");
    CHECK_THROWS_AS(mx_lookup("nowhere.test", s), Error);
    try {
        mx_lookup("nowhere.test", s);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NoMXRecord);
    }

    CHECK(nat_translate("10.0.0.5", s) == "198.51.100.7");
    CHECK(nat_translate("10.0.0.9", s) == "10.0.0.9");
    CHECK_THROWS_AS(nat_translate("10.9.9.9", s), Error);
    try {
        nat_translate("10.9.9.9", s);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NoNatMapping);
    }
}

TEST_CASE("classify_outcomes partitions the disposed tokens") {
    auto email = test::load_case("email-security");
    for (const auto& [name, sc] : email.scenarios) {
        auto trace = simulate(email.model, sc, email.events);
        auto outcomes = classify_outcomes(trace, email.model);
        REQUIRE(outcomes.size() == 1);
        std::set<int> seen;
        for (const auto& o : outcomes) CHECK(seen.insert(o.token).second);

        auto [cls, where] = expected_email_outcome(name);
        CHECK(outcomes[0].cls == cls);
        CHECK(outcomes[0].location == where);
    }
}

TEST_CASE("external-clean rewrites the header from the scenario tables") {
    auto email = test::load_case("email-security");
    const Scenario& sc = email.scenarios.at("external-clean");
    auto trace = simulate(email.model, sc, email.events);
    auto outcomes = classify_outcomes(trace, email.model);
    REQUIRE(outcomes.size() == 1);
    REQUIRE(outcomes[0].cls == OutcomeClass::DeliveredExternal);

    const TokenSummary* final_tok = nullptr;
    for (const auto& t : trace.tokens)
        if (t.id == outcomes[0].token) final_tok = &t;
    REQUIRE(final_tok);
    std::string domain = domain_of(value_text(final_tok->payload.at("destination")));
    CHECK(value_text(final_tok->payload.at("dest_ip")) == sc.dns.at(domain).ip);
    CHECK(value_text(final_tok->payload.at("src_ip")) ==
          sc.nat.at(value_text(sc.injections[0].payload.at("src_ip"))));
}

TEST_CASE("domain_of splits addresses") {
    CHECK(domain_of("alice@corp.gov") == "corp.gov");
    CHECK(domain_of("corp.gov") == "corp.gov");
    CHECK(domain_of("a@b@c.org") == "c.org");
}
