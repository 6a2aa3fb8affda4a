#include <doctest.h>

#include "helpers.hpp"
#include "tmt/dsl.hpp"
#include "tmt/validator.hpp"

using namespace tmt;

namespace {

bool has_code(const std::vector<Diagnostic>& diags, const std::string& code) {
    for (const auto& d : diags)
        if (d.code == code) return true;
    return false;
}

Model two_machines() {
    // A: create -> process -> release -> transfer; B: transfer -> receive.
    auto res = dsl::parse("machine A { create c; process p; release r; transfer t;"
                          " flow c -> p; flow p -> r; flow r -> t; }"
                          "machine B { transfer t; receive rcv; flow t -> rcv; }"
                          "flow A.t -> B.t;");
    REQUIRE(res.ok());
    return std::move(*res.model);
}

} // namespace

TEST_CASE("bundled models validate clean") {
    for (const char* name : {"smtp", "email-security"}) {
        auto c = test::load_case(name);
        auto diags = validate(c.model, c.events, c.chronology);
        for (const auto& d : diags) MESSAGE(d.line());
        CHECK(diags.empty());
    }
    auto email = test::load_case("email-security");
    auto fw = dsl::parse_events(email.raw.extra_event_sources.at("events-firewall"), email.model);
    REQUIRE(fw.ok());
    CHECK(validate(email.model, fw.events, fw.chronology).empty());
}

TEST_CASE("legal adjacency pairs produce no diagnostic") {
    Model m = two_machines();
    for (const auto& f : m.flows) CHECK_FALSE(check_stage_adjacency(f, m).has_value());
}

TEST_CASE("intra-machine process -> receive is E_ADJ") {
    auto res = dsl::parse("machine A { process p; receive rcv; flow p -> rcv; }");
    REQUIRE(res.ok());
    auto d = check_stage_adjacency(res.model->flows[0], *res.model);
    REQUIRE(d.has_value());
    CHECK(d->code == "E_ADJ");
    CHECK(has_code(validate(*res.model), "E_ADJ"));
}

TEST_CASE("intra-machine create -> create is E_ADJ") {
    auto res = dsl::parse("machine A { create a; create b; flow a -> b; }");
    REQUIRE(res.ok());
    auto d = check_stage_adjacency(res.model->flows[0], *res.model);
    REQUIRE(d.has_value());
    CHECK(d->code == "E_ADJ");
}

TEST_CASE("boundary crossing release -> receive is E_XFER") {
    auto res = dsl::parse("machine A { release r; } machine B { receive rcv; } flow A.r -> B.rcv;");
    REQUIRE(res.ok());
    auto d = check_stage_adjacency(res.model->flows[0], *res.model);
    REQUIRE(d.has_value());
    CHECK(d->code == "E_XFER");
}

TEST_CASE("transfer -> transfer is the one legal crossing") {
    Model m = two_machines();
    const Flow& boundary = m.flows.back();
    CHECK(m.stages[boundary.from].path == "A.t");
    CHECK_FALSE(check_stage_adjacency(boundary, m).has_value());
}

TEST_CASE("guard misuse is E_GUARD") {
    auto on_release = dsl::parse("machine A { release r guard g; transfer t; flow r -> t; }");
    REQUIRE(on_release.ok());
    CHECK(has_code(validate(*on_release.model), "E_GUARD"));

    auto stray_branch = dsl::parse("machine A { create c; release r; flow c -> r when true; }");
    REQUIRE(stray_branch.ok());
    CHECK(has_code(validate(*stray_branch.model), "E_GUARD"));

    auto unlabeled = dsl::parse("machine A { receive v; process p guard g; release r;"
                                " flow v -> p; flow p -> r; }");
    REQUIRE(unlabeled.ok());
    CHECK(has_code(validate(*unlabeled.model), "E_GUARD"));

    auto bad_label = dsl::parse("machine A { receive v; process p guard g; release r;"
                                " flow v -> p; flow p -> r when maybe; }");
    REQUIRE(bad_label.ok());
    CHECK(has_code(validate(*bad_label.model), "E_GUARD"));
}

TEST_CASE("disconnected stages are E_ORPHAN") {
    auto res = dsl::parse("machine A { create c; release r; process lonely; flow c -> r; }");
    REQUIRE(res.ok());
    auto diags = validate(*res.model);
    REQUIRE(has_code(diags, "E_ORPHAN"));
    bool found = false;
    for (const auto& d : diags)
        if (d.code == "E_ORPHAN" && d.subject == "A.lonely") found = true;
    CHECK(found);
}

TEST_CASE("triggers are exempt from adjacency but odd targets warn") {
    auto res = dsl::parse("machine A { create c; release r; transfer t; flow c -> r; flow r -> t; "
                          "trigger t -> c; }"); // transfer -> create would be illegal as a flow
    REQUIRE(res.ok());
    CHECK_FALSE(has_code(validate(*res.model), "E_ADJ"));

    auto odd = dsl::parse("machine A { create c; release r; release x; flow c -> r; "
                          "trigger c -> x; }");
    REQUIRE(odd.ok());
    auto diags = validate(*odd.model);
    CHECK(has_code(diags, "W_TRIGGER"));
    for (const auto& d : diags)
        if (d.code == "W_TRIGGER") CHECK(d.severity == Severity::Warning);
}

TEST_CASE("W_UNREACHABLE marks exactly the stages no start can reach") {
    auto res = dsl::parse("machine A { create c; release r; flow c -> r; }"
                          "machine B { transfer t; receive rcv; process p;"
                          " flow t -> rcv; flow rcv -> p; }");
    REQUIRE(res.ok());
    auto diags = validate(*res.model);
    std::set<std::string> flagged;
    for (const auto& d : diags)
        if (d.code == "W_UNREACHABLE") flagged.insert(d.subject);
    CHECK(flagged == std::set<std::string>{"B.t", "B.rcv", "B.p"});

    // Declaring B.t as a scenario injection point clears the warnings.
    ValidateOptions opts;
    opts.injectable_stages = {"B.t"};
    CHECK_FALSE(has_code(validate(*res.model, opts), "W_UNREACHABLE"));
}

TEST_CASE("diagnostics come out in declaration order") {
    auto res = dsl::parse("machine A { process early; create c; release r; process late;"
                          " flow c -> r; }");
    REQUIRE(res.ok());
    auto diags = validate(*res.model);
    REQUIRE(diags.size() >= 2);
    std::vector<std::string> orphans;
    for (const auto& d : diags)
        if (d.code == "E_ORPHAN") orphans.push_back(d.subject);
    CHECK(orphans == std::vector<std::string>{"A.early", "A.late"});
}

TEST_CASE("adjacency soundness: clean models re-scan clean") {
    std::mt19937 rng(5150);
    int clean_seen = 0;
    for (int i = 0; i < 60; ++i) {
        Model m = test::random_model(rng);
        auto diags = validate(m);
        bool clean = true;
        for (const auto& d : diags)
            if (d.code == "E_ADJ" || d.code == "E_XFER") clean = false;
        if (!clean) continue;
        ++clean_seen;
        // Independent re-scan of every flow against the allowed table.
        for (const auto& f : m.flows) {
            StageKind a = m.stages[f.from].kind;
            StageKind b = m.stages[f.to].kind;
            bool same = m.stages[f.from].owner == m.stages[f.to].owner;
            bool ok;
            if (same) {
                ok = (a == StageKind::Create && (b == StageKind::Process || b == StageKind::Release)) ||
                     (a == StageKind::Receive && (b == StageKind::Process || b == StageKind::Release)) ||
                     (a == StageKind::Process && b == StageKind::Release) ||
                     (a == StageKind::Release && b == StageKind::Transfer) ||
                     (a == StageKind::Transfer && b == StageKind::Receive);
            } else {
                ok = a == StageKind::Transfer && b == StageKind::Transfer;
            }
            CHECK(ok);
        }
    }
    CHECK(clean_seen > 0);
}

TEST_CASE("event region checks") {
    auto smtp = test::load_case("smtp");

    Event single;
    single.name = "one";
    single.region_stages = {*smtp.model.find_stage("BobMailServer.Ehlo.c")};
    CHECK_FALSE(check_event_region(single, smtp.model).has_value());

    // The data-line region straddles the two servers via the boundary flow.
    Event line;
    line.name = "line";
    for (const char* p : {"BobMailServer.DataLine.r", "BobMailServer.DataLine.t",
                          "AliceMailServer.DataLine.t", "AliceMailServer.DataLine.rcv"})
        line.region_stages.insert(*smtp.model.find_stage(p));
    CHECK_FALSE(check_event_region(line, smtp.model).has_value());

    Event stale;
    stale.name = "stale";
    stale.region_stages = {static_cast<StageId>(smtp.model.stages.size()) + 5};
    auto d = check_event_region(stale, smtp.model);
    REQUIRE(d.has_value());
    CHECK(d->code == "E_REGION");

    Event split;
    split.name = "split";
    split.region_stages = {*smtp.model.find_stage("BobMailServer.Ehlo.c"),
                           *smtp.model.find_stage("AliceMailServer.Quit.p")};
    auto d2 = check_event_region(split, smtp.model);
    REQUIRE(d2.has_value());
    CHECK(d2->code == "E_REGION");

    Event empty;
    empty.name = "empty";
    auto d3 = check_event_region(empty, smtp.model);
    REQUIRE(d3.has_value());
    CHECK(d3->code == "E_REGION");
}

TEST_CASE("chronology checks against the smtp fixture") {
    auto smtp = test::load_case("smtp");

    // The bundled chain: every edge has a path (oracle via reachable_stages).
    CHECK(check_chronology(smtp.chronology, smtp.model, smtp.events).empty());
    std::map<std::string, const Event*> by_name;
    for (const auto& e : smtp.events) by_name[e.name] = &e;
    for (const auto& [a, b] : smtp.chronology.edges) {
        auto reach = smtp.model.reachable_stages(by_name.at(a)->region_stages);
        bool hit = false;
        for (StageId s : by_name.at(b)->region_stages)
            if (reach.count(s)) hit = true;
        CHECK(hit);
    }

    // Reversed edge: the response cannot precede the greeting.
    Chronology reversed = smtp.chronology;
    reversed.edges = {{"AckWithServices", "SendEhlo"}};
    auto diags = check_chronology(reversed, smtp.model, smtp.events);
    REQUIRE_FALSE(diags.empty());
    CHECK(diags[0].code == "E_CHRONO");

    Chronology cyclic = smtp.chronology;
    cyclic.edges.push_back({"AckWithServices", "SendEhlo"});
    cyclic.edges.push_back({"SendEhlo", "AckWithServices"});
    CHECK(has_code(check_chronology(cyclic, smtp.model, smtp.events), "E_CHRONO"));

    Chronology empty;
    CHECK(check_chronology(empty, smtp.model, {}).empty());
}

TEST_CASE("mutation sensitivity on the bundled models") {
    auto smtp = test::load_case("smtp");
    auto email = test::load_case("email-security");

    SUBCASE("illegal adjacency injected") {
        test::Rebuild r;
        r.extra = [](ModelBuilder& b) {
            b.add_flow("AliceMailServer.Ehlo.p", "AliceMailServer.Ehlo.rcv");
        };
        CHECK(has_code(validate(r.apply(smtp.model)), "E_ADJ"));
    }
    SUBCASE("illegal boundary crossing injected") {
        test::Rebuild r;
        r.extra = [](ModelBuilder& b) {
            b.add_flow("BobMailServer.Ehlo.r", "AliceMailServer.Ehlo.rcv");
        };
        CHECK(has_code(validate(r.apply(smtp.model)), "E_XFER"));
    }
    SUBCASE("retargeted flow hits an illegal kind") {
        test::Rebuild r;
        r.rewrite_flow = [](const Model& m, const Flow& f, std::string&, std::string& to) {
            if (m.stages[f.from].path == "BobMailServer.Ehlo.c" &&
                m.stages[f.to].path == "BobMailServer.Ehlo.r") {
                to = "BobMailServer.Ehlo.t"; // create -> transfer is not allowed
                return true;
            }
            return false;
        };
        CHECK(has_code(validate(r.apply(smtp.model)), "E_ADJ"));
    }
    SUBCASE("orphan stage added") {
        test::Rebuild r;
        r.extra = [](ModelBuilder& b) {
            auto id = b.add_thimac("Orphanage");
            b.add_stage(id, StageKind::Process, "alone");
        };
        CHECK(has_code(validate(r.apply(email.model)), "E_ORPHAN"));
    }
    SUBCASE("deleting a transfer stage strands the partner side") {
        test::Rebuild r;
        r.drop_stages = {"BobMailServer.Ehlo.t"};
        auto diags = validate(r.apply(smtp.model));
        bool stranded = false;
        for (const auto& d : diags)
            if (d.code == "W_UNREACHABLE" && d.subject == "AliceMailServer.Ehlo.t")
                stranded = true;
        CHECK(stranded);
    }
    SUBCASE("bad region and bad chronologies") {
        Event bogus;
        bogus.name = "bogus";
        bogus.region_stages = {static_cast<StageId>(email.model.stages.size()) + 1};
        CHECK(check_event_region(bogus, email.model).has_value());

        Chronology cyc;
        cyc.events = {"A", "B"};
        cyc.edges = {{"A", "B"}, {"B", "A"}};
        Event a, b;
        a.name = "A";
        a.region_stages = {*smtp.model.find_stage("BobMailServer.Ehlo.c")};
        b.name = "B";
        b.region_stages = {*smtp.model.find_stage("BobMailServer.Ehlo.r")};
        CHECK(has_code(check_chronology(cyc, smtp.model, {a, b}), "E_CHRONO"));
    }
}
