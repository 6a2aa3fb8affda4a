#ifndef TMT_TEST_HELPERS_HPP
#define TMT_TEST_HELPERS_HPP

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tmt/dsl.hpp"
#include "tmt/engine.hpp"
#include "tmt/model.hpp"
#include "tmt/modelib.hpp"
#include "tmt/scenario.hpp"

namespace tmt::test {

struct LoadedCase {
    BundledCase raw;
    Model model;
    std::vector<Event> events;
    Chronology chronology;
    std::map<std::string, Scenario> scenarios;
};

inline LoadedCase load_case(const std::string& name) {
    LoadedCase out;
    out.raw = builtin_case(name);
    auto parsed = dsl::parse(out.raw.model_source, name + "/model.tm");
    if (!parsed.ok()) throw std::runtime_error("fixture model failed to parse: " + name);
    out.model = std::move(*parsed.model);
    auto ev = dsl::parse_events(out.raw.events_source, out.model, name + "/events.tme");
    if (!ev.ok()) throw std::runtime_error("fixture events failed to parse: " + name);
    out.events = std::move(ev.events);
    out.chronology = std::move(ev.chronology);
    for (const auto& [sname, text] : out.raw.scenario_sources) {
        auto res = load_scenario_text(text);
        if (!res.ok()) throw std::runtime_error("fixture scenario failed to load: " + sname);
        out.scenarios[sname] = std::move(*res.scenario);
    }
    return out;
}

// Brute-force closure over the raw edge lists, written independently of
// Model::reachable_stages (recursive, adjacency rebuilt from scratch).
inline std::set<StageId> oracle_closure(const Model& m, const std::set<StageId>& starts) {
    std::map<StageId, std::vector<StageId>> adj;
    for (const auto& f : m.flows) adj[f.from].push_back(f.to);
    for (const auto& t : m.triggers) adj[t.from].push_back(t.to);
    std::set<StageId> seen;
    std::function<void(StageId)> visit = [&](StageId s) {
        if (!seen.insert(s).second) return;
        for (StageId n : adj[s]) visit(n);
    };
    for (StageId s : starts) visit(s);
    return seen;
}

// Closure with guards pinned to the verdicts they give for `payload`:
// guarded stages only pass the matching branch; triggers always followed.
inline std::set<StageId> oracle_guarded_closure(const Model& m, const Scenario& sc,
                                                const Payload& payload,
                                                const std::set<StageId>& starts) {
    std::set<StageId> seen;
    std::function<void(StageId)> visit = [&](StageId s) {
        if (!seen.insert(s).second) return;
        const Stage& st = m.stages[s];
        std::optional<std::string> branch;
        if (st.guard) branch = eval_predicate(*st.guard, payload, sc) ? "true" : "false";
        for (const auto& f : m.flows) {
            if (f.from != s) continue;
            if (branch) {
                if (f.guard_branch && *f.guard_branch == *branch) visit(f.to);
            } else if (!f.guard_branch) {
                visit(f.to);
            }
        }
        for (const auto& t : m.triggers)
            if (t.from == s) visit(t.to);
    };
    for (StageId s : starts) visit(s);
    return seen;
}

inline std::set<StageId> visited_stages(const Trace& trace) {
    std::set<StageId> out;
    for (const auto& s : trace.steps)
        if (s.kind != StepKind::TriggerFire) out.insert(s.to);
    return out;
}

// Seeded generator of structurally well-formed (buildable) models. Edges
// are arbitrary pairs: the DSL round-trips anything the builder accepts.
inline Model random_model(std::mt19937& rng) {
    auto pick = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    ModelBuilder b;
    struct Mac {
        ThimacId id;
        std::string path;
    };
    std::vector<Mac> machines;
    int n_machines = pick(1, 5);
    int name_seq = 0;
    for (int i = 0; i < n_machines; ++i) {
        std::string name = "m" + std::to_string(name_seq++);
        if (!machines.empty() && pick(0, 2) == 0) {
            auto& parent = machines[static_cast<size_t>(pick(0, (int)machines.size() - 1))];
            machines.push_back({b.add_thimac(name, parent.id), parent.path + "." + name});
        } else {
            machines.push_back({b.add_thimac(name), name});
        }
    }
    std::vector<std::string> stage_paths;
    int anchor_seq = 1;
    for (auto& mac : machines) {
        int n_stages = pick(1, 6);
        for (int i = 0; i < n_stages; ++i) {
            std::string name = "s" + std::to_string(name_seq++);
            auto kind = static_cast<StageKind>(pick(0, 4));
            std::optional<std::string> guard;
            if (kind == StageKind::Process && pick(0, 3) == 0)
                guard = "g" + std::to_string(pick(0, 2));
            bool sink = pick(0, 9) == 0;
            std::vector<int> anchors;
            if (pick(0, 3) == 0) anchors.push_back(anchor_seq++);
            b.add_stage(mac.id, kind, name, guard, sink, anchors);
            stage_paths.push_back(mac.path + "." + name);
        }
    }
    int n_flows = pick(0, (int)stage_paths.size() * 2);
    for (int i = 0; i < n_flows; ++i) {
        const auto& from = stage_paths[static_cast<size_t>(pick(0, (int)stage_paths.size() - 1))];
        const auto& to = stage_paths[static_cast<size_t>(pick(0, (int)stage_paths.size() - 1))];
        if (from == to) continue;
        std::optional<std::string> branch;
        if (pick(0, 3) == 0) branch = pick(0, 1) ? "true" : "false";
        std::vector<int> anchors;
        if (pick(0, 5) == 0) anchors.push_back(anchor_seq++);
        b.add_flow(from, to, branch, anchors);
    }
    int n_triggers = pick(0, (int)stage_paths.size());
    for (int i = 0; i < n_triggers; ++i) {
        const auto& from = stage_paths[static_cast<size_t>(pick(0, (int)stage_paths.size() - 1))];
        const auto& to = stage_paths[static_cast<size_t>(pick(0, (int)stage_paths.size() - 1))];
        if (from == to) continue;
        std::optional<std::string> ctor;
        if (pick(0, 2) == 0) ctor = "c" + std::to_string(pick(0, 2));
        b.add_trigger(from, to, ctor);
    }
    return b.build();
}

// Rebuilds a model through a fresh builder, applying edits along the way.
struct Rebuild {
    std::set<std::string> drop_stages;          // stage paths to omit (with their edges)
    std::function<void(ModelBuilder&)> extra;   // appended after the copy
    std::function<bool(const Model&, const Flow&, std::string& from, std::string& to)>
        rewrite_flow; // return true to replace endpoints

    Model apply(const Model& src) const {
        ModelBuilder b;
        std::map<ThimacId, ThimacId> tmap;
        for (const auto& t : src.thimacs) {
            std::optional<ThimacId> parent;
            if (t.parent) parent = tmap.at(*t.parent);
            tmap[t.id] = b.add_thimac(t.name, parent);
        }
        std::map<StageId, bool> kept;
        for (const auto& s : src.stages) {
            if (drop_stages.count(s.path)) {
                kept[s.id] = false;
                continue;
            }
            kept[s.id] = true;
            b.add_stage(tmap.at(s.owner), s.kind, s.name, s.guard, s.sink, s.anchors);
        }
        for (const auto& f : src.flows) {
            if (!kept.at(f.from) || !kept.at(f.to)) continue;
            std::string from = src.stages[f.from].path;
            std::string to = src.stages[f.to].path;
            if (rewrite_flow && rewrite_flow(src, f, from, to)) {
                b.add_flow(from, to, f.guard_branch, f.anchors);
                continue;
            }
            b.add_flow(from, to, f.guard_branch, f.anchors);
        }
        for (const auto& t : src.triggers) {
            if (!kept.at(t.from) || !kept.at(t.to)) continue;
            b.add_trigger(src.stages[t.from].path, src.stages[t.to].path, t.constructor);
        }
        if (extra) extra(b);
        return b.build();
    }
};

inline Scenario minimal_scenario(const std::string& stage, Payload payload = {}, int count = 1) {
    Scenario s;
    Policy def;
    def.action = Policy::Action::Permit;
    s.internal_fw = {def};
    s.gateway = {def};
    s.external_fw = {def};
    s.injections.push_back({stage, std::move(payload), count});
    return s;
}

} // namespace tmt::test

#endif
