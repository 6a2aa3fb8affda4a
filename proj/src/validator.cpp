#include "tmt/validator.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace tmt {

const char* severity_name(Severity s) { return s == Severity::Error ? "error" : "warning"; }

std::string Diagnostic::line() const {
    std::ostringstream os;
    os << code << " " << severity_name(severity) << " " << subject << " " << message;
    return os.str();
}

namespace {

bool intra_pair_allowed(StageKind from, StageKind to) {
    switch (from) {
    case StageKind::Create:
    case StageKind::Receive:
        return to == StageKind::Process || to == StageKind::Release;
    case StageKind::Process:
        return to == StageKind::Release;
    case StageKind::Release:
        return to == StageKind::Transfer;
    case StageKind::Transfer:
        return to == StageKind::Receive;
    }
    return false;
}

std::string edge_desc(const Model& m, const Flow& f) {
    return m.stages[f.from].path + " -> " + m.stages[f.to].path;
}

} // namespace

std::optional<Diagnostic> check_stage_adjacency(const Flow& flow, const Model& model) {
    const Stage& from = model.stage(flow.from);
    const Stage& to = model.stage(flow.to);
    if (from.owner == to.owner) {
        if (!intra_pair_allowed(from.kind, to.kind))
            return Diagnostic{"E_ADJ", Severity::Error, edge_desc(model, flow),
                              std::string("illegal intra-machine flow ") +
                                  stage_kind_name(from.kind) + " -> " + stage_kind_name(to.kind)};
        return std::nullopt;
    }
    if (from.kind == StageKind::Transfer && to.kind == StageKind::Transfer) return std::nullopt;
    return Diagnostic{"E_XFER", Severity::Error, edge_desc(model, flow),
                      std::string("boundary crossing must be transfer -> transfer, got ") +
                          stage_kind_name(from.kind) + " -> " + stage_kind_name(to.kind)};
}

std::optional<Diagnostic> check_event_region(const Event& event, const Model& model) {
    if (event.region_stages.empty())
        return Diagnostic{"E_REGION", Severity::Error, event.name, "region is empty"};
    for (StageId s : event.region_stages)
        if (s < 0 || s >= static_cast<StageId>(model.stages.size()))
            return Diagnostic{"E_REGION", Severity::Error, event.name,
                              "region names a stage that does not exist"};
    for (FlowId f : event.region_flows)
        if (f < 0 || f >= static_cast<FlowId>(model.flows.size()))
            return Diagnostic{"E_REGION", Severity::Error, event.name,
                              "region names a flow that does not exist"};

    // Connectivity over undirected model edges or shared ownership: a region
    // may straddle a machine boundary when a flow joins its parts.
    std::vector<StageId> nodes(event.region_stages.begin(), event.region_stages.end());
    std::map<StageId, size_t> index;
    for (size_t i = 0; i < nodes.size(); ++i) index[nodes[i]] = i;
    std::vector<size_t> comp(nodes.size());
    for (size_t i = 0; i < comp.size(); ++i) comp[i] = i;
    std::function<size_t(size_t)> find = [&](size_t x) {
        while (comp[x] != x) x = comp[x] = comp[comp[x]];
        return x;
    };
    auto unite = [&](size_t a, size_t b) { comp[find(a)] = find(b); };
    for (const Flow& f : model.flows)
        if (index.count(f.from) && index.count(f.to)) unite(index[f.from], index[f.to]);
    for (const Trigger& t : model.triggers)
        if (index.count(t.from) && index.count(t.to)) unite(index[t.from], index[t.to]);
    for (size_t i = 0; i + 1 < nodes.size(); ++i)
        for (size_t j = i + 1; j < nodes.size(); ++j)
            if (model.stages[nodes[i]].owner == model.stages[nodes[j]].owner)
                unite(i, j);
    for (size_t i = 1; i < nodes.size(); ++i)
        if (find(i) != find(0))
            return Diagnostic{"E_REGION", Severity::Error, event.name,
                              "region is not connected"};
    return std::nullopt;
}

std::vector<Diagnostic> check_chronology(const Chronology& chronology, const Model& model,
                                         const std::vector<Event>& events) {
    std::vector<Diagnostic> out;
    std::map<std::string, const Event*> by_name;
    for (const Event& e : events) by_name[e.name] = &e;

    for (const auto& [a, b] : chronology.edges) {
        if (!by_name.count(a) || !by_name.count(b)) {
            out.push_back({"E_CHRONO", Severity::Error, a + " -> " + b,
                           "edge references an undeclared event"});
        }
    }

    // Cycle detection.
    std::map<std::string, int> indeg;
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& n : chronology.events) indeg[n];
    for (const auto& [a, b] : chronology.edges) {
        indeg[a];
        indeg[b];
        adj[a].push_back(b);
        indeg[b]++;
    }
    std::vector<std::string> q;
    for (const auto& [n, d] : indeg)
        if (d == 0) q.push_back(n);
    size_t seen = 0;
    while (!q.empty()) {
        auto n = q.back();
        q.pop_back();
        ++seen;
        for (const auto& m2 : adj[n])
            if (--indeg[m2] == 0) q.push_back(m2);
    }
    if (seen != indeg.size())
        out.push_back({"E_CHRONO", Severity::Error, "chronology", "chronology has a cycle"});

    // Path existence: an edge A -> B needs some flow/trigger path from A's
    // region into B's region.
    for (const auto& [a, b] : chronology.edges) {
        auto ia = by_name.find(a);
        auto ib = by_name.find(b);
        if (ia == by_name.end() || ib == by_name.end()) continue;
        std::set<StageId> from(ia->second->region_stages);
        auto reach = model.reachable_stages(from);
        bool connected = false;
        for (StageId s : ib->second->region_stages)
            if (reach.count(s)) {
                connected = true;
                break;
            }
        if (!connected)
            out.push_back({"E_CHRONO", Severity::Error, a + " -> " + b,
                           "no flow/trigger path from '" + a + "' region to '" + b + "' region"});
    }
    return out;
}

std::vector<Diagnostic> validate(const Model& model, const ValidateOptions& opts) {
    // Collected per subject, then emitted in declaration order: stages first,
    // then flows, then triggers.
    std::vector<std::pair<long long, Diagnostic>> ranked;
    auto stage_rank = [](StageId s) { return static_cast<long long>(s); };
    auto flow_rank = [&](FlowId f) { return 1000000LL + f; };
    auto trig_rank = [&](TriggerId t) { return 2000000LL + t; };

    for (const Flow& f : model.flows) {
        if (auto d = check_stage_adjacency(f, model)) ranked.push_back({flow_rank(f.id), *d});

        if (f.guard_branch) {
            const Stage& src = model.stages[f.from];
            if (!src.guard)
                ranked.push_back({flow_rank(f.id),
                                  {"E_GUARD", Severity::Error, edge_desc(model, f),
                                   "branch label on a flow whose source has no guard"}});
            else if (*f.guard_branch != "true" && *f.guard_branch != "false")
                ranked.push_back({flow_rank(f.id),
                                  {"E_GUARD", Severity::Error, edge_desc(model, f),
                                   "branch label must be 'true' or 'false'"}});
        }
    }

    for (const Stage& s : model.stages) {
        if (s.guard && s.kind != StageKind::Process)
            ranked.push_back({stage_rank(s.id),
                              {"E_GUARD", Severity::Error, s.path,
                               "guard on a non-process stage"}});
        if (s.guard) {
            for (FlowId fid : model.flows_from(s.id))
                if (!model.flows[fid].guard_branch)
                    ranked.push_back({flow_rank(fid),
                                      {"E_GUARD", Severity::Error,
                                       edge_desc(model, model.flows[fid]),
                                       "flow out of a guarded stage needs a branch label"}});
        }
    }

    // Orphans: no incident edge of any kind.
    std::vector<int> degree(model.stages.size(), 0);
    for (const Flow& f : model.flows) {
        degree[f.from]++;
        degree[f.to]++;
    }
    for (const Trigger& t : model.triggers) {
        degree[t.from]++;
        degree[t.to]++;
    }
    for (const Stage& s : model.stages)
        if (degree[s.id] == 0)
            ranked.push_back({stage_rank(s.id),
                              {"E_ORPHAN", Severity::Error, s.path,
                               "stage has no flows or triggers"}});

    for (const Trigger& t : model.triggers) {
        StageKind k = model.stages[t.to].kind;
        if (k != StageKind::Create && k != StageKind::Process)
            ranked.push_back({trig_rank(t.id),
                              {"W_TRIGGER", Severity::Warning,
                               model.stages[t.from].path + " -> " + model.stages[t.to].path,
                               std::string("trigger targets a ") + stage_kind_name(k) +
                                   " stage; only create and process targets take effect"}});
    }

    // Reachability from every Create stage plus any declared injection points.
    std::set<StageId> starts;
    for (const Stage& s : model.stages)
        if (s.kind == StageKind::Create) starts.insert(s.id);
    for (const auto& path : opts.injectable_stages)
        if (auto sid = model.find_stage(path)) starts.insert(*sid);
    auto reachable = model.reachable_stages(starts);
    for (const Stage& s : model.stages)
        if (!reachable.count(s.id))
            ranked.push_back({stage_rank(s.id),
                              {"W_UNREACHABLE", Severity::Warning, s.path,
                               "stage is not reachable from any create or injection stage"}});

    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Diagnostic> out;
    out.reserve(ranked.size());
    for (auto& [rank, d] : ranked) out.push_back(std::move(d));
    return out;
}

std::vector<Diagnostic> validate(const Model& model, const std::vector<Event>& events,
                                 const Chronology& chronology, const ValidateOptions& opts) {
    auto out = validate(model, opts);
    for (const Event& e : events)
        if (auto d = check_event_region(e, model)) out.push_back(*d);
    auto chrono = check_chronology(chronology, model, events);
    out.insert(out.end(), chrono.begin(), chrono.end());
    return out;
}

} // namespace tmt
