#include "tmt/model.hpp"

#include <algorithm>
#include <deque>

namespace tmt {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::UnresolvedReference: return "UnresolvedReference";
    case Errc::UnknownStage: return "UnknownStage";
    case Errc::UnknownThimac: return "UnknownThimac";
    case Errc::UnknownCase: return "UnknownCase";
    case Errc::UnknownScenario: return "UnknownScenario";
    case Errc::UnknownEvent: return "UnknownEvent";
    case Errc::GuardUnbound: return "GuardUnbound";
    case Errc::ConstructorUnbound: return "ConstructorUnbound";
    case Errc::ConstructorFailed: return "ConstructorFailed";
    case Errc::Quiescent: return "Quiescent";
    case Errc::NoMXRecord: return "NoMXRecord";
    case Errc::NoNatMapping: return "NoNatMapping";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::IoError: return "IoError";
    }
    return "Error";
}

const char* stage_kind_name(StageKind k) {
    switch (k) {
    case StageKind::Create: return "create";
    case StageKind::Process: return "process";
    case StageKind::Release: return "release";
    case StageKind::Transfer: return "transfer";
    case StageKind::Receive: return "receive";
    }
    return "?";
}

std::optional<StageKind> stage_kind_from_name(const std::string& name) {
    if (name == "create") return StageKind::Create;
    if (name == "process") return StageKind::Process;
    if (name == "release") return StageKind::Release;
    if (name == "transfer") return StageKind::Transfer;
    if (name == "receive") return StageKind::Receive;
    return std::nullopt;
}

const Thimac& Model::thimac(ThimacId id) const {
    if (id < 0 || id >= static_cast<ThimacId>(thimacs.size()))
        throw Error(Errc::UnknownThimac, "thimac id " + std::to_string(id));
    return thimacs[id];
}

const Stage& Model::stage(StageId id) const {
    if (id < 0 || id >= static_cast<StageId>(stages.size()))
        throw Error(Errc::UnknownStage, "stage id " + std::to_string(id));
    return stages[id];
}

std::optional<ThimacId> Model::find_thimac(const std::string& path) const {
    auto it = thimac_by_path_.find(path);
    if (it == thimac_by_path_.end()) return std::nullopt;
    return it->second;
}

std::optional<StageId> Model::find_stage(const std::string& path) const {
    auto it = stage_by_path_.find(path);
    if (it == stage_by_path_.end()) return std::nullopt;
    return it->second;
}

std::set<StageId> Model::sinks() const {
    std::set<StageId> out;
    for (const auto& s : stages)
        if (s.sink) out.insert(s.id);
    return out;
}

std::vector<ThimacId> Model::roots() const {
    std::vector<ThimacId> out;
    for (const auto& t : thimacs)
        if (!t.parent) out.push_back(t.id);
    return out;
}

const std::vector<FlowId>& Model::flows_from(StageId s) const {
    stage(s); // bounds check
    return out_flows_[s];
}

const std::vector<TriggerId>& Model::triggers_from(StageId s) const {
    stage(s);
    return out_triggers_[s];
}

StageKind Model::stage_kind(StageId s) const { return stage(s).kind; }

StageKind Model::stage_kind(const std::string& path) const {
    auto id = find_stage(path);
    if (!id) throw Error(Errc::UnknownStage, path);
    return stages[*id].kind;
}

std::set<StageId> Model::reachable_stages(const std::set<StageId>& starts) const {
    std::set<StageId> seen;
    std::deque<StageId> work;
    for (StageId s : starts) {
        stage(s); // validate
        if (seen.insert(s).second) work.push_back(s);
    }
    while (!work.empty()) {
        StageId s = work.front();
        work.pop_front();
        for (FlowId f : out_flows_[s])
            if (seen.insert(flows[f].to).second) work.push_back(flows[f].to);
        for (TriggerId t : out_triggers_[s])
            if (seen.insert(triggers[t].to).second) work.push_back(triggers[t].to);
    }
    return seen;
}

std::vector<ThimacId> Model::descendants(ThimacId t) const {
    thimac(t);
    std::vector<ThimacId> out;
    std::deque<ThimacId> work{t};
    while (!work.empty()) {
        ThimacId cur = work.front();
        work.pop_front();
        out.push_back(cur);
        for (ThimacId c : thimacs[cur].children) work.push_back(c);
    }
    return out;
}

Model Model::submachine_subgraph(ThimacId t) const {
    auto subtree = descendants(t);
    std::set<ThimacId> in_tree(subtree.begin(), subtree.end());

    Model frag;
    std::map<ThimacId, ThimacId> tmap;
    std::map<StageId, StageId> smap;
    for (ThimacId old_id : subtree) {
        const Thimac& src = thimacs[old_id];
        Thimac copy = src;
        copy.id = static_cast<ThimacId>(frag.thimacs.size());
        copy.children.clear();
        copy.stages.clear();
        if (old_id == t)
            copy.parent = std::nullopt;
        tmap[old_id] = copy.id;
        frag.thimacs.push_back(std::move(copy));
    }
    for (ThimacId old_id : subtree) {
        const Thimac& src = thimacs[old_id];
        if (old_id != t && src.parent)
            frag.thimacs[tmap[old_id]].parent = tmap[*src.parent];
        for (ThimacId c : src.children)
            frag.thimacs[tmap[old_id]].children.push_back(tmap[c]);
        for (StageId s : src.stages) {
            Stage copy = stages[s];
            copy.id = static_cast<StageId>(frag.stages.size());
            copy.owner = tmap[old_id];
            smap[s] = copy.id;
            frag.thimacs[tmap[old_id]].stages.push_back(copy.id);
            frag.stages.push_back(std::move(copy));
        }
    }
    for (const Flow& f : flows) {
        if (smap.count(f.from) && smap.count(f.to)) {
            Flow copy = f;
            copy.id = static_cast<FlowId>(frag.flows.size());
            copy.from = smap[f.from];
            copy.to = smap[f.to];
            frag.flows.push_back(copy);
        }
    }
    for (const Trigger& tr : triggers) {
        if (smap.count(tr.from) && smap.count(tr.to)) {
            Trigger copy = tr;
            copy.id = static_cast<TriggerId>(frag.triggers.size());
            copy.from = smap[tr.from];
            copy.to = smap[tr.to];
            frag.triggers.push_back(copy);
        }
    }
    frag.reindex();
    return frag;
}

Model Model::submachine_subgraph(const std::string& thimac_path) const {
    auto id = find_thimac(thimac_path);
    if (!id) throw Error(Errc::UnknownThimac, thimac_path);
    return submachine_subgraph(*id);
}

void Model::reindex() {
    thimac_by_path_.clear();
    stage_by_path_.clear();
    for (const auto& t : thimacs) thimac_by_path_[t.path] = t.id;
    for (const auto& s : stages) stage_by_path_[s.path] = s.id;
    out_flows_.assign(stages.size(), {});
    out_triggers_.assign(stages.size(), {});
    for (const auto& f : flows) out_flows_[f.from].push_back(f.id);
    for (const auto& t : triggers) out_triggers_[t.from].push_back(t.id);
}

ThimacId ModelBuilder::add_thimac(const std::string& name, std::optional<ThimacId> parent,
                                  const std::string& at) {
    Thimac t;
    t.id = static_cast<ThimacId>(model_.thimacs.size());
    t.name = name;
    t.parent = parent;
    if (parent) {
        if (*parent < 0 || *parent >= t.id)
            throw Error(Errc::UnresolvedReference, "parent thimac of " + name);
        t.path = model_.thimacs[*parent].path + "." + name;
        model_.thimacs[*parent].children.push_back(t.id);
    } else {
        t.path = name;
    }
    for (const auto& existing : model_.thimacs)
        if (existing.path == t.path)
            throw Error(Errc::DuplicateId, t.path + (at.empty() ? "" : " at " + at));
    model_.thimacs.push_back(std::move(t));
    return model_.thimacs.back().id;
}

StageId ModelBuilder::add_stage(ThimacId owner, StageKind kind, const std::string& name,
                                std::optional<std::string> guard, bool sink,
                                std::vector<int> anchors, const std::string& at) {
    if (owner < 0 || owner >= static_cast<ThimacId>(model_.thimacs.size()))
        throw Error(Errc::UnresolvedReference, "owner thimac of stage " + name);
    Stage s;
    s.id = static_cast<StageId>(model_.stages.size());
    s.kind = kind;
    s.owner = owner;
    s.name = name;
    s.path = model_.thimacs[owner].path + "." + name;
    s.guard = std::move(guard);
    s.sink = sink;
    s.anchors = std::move(anchors);
    for (const auto& existing : model_.stages)
        if (existing.path == s.path)
            throw Error(Errc::DuplicateId, s.path + (at.empty() ? "" : " at " + at));
    for (const auto& t : model_.thimacs)
        if (t.path == s.path)
            throw Error(Errc::DuplicateId, s.path + (at.empty() ? "" : " at " + at));
    model_.thimacs[owner].stages.push_back(s.id);
    model_.stages.push_back(std::move(s));
    return model_.stages.back().id;
}

void ModelBuilder::add_flow(const std::string& from_path, const std::string& to_path,
                            std::optional<std::string> guard_branch, std::vector<int> anchors,
                            const std::string& scope, const std::string& at) {
    edges_.push_back({false, from_path, to_path, std::move(guard_branch), std::move(anchors),
                      scope, at});
}

void ModelBuilder::add_trigger(const std::string& from_path, const std::string& to_path,
                               std::optional<std::string> constructor, const std::string& scope,
                               const std::string& at) {
    edges_.push_back({true, from_path, to_path, std::move(constructor), {}, scope, at});
}

StageId ModelBuilder::resolve_stage(const std::string& path, const std::string& scope,
                                    const std::string& at) const {
    // Innermost scope first, then each enclosing scope, then the root.
    std::string prefix = scope;
    while (true) {
        std::string candidate = prefix.empty() ? path : prefix + "." + path;
        for (const auto& s : model_.stages)
            if (s.path == candidate) return s.id;
        if (prefix.empty()) break;
        auto dot = prefix.rfind('.');
        prefix = dot == std::string::npos ? "" : prefix.substr(0, dot);
    }
    throw Error(Errc::UnresolvedReference, path + (at.empty() ? "" : " at " + at));
}

Model ModelBuilder::build() {
    for (const auto& e : edges_) {
        StageId from = resolve_stage(e.from, e.scope, e.at);
        StageId to = resolve_stage(e.to, e.scope, e.at);
        if (e.is_trigger) {
            Trigger t;
            t.id = static_cast<TriggerId>(model_.triggers.size());
            t.from = from;
            t.to = to;
            t.constructor = e.branch_or_ctor;
            model_.triggers.push_back(std::move(t));
        } else {
            Flow f;
            f.id = static_cast<FlowId>(model_.flows.size());
            f.from = from;
            f.to = to;
            f.guard_branch = e.branch_or_ctor;
            f.anchors = e.anchors;
            model_.flows.push_back(std::move(f));
        }
    }
    edges_.clear();
    Model out = std::move(model_);
    model_ = Model{};
    out.reindex();
    return out;
}

bool model_equal(const Model& a, const Model& b) {
    if (a.thimacs.size() != b.thimacs.size() || a.stages.size() != b.stages.size() ||
        a.flows.size() != b.flows.size() || a.triggers.size() != b.triggers.size())
        return false;

    auto parent_path = [](const Model& m, const Thimac& t) -> std::string {
        return t.parent ? m.thimacs[*t.parent].path : "";
    };
    std::map<std::string, std::string> ta, tb;
    for (const auto& t : a.thimacs) ta[t.path] = parent_path(a, t);
    for (const auto& t : b.thimacs) tb[t.path] = parent_path(b, t);
    if (ta != tb) return false;

    using StageKey = std::tuple<std::string, int, std::string, bool, std::vector<int>>;
    std::set<StageKey> sa, sb;
    for (const auto& s : a.stages)
        sa.insert({s.path, static_cast<int>(s.kind), s.guard.value_or(""), s.sink, s.anchors});
    for (const auto& s : b.stages)
        sb.insert({s.path, static_cast<int>(s.kind), s.guard.value_or(""), s.sink, s.anchors});
    if (sa != sb) return false;

    for (size_t i = 0; i < a.flows.size(); ++i) {
        const Flow& fa = a.flows[i];
        const Flow& fb = b.flows[i];
        if (a.stages[fa.from].path != b.stages[fb.from].path) return false;
        if (a.stages[fa.to].path != b.stages[fb.to].path) return false;
        if (fa.guard_branch != fb.guard_branch || fa.anchors != fb.anchors) return false;
    }
    for (size_t i = 0; i < a.triggers.size(); ++i) {
        const Trigger& xa = a.triggers[i];
        const Trigger& xb = b.triggers[i];
        if (a.stages[xa.from].path != b.stages[xb.from].path) return false;
        if (a.stages[xa.to].path != b.stages[xb.to].path) return false;
        if (xa.constructor != xb.constructor) return false;
    }
    return true;
}

} // namespace tmt
