#include "tmt/engine.hpp"

#include <algorithm>

namespace tmt {

const char* step_kind_name(StepKind k) {
    switch (k) {
    case StepKind::Create: return "create";
    case StepKind::Move: return "move";
    case StepKind::StageOp: return "stage-op";
    case StepKind::TriggerFire: return "trigger-fire";
    case StepKind::Drop: return "drop";
    }
    return "?";
}

const char* token_fate_name(TokenFate f) {
    switch (f) {
    case TokenFate::Resting: return "resting";
    case TokenFate::Dropped: return "dropped";
    case TokenFate::Live: return "live";
    }
    return "?";
}

SimState::SimState(const Model& model, const Scenario& scenario)
    : model_(model), scenario_(scenario) {
    // Bind names up front so failures surface before any step runs.
    for (const Stage& s : model_.stages)
        if (s.guard && !predicate_known(*s.guard))
            throw Error(Errc::GuardUnbound, *s.guard + " on " + s.path);
    for (const Trigger& t : model_.triggers)
        if (t.constructor && !constructor_known(*t.constructor))
            throw Error(Errc::ConstructorUnbound,
                        *t.constructor + " on trigger from " + model_.stages[t.from].path);
    bind_scenario(scenario_, model_);

    for (const auto& inj : scenario_.injections) {
        StageId at = *model_.find_stage(inj.stage_path);
        for (int i = 0; i < inj.count; ++i) {
            TokenState t;
            t.id = static_cast<int>(tokens_.size()) + 1; // token ids are 1-based
            t.payload = inj.payload;
            t.location = at;
            t.phase = TokenState::Phase::AwaitBirth;
            tokens_.push_back(std::move(t));
        }
    }
}

std::optional<FlowId> SimState::enabled_flow(const TokenState& t) const {
    const Stage& here = model_.stages[t.location];
    std::optional<std::string> branch;
    if (here.guard)
        branch = eval_predicate(*here.guard, t.payload, scenario_) ? "true" : "false";
    for (FlowId fid : model_.flows_from(t.location)) {
        const Flow& f = model_.flows[fid];
        if (branch) {
            if (f.guard_branch && *f.guard_branch == *branch) return fid;
        } else {
            if (!f.guard_branch) return fid;
        }
    }
    return std::nullopt;
}

bool SimState::has_pending(const TokenState& t) const {
    switch (t.phase) {
    case TokenState::Phase::AwaitBirth:
    case TokenState::Phase::AwaitStageOp:
    case TokenState::Phase::AwaitTriggers:
    case TokenState::Phase::AwaitDrop:
        return true;
    case TokenState::Phase::AwaitMove:
        return enabled_flow(t).has_value();
    case TokenState::Phase::Done:
        return false;
    }
    return false;
}

bool SimState::quiescent() const {
    for (const auto& t : tokens_)
        if (has_pending(t)) return false;
    return true;
}

int SimState::pick_token() const {
    for (const auto& t : tokens_)
        if (has_pending(t)) return t.id;
    return -1;
}

void SimState::record(MicroStep s) {
    s.index = static_cast<int>(steps_.size());
    steps_.push_back(s);
}

void SimState::after_arrival(TokenState& t) {
    if (model_.stages[t.location].sink) {
        t.phase = TokenState::Phase::AwaitDrop;
        return;
    }
    t.next_trigger = 0;
    t.phase = model_.triggers_from(t.location).empty() ? TokenState::Phase::AwaitMove
                                                       : TokenState::Phase::AwaitTriggers;
}

void SimState::step() {
    int id = pick_token();
    if (id < 0) throw Error(Errc::Quiescent, "no enabled token move or trigger");
    TokenState& t = tokens_[static_cast<size_t>(id) - 1];

    switch (t.phase) {
    case TokenState::Phase::AwaitBirth: {
        t.born = true;
        t.born_step = static_cast<int>(steps_.size());
        record({-1, t.id, StepKind::Create, -1, t.location, -1, -1, -1});
        after_arrival(t);
        break;
    }
    case TokenState::Phase::AwaitDrop: {
        record({-1, t.id, StepKind::Drop, -1, t.location, -1, -1, -1});
        t.alive = false;
        t.phase = TokenState::Phase::Done;
        break;
    }
    case TokenState::Phase::AwaitTriggers: {
        const StageId here = t.location;
        const auto& outgoing = model_.triggers_from(here);
        TriggerId tid = outgoing[t.next_trigger];
        const Trigger& trig = model_.triggers[tid];
        int spawned = -1;
        if (model_.stages[trig.to].kind == StageKind::Create) {
            TokenState born;
            born.id = static_cast<int>(tokens_.size()) + 1;
            born.payload =
                apply_constructor(trig.constructor.value_or("copy"), t.payload, scenario_);
            born.location = trig.to;
            born.phase = TokenState::Phase::AwaitBirth;
            spawned = born.id;
            tokens_.push_back(std::move(born)); // invalidates t
        } else {
            // Activation of a machine rather than a birth: recorded as a
            // causal annotation; the marked machine's flows are not gated.
            activations_.emplace_back(tid, id);
        }
        record({-1, id, StepKind::TriggerFire, here, trig.to, -1, tid, spawned});
        TokenState& self = tokens_[static_cast<size_t>(id) - 1];
        self.next_trigger++;
        if (self.next_trigger >= model_.triggers_from(self.location).size())
            self.phase = TokenState::Phase::AwaitMove;
        break;
    }
    case TokenState::Phase::AwaitMove: {
        FlowId fid = *enabled_flow(t);
        const Flow& f = model_.flows[fid];
        record({-1, t.id, StepKind::Move, f.from, f.to, fid, -1, -1});
        t.location = f.to;
        if (model_.stages[t.location].sink)
            t.phase = TokenState::Phase::AwaitDrop;
        else
            t.phase = TokenState::Phase::AwaitStageOp;
        break;
    }
    case TokenState::Phase::AwaitStageOp: {
        record({-1, t.id, StepKind::StageOp, -1, t.location, -1, -1, -1});
        after_arrival(t);
        break;
    }
    case TokenState::Phase::Done:
        throw Error(Errc::Quiescent, "token already done");
    }
}

Trace SimState::finish(const std::vector<Event>& events, bool limit_hit) const {
    Trace out;
    out.steps = steps_;
    out.occurrences = detect_occurrences(steps_, events);
    out.step_limit_exceeded = limit_hit;
    for (const Event& e : events) out.event_names.push_back(e.name);
    for (const auto& t : tokens_) {
        TokenSummary s;
        s.id = t.id;
        s.born_at = t.born_step;
        s.location = t.location;
        s.payload = t.payload;
        if (!t.alive)
            s.fate = TokenFate::Dropped;
        else if (t.phase == TokenState::Phase::Done || !has_pending(t))
            s.fate = TokenFate::Resting;
        else
            s.fate = TokenFate::Live;
        out.tokens.push_back(std::move(s));
    }
    return out;
}

Trace simulate(const Model& model, const Scenario& scenario, const std::vector<Event>& events,
               SimLimits limits) {
    SimState st(model, scenario);
    long long executed = 0;
    while (executed < limits.max_steps && !st.quiescent()) {
        st.step();
        ++executed;
    }
    return st.finish(events, !st.quiescent());
}

std::vector<Occurrence> detect_occurrences(const std::vector<MicroStep>& steps,
                                           const std::vector<Event>& events) {
    std::vector<Occurrence> out;
    std::vector<std::set<StageId>> visited(events.size());
    for (const MicroStep& s : steps) {
        StageId at = -1;
        switch (s.kind) {
        // A visit is an arrival. Stage-ops act on a stage already marked by
        // the arrival step; counting them would re-seed a region right after
        // an occurrence reset it.
        case StepKind::Create:
        case StepKind::Move:
        case StepKind::Drop:
            at = s.to;
            break;
        case StepKind::StageOp:
        case StepKind::TriggerFire:
            break;
        }
        if (at < 0) continue;
        for (size_t e = 0; e < events.size(); ++e) {
            if (!events[e].region_stages.count(at)) continue;
            visited[e].insert(at);
            if (visited[e].size() == events[e].region_stages.size()) {
                out.push_back({static_cast<int>(e), s.index});
                visited[e].clear(); // the region re-arms for the next occurrence
            }
        }
    }
    return out;
}

ConformanceResult conforms(const std::vector<Occurrence>& occurrences,
                           const std::vector<Event>& events, const Chronology& chronology) {
    ConformanceResult res;
    std::map<std::string, std::vector<int>> steps_of;
    for (const Occurrence& o : occurrences)
        steps_of[events[static_cast<size_t>(o.event)].name].push_back(o.step);

    for (const auto& [before, after] : chronology.edges) {
        const auto& a = steps_of[before];
        const auto& b = steps_of[after];
        for (size_t k = 0; k < b.size(); ++k) {
            size_t prior = 0;
            for (int step : a)
                if (step < b[k]) ++prior;
            if (prior < k + 1) {
                res.ok = false;
                res.before = before;
                res.after = after;
                res.k = static_cast<int>(k + 1);
                res.message = "occurrence " + std::to_string(k + 1) + " of '" + after +
                              "' is not preceded by " + std::to_string(k + 1) +
                              " occurrence(s) of '" + before + "'";
                return res;
            }
        }
    }
    return res;
}

} // namespace tmt
