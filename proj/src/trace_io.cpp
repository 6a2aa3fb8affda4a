#include "tmt/trace_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tmt {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json payload_to_json(const Payload& p) {
    ordered_json out = ordered_json::object();
    for (const auto& [k, v] : p) {
        if (auto* s = std::get_if<std::string>(&v))
            out[k] = *s;
        else if (auto* i = std::get_if<long long>(&v))
            out[k] = *i;
        else if (auto* b = std::get_if<bool>(&v))
            out[k] = *b;
        else
            out[k] = std::get<std::vector<std::string>>(v);
    }
    return out;
}

} // namespace

std::string trace_to_json(const Trace& trace, const Model& model,
                          const std::vector<Outcome>& outcomes) {
    ordered_json j;
    j["version"] = 1;
    j["step_limit_exceeded"] = trace.step_limit_exceeded;

    ordered_json steps = ordered_json::array();
    for (const MicroStep& s : trace.steps) {
        ordered_json e;
        e["i"] = s.index;
        e["kind"] = step_kind_name(s.kind);
        e["token"] = s.token;
        switch (s.kind) {
        case StepKind::Create:
        case StepKind::StageOp:
        case StepKind::Drop:
            e["stage"] = model.stages[s.to].path;
            break;
        case StepKind::Move:
            e["from"] = model.stages[s.from].path;
            e["to"] = model.stages[s.to].path;
            break;
        case StepKind::TriggerFire:
            e["from"] = model.stages[s.from].path;
            e["to"] = model.stages[s.to].path;
            e["spawned"] = s.spawned;
            break;
        }
        steps.push_back(std::move(e));
    }
    j["steps"] = std::move(steps);

    ordered_json occ = ordered_json::array();
    for (const Occurrence& o : trace.occurrences) {
        ordered_json e;
        e["event"] = trace.event_names[static_cast<size_t>(o.event)];
        e["step"] = o.step;
        occ.push_back(std::move(e));
    }
    j["occurrences"] = std::move(occ);

    ordered_json toks = ordered_json::array();
    for (const TokenSummary& t : trace.tokens) {
        ordered_json e;
        e["id"] = t.id;
        e["born_at"] = t.born_at;
        e["fate"] = token_fate_name(t.fate);
        e["at"] = model.stages[t.location].path;
        e["payload"] = payload_to_json(t.payload);
        toks.push_back(std::move(e));
    }
    j["tokens"] = std::move(toks);

    ordered_json outs = ordered_json::array();
    for (const Outcome& o : outcomes) {
        ordered_json e;
        e["token"] = o.token;
        e["class"] = outcome_class_name(o.cls);
        e["location"] = o.location;
        e["reason"] = o.reason;
        outs.push_back(std::move(e));
    }
    j["outcomes"] = std::move(outs);

    return j.dump(2) + "\n";
}

void write_trace_file(const std::string& path, const Trace& trace, const Model& model,
                      const std::vector<Outcome>& outcomes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path);
    out << trace_to_json(trace, model, outcomes);
}

TraceSummary summarize(const Trace& trace, const std::vector<Outcome>& outcomes) {
    TraceSummary s;
    for (const Occurrence& o : trace.occurrences)
        s.occurrence_events.push_back(trace.event_names[static_cast<size_t>(o.event)]);
    for (const Outcome& o : outcomes)
        s.outcomes.emplace_back(outcome_class_name(o.cls), o.location);
    return s;
}

namespace {

ordered_json parse_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    ordered_json j = ordered_json::parse(buf.str(), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object())
        throw Error(Errc::IoError, path + " is not a valid trace/expectation file");
    return j;
}

TraceSummary summary_from_json(const ordered_json& j, const std::string& path) {
    TraceSummary s;
    if (j.contains("occurrences")) {
        for (const auto& e : j["occurrences"]) {
            if (e.is_string())
                s.occurrence_events.push_back(e.get<std::string>());
            else if (e.is_object() && e.contains("event"))
                s.occurrence_events.push_back(e["event"].get<std::string>());
            else
                throw Error(Errc::IoError, path + ": malformed occurrences entry");
        }
    }
    if (j.contains("outcomes")) {
        for (const auto& e : j["outcomes"]) {
            if (!e.is_object() || !e.contains("class") || !e.contains("location"))
                throw Error(Errc::IoError, path + ": malformed outcomes entry");
            s.outcomes.emplace_back(e["class"].get<std::string>(),
                                    e["location"].get<std::string>());
        }
    }
    return s;
}

} // namespace

TraceSummary read_trace_file(const std::string& path) {
    try {
        return summary_from_json(parse_json_file(path), path);
    } catch (const ordered_json::exception& e) {
        throw Error(Errc::IoError, path + ": " + e.what());
    }
}

TraceSummary read_expected_file(const std::string& path) {
    try {
        return summary_from_json(parse_json_file(path), path);
    } catch (const ordered_json::exception& e) {
        throw Error(Errc::IoError, path + ": " + e.what());
    }
}

TraceCheck check_trace_against(const TraceSummary& trace, const TraceSummary& expected) {
    TraceCheck res;
    size_t n = std::min(trace.occurrence_events.size(), expected.occurrence_events.size());
    for (size_t i = 0; i < n; ++i) {
        if (trace.occurrence_events[i] != expected.occurrence_events[i]) {
            res.ok = false;
            res.mismatch = "occurrence " + std::to_string(i + 1) + ": trace has '" +
                           trace.occurrence_events[i] + "', expected '" +
                           expected.occurrence_events[i] + "'";
            return res;
        }
    }
    if (trace.occurrence_events.size() != expected.occurrence_events.size()) {
        res.ok = false;
        res.mismatch = "occurrence count: trace has " +
                       std::to_string(trace.occurrence_events.size()) + ", expected " +
                       std::to_string(expected.occurrence_events.size());
        return res;
    }
    n = std::min(trace.outcomes.size(), expected.outcomes.size());
    for (size_t i = 0; i < n; ++i) {
        if (trace.outcomes[i] != expected.outcomes[i]) {
            res.ok = false;
            res.mismatch = "outcome " + std::to_string(i + 1) + ": trace has " +
                           trace.outcomes[i].first + " at " + trace.outcomes[i].second +
                           ", expected " + expected.outcomes[i].first + " at " +
                           expected.outcomes[i].second;
            return res;
        }
    }
    if (trace.outcomes.size() != expected.outcomes.size()) {
        res.ok = false;
        res.mismatch = "outcome count: trace has " + std::to_string(trace.outcomes.size()) +
                       ", expected " + std::to_string(expected.outcomes.size());
    }
    return res;
}

} // namespace tmt
