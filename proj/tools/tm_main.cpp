#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tmt/dot.hpp"
#include "tmt/dsl.hpp"
#include "tmt/engine.hpp"
#include "tmt/modelib.hpp"
#include "tmt/outcomes.hpp"
#include "tmt/scenario.hpp"
#include "tmt/trace_io.hpp"
#include "tmt/validator.hpp"

namespace {

// Exit codes: 0 clean, 1 validation/semantic failures, 2 usage/IO errors.
constexpr int kOk = 0;
constexpr int kSemantic = 1;
constexpr int kUsage = 2;

std::optional<std::string> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct LoadedModel {
    tmt::Model model;
    std::vector<tmt::Event> events;
    tmt::Chronology chronology;
};

// Parses model (and optional events); prints diagnostics. Returns nullopt
// with *exit_code set on failure.
std::optional<LoadedModel> load_inputs(const std::string& model_path,
                                       const std::string& events_path, int* exit_code) {
    auto text = slurp(model_path);
    if (!text) {
        std::cerr << "error: cannot read " << model_path << "\n";
        *exit_code = kUsage;
        return std::nullopt;
    }
    auto parsed = tmt::dsl::parse(*text, model_path);
    if (!parsed.ok()) {
        for (const auto& d : parsed.diagnostics)
            std::cout << d.code << " error " << d.span.str() << " " << d.message << "\n";
        *exit_code = kSemantic;
        return std::nullopt;
    }
    LoadedModel out;
    out.model = std::move(*parsed.model);
    if (!events_path.empty()) {
        auto etext = slurp(events_path);
        if (!etext) {
            std::cerr << "error: cannot read " << events_path << "\n";
            *exit_code = kUsage;
            return std::nullopt;
        }
        auto eparsed = tmt::dsl::parse_events(*etext, out.model, events_path);
        if (!eparsed.ok()) {
            for (const auto& d : eparsed.diagnostics)
                std::cout << d.code << " error " << d.span.str() << " " << d.message << "\n";
            *exit_code = kSemantic;
            return std::nullopt;
        }
        out.events = std::move(eparsed.events);
        out.chronology = std::move(eparsed.chronology);
    }
    return out;
}

int cmd_validate(const std::string& model_path, const std::string& events_path,
                 const std::string& report_path) {
    int code = kOk;
    auto loaded = load_inputs(model_path, events_path, &code);
    if (!loaded) return code;

    std::vector<tmt::Diagnostic> diags =
        events_path.empty() ? tmt::validate(loaded->model)
                            : tmt::validate(loaded->model, loaded->events, loaded->chronology);
    for (const auto& d : diags) std::cout << d.line() << "\n";

    if (!report_path.empty()) {
        nlohmann::ordered_json report;
        report["model"] = model_path;
        report["diagnostics"] = nlohmann::ordered_json::array();
        for (const auto& d : diags) {
            nlohmann::ordered_json e;
            e["code"] = d.code;
            e["severity"] = tmt::severity_name(d.severity);
            e["subject"] = d.subject;
            e["message"] = d.message;
            report["diagnostics"].push_back(std::move(e));
        }
        std::ofstream out(report_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << report_path << "\n";
            return kUsage;
        }
        out << report.dump(2) << "\n";
    }

    bool has_error = false;
    for (const auto& d : diags)
        if (d.severity == tmt::Severity::Error) has_error = true;
    if (diags.empty()) std::cout << "ok: " << model_path << "\n";
    return has_error ? kSemantic : kOk;
}

int cmd_simulate(const std::string& model_path, const std::string& scenario_path,
                 const std::string& events_path, long long max_steps,
                 const std::string& trace_path) {
    int code = kOk;
    auto loaded = load_inputs(model_path, events_path, &code);
    if (!loaded) return code;

    auto stext = slurp(scenario_path);
    if (!stext) {
        std::cerr << "error: cannot read " << scenario_path << "\n";
        return kUsage;
    }
    auto sres = tmt::load_scenario_text(*stext);
    if (!sres.ok()) {
        for (const auto& d : sres.diagnostics) std::cout << d << "\n";
        return kSemantic;
    }

    auto pre = tmt::validate(loaded->model);
    bool static_errors = false;
    for (const auto& d : pre)
        if (d.severity == tmt::Severity::Error) {
            std::cout << d.line() << "\n";
            static_errors = true;
        }
    if (static_errors) return kSemantic;

    tmt::Trace trace;
    try {
        trace = tmt::simulate(loaded->model, *sres.scenario, loaded->events,
                              tmt::SimLimits{max_steps});
    } catch (const tmt::Error& e) {
        std::cout << e.what() << "\n";
        switch (e.code()) {
        case tmt::Errc::GuardUnbound:
        case tmt::Errc::ConstructorUnbound:
        case tmt::Errc::SchemaViolation:
            return kSemantic;
        default:
            return kUsage;
        }
    }
    auto outcomes = tmt::classify_outcomes(trace, loaded->model);

    if (trace.step_limit_exceeded)
        std::cout << "warning: step limit reached after " << trace.steps.size()
                  << " steps; trace is partial\n";
    std::cout << "steps: " << trace.steps.size() << "\n";
    if (!loaded->events.empty()) {
        std::cout << "occurrences:\n";
        for (const auto& o : trace.occurrences)
            std::cout << "  " << trace.event_names[static_cast<size_t>(o.event)] << " @ step "
                      << o.step << "\n";
        auto conf = tmt::conforms(trace.occurrences, loaded->events, loaded->chronology);
        std::cout << "chronology: " << (conf.ok ? "conformant" : "violated") << "\n";
        if (!conf.ok) std::cout << "  " << conf.message << "\n";
    }
    std::cout << "outcomes:\n";
    if (outcomes.empty()) std::cout << "  (none)\n";
    for (const auto& o : outcomes)
        std::cout << "  token " << o.token << " " << tmt::outcome_class_name(o.cls) << " at "
                  << o.location << "\n";

    if (!trace_path.empty()) {
        try {
            tmt::write_trace_file(trace_path, trace, loaded->model, outcomes);
        } catch (const tmt::Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kUsage;
        }
    }
    return kOk;
}

int cmd_export_dot(const std::string& model_path, const std::string& out_path,
                   const std::string& events_path, const std::string& region_event) {
    int code = kOk;
    auto loaded = load_inputs(model_path, events_path, &code);
    if (!loaded) return code;

    const tmt::Event* highlight = nullptr;
    if (!region_event.empty()) {
        if (events_path.empty()) {
            std::cerr << "error: --region needs --events\n";
            return kUsage;
        }
        for (const auto& e : loaded->events)
            if (e.name == region_event) highlight = &e;
        if (!highlight) {
            std::cerr << "error: no event named '" << region_event << "'\n";
            return kUsage;
        }
    }
    std::string dot = tmt::export_dot(loaded->model, highlight);
    if (out_path.empty() || out_path == "-") {
        std::cout << dot;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return kUsage;
        }
        out << dot;
    }
    return kOk;
}

int cmd_check_trace(const std::string& trace_path, const std::string& expected_path) {
    tmt::TraceSummary trace, expected;
    try {
        trace = tmt::read_trace_file(trace_path);
        expected = tmt::read_expected_file(expected_path);
    } catch (const tmt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    auto res = tmt::check_trace_against(trace, expected);
    if (res.ok) {
        std::cout << "trace matches expectation\n";
        return kOk;
    }
    std::cout << "mismatch: " << res.mismatch << "\n";
    return kSemantic;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tm - thinging machine modeling toolkit"};
    app.require_subcommand(1);

    std::string model_path, events_path, scenario_path, report_path, trace_path, out_path;
    std::string region_event, expected_path;
    long long max_steps = 100000;

    auto* validate = app.add_subcommand("validate", "statically check a model");
    validate->add_option("model", model_path, "model file (.tm)")->required();
    validate->add_option("events", events_path, "event file (.tme)");
    validate->add_option("--report", report_path, "write a JSON report");

    auto* simulate = app.add_subcommand("simulate", "run a scenario against a model");
    simulate->add_option("model", model_path, "model file (.tm)")->required();
    simulate->add_option("scenario", scenario_path, "scenario file (.scn)")->required();
    simulate->add_option("--events", events_path, "event file (.tme)");
    simulate->add_option("--max-steps", max_steps, "micro-step budget");
    simulate->add_option("--trace", trace_path, "write the trace file here");

    auto* exportdot = app.add_subcommand("export-dot", "render the model as a graph");
    exportdot->add_option("model", model_path, "model file (.tm)")->required();
    exportdot->add_option("--out", out_path, "output path ('-' for stdout)");
    exportdot->add_option("--events", events_path, "event file (.tme)");
    exportdot->add_option("--region", region_event, "highlight this event's region");

    auto* check = app.add_subcommand("check-trace", "compare a trace against an expectation");
    check->add_option("trace", trace_path, "trace file")->required();
    check->add_option("expected", expected_path, "expectation file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(model_path, events_path, report_path);
        if (simulate->parsed())
            return cmd_simulate(model_path, scenario_path, events_path, max_steps, trace_path);
        if (exportdot->parsed())
            return cmd_export_dot(model_path, out_path, events_path, region_event);
        if (check->parsed()) return cmd_check_trace(trace_path, expected_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
