#include "tmt/modelib.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace tmt {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string stem_of(const fs::path& p) { return p.stem().string(); }

} // namespace

std::string cases_dir() {
    if (const char* env = std::getenv("TM_CASES_DIR"); env && *env) return env;
#ifdef TMT_DEFAULT_CASES_DIR
    return TMT_DEFAULT_CASES_DIR;
#else
    return "cases";
#endif
}

BundledCase builtin_case(const std::string& name) {
    if (name != "smtp" && name != "email-security")
        throw Error(Errc::UnknownCase, name);

    BundledCase c;
    c.name = name;
    fs::path dir = fs::path(cases_dir()) / name;
    c.dir = dir.string();
    c.model_source = slurp(dir / "model.tm");
    c.events_source = slurp(dir / "events.tme");
    for (const auto& entry : fs::directory_iterator(dir)) {
        auto fname = entry.path().filename().string();
        if (fname.size() > 4 && fname.substr(fname.size() - 4) == ".tme" && fname != "events.tme")
            c.extra_event_sources[stem_of(entry.path())] = slurp(entry.path());
    }
    if (fs::exists(dir / "scenarios")) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir / "scenarios"))
            files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files) c.scenario_sources[stem_of(p)] = slurp(p);
    }
    if (fs::exists(dir / "expected")) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir / "expected"))
            files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files) c.expected_sources[stem_of(p)] = slurp(p);
    }
    c.anchor_range = name == "smtp" ? std::make_pair(1, 15) : std::make_pair(1, 81);
    if (fs::exists(dir / "anchor-exclusions.txt")) {
        std::istringstream in(slurp(dir / "anchor-exclusions.txt"));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            char* end = nullptr;
            long n = std::strtol(line.c_str(), &end, 10);
            if (end != line.c_str() && n > 0) c.anchor_exclusions.push_back(static_cast<int>(n));
        }
    }
    return c;
}

std::vector<std::string> expected_smtp_order() {
    return {
        "SendEhlo",    "AckWithServices", "SendMailFrom", "OkMailFrom",
        "SendRcptTo",  "OkRcptTo",        "RequestData",  "ReadySignal",
        "SendDataLine", "AcceptMessage",  "RequestQuit",  "CloseConnection",
    };
}

std::pair<OutcomeClass, std::string> expected_email_outcome(const std::string& scenario) {
    static const std::map<std::string, std::pair<OutcomeClass, std::string>> table = {
        {"local-delivered",
         {OutcomeClass::DeliveredLocal, "Workstation.Inbox.store"}},
        {"local-no-mailbox",
         {OutcomeClass::Dropped, "EmailServer.MailboxCheck.trash"}},
        {"external-bad-source",
         {OutcomeClass::Dropped, "InternalFirewall.SourceCheck.trash"}},
        {"external-denied-gateway",
         {OutcomeClass::Dropped, "SecurityGateway.Screen.trash"}},
        {"external-clean",
         {OutcomeClass::DeliveredExternal, "IspRouter.tout"}},
    };
    auto it = table.find(scenario);
    if (it == table.end()) throw Error(Errc::UnknownScenario, scenario);
    return it->second;
}

AnchorAudit audit_anchors(const BundledCase& c, const Model& parsed) {
    AnchorAudit a;
    a.range_lo = c.anchor_range.first;
    a.range_hi = c.anchor_range.second;

    std::map<int, int> count;
    for (const Stage& s : parsed.stages)
        for (int n : s.anchors) count[n]++;
    for (const Flow& f : parsed.flows)
        for (int n : f.anchors) count[n]++;

    std::set<int> excluded(c.anchor_exclusions.begin(), c.anchor_exclusions.end());
    for (int n = a.range_lo; n <= a.range_hi; ++n) {
        int seen = count.count(n) ? count[n] : 0;
        bool is_excluded = excluded.count(n) > 0;
        if (seen == 0 && !is_excluded)
            a.missing.push_back(n);
        else if (seen > 1 || (seen == 1 && is_excluded))
            a.duplicated.push_back(n);
        else
            a.accounted++;
    }
    return a;
}

} // namespace tmt
