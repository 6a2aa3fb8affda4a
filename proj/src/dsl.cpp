#include "tmt/dsl.hpp"

#include <cctype>
#include <cstdlib>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace tmt::dsl {

std::string SourceSpan::str() const {
    std::ostringstream os;
    os << file << ":" << line << ":" << column;
    return os.str();
}

namespace {

enum class Tok { Ident, Int, LBrace, RBrace, Semi, Comma, Arrow, Dot, End, Bad };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceSpan span;
};

class Lexer {
public:
    Lexer(const std::string& text, const std::string& file) : text_(text), file_(file) {}

    Token next() {
        skip_ws();
        Token t;
        t.span = {file_, line_, col_, 0};
        if (pos_ >= text_.size()) {
            t.kind = Tok::End;
            return t;
        }
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                advance();
            t.kind = Tok::Ident;
            t.text = text_.substr(start, pos_ - start);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                advance();
            t.kind = Tok::Int;
            t.text = text_.substr(start, pos_ - start);
        } else if (c == '{') {
            t.kind = Tok::LBrace;
            t.text = "{";
            advance();
        } else if (c == '}') {
            t.kind = Tok::RBrace;
            t.text = "}";
            advance();
        } else if (c == ';') {
            t.kind = Tok::Semi;
            t.text = ";";
            advance();
        } else if (c == ',') {
            t.kind = Tok::Comma;
            t.text = ",";
            advance();
        } else if (c == '.') {
            t.kind = Tok::Dot;
            t.text = ".";
            advance();
        } else if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
            t.kind = Tok::Arrow;
            t.text = "->";
            advance();
            advance();
        } else {
            t.kind = Tok::Bad;
            t.text = std::string(1, c);
            advance();
        }
        t.span.length = static_cast<int>(t.text.size());
        return t;
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    const std::string& text_;
    std::string file_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// Declarations collected syntactically; resolution happens after the whole
// file has been read so forward references work.
struct StageDecl {
    std::string machine_path;
    StageKind kind;
    std::string name;
    std::optional<std::string> guard;
    bool sink = false;
    std::vector<int> anchors;
    SourceSpan span;
};

struct EdgeDecl {
    bool is_trigger;
    std::string from, to;
    std::optional<std::string> branch_or_ctor;
    std::vector<int> anchors;
    std::string scope;
    SourceSpan span;
};

class Parser {
public:
    Parser(const std::string& text, const std::string& file) : lex_(text, file), file_(file) {
        bump();
    }

    ParseResult run() {
        parse_decls("", /*in_block=*/false);
        ParseResult out;
        if (!diags_.empty()) {
            out.diagnostics = std::move(diags_);
            return out;
        }
        try {
            ModelBuilder b;
            std::map<std::string, ThimacId> ids;
            for (const auto& [path, parent, span] : machines_) {
                std::optional<ThimacId> pid;
                if (!parent.empty()) pid = ids.at(parent);
                ids[path] = b.add_thimac(leaf_name(path), pid, span.str());
            }
            for (const auto& s : stage_decls_)
                b.add_stage(ids.at(s.machine_path), s.kind, s.name, s.guard, s.sink, s.anchors,
                            s.span.str());
            for (const auto& e : edge_decls_) {
                if (e.is_trigger)
                    b.add_trigger(e.from, e.to, e.branch_or_ctor, e.scope, e.span.str());
                else
                    b.add_flow(e.from, e.to, e.branch_or_ctor, e.anchors, e.scope, e.span.str());
            }
            out.model = b.build();
        } catch (const Error& err) {
            std::string code = err.code() == Errc::DuplicateId ? "P002" : "P003";
            out.diagnostics.push_back({SourceSpan{file_, 1, 1, 0}, code, err.what()});
        }
        return out;
    }

private:
    static std::string leaf_name(const std::string& path) {
        auto dot = path.rfind('.');
        return dot == std::string::npos ? path : path.substr(dot + 1);
    }

    void bump() { cur_ = lex_.next(); }

    bool at_ident(const char* word) const { return cur_.kind == Tok::Ident && cur_.text == word; }

    void error_here(const std::string& msg) {
        diags_.push_back({cur_.span, "P001", msg});
    }

    // Skips to the next ';', '}' or declaration keyword, consuming the ';'.
    void recover() {
        static const std::set<std::string> heads = {"machine", "flow",     "trigger", "create",
                                                    "process", "release",  "transfer", "receive",
                                                    "event",   "after"};
        while (cur_.kind != Tok::End) {
            if (cur_.kind == Tok::Semi) {
                bump();
                return;
            }
            if (cur_.kind == Tok::RBrace) return;
            if (cur_.kind == Tok::Ident && heads.count(cur_.text)) return;
            bump();
        }
    }

    bool expect(Tok k, const char* what) {
        if (cur_.kind != k) {
            error_here(std::string("expected ") + what + ", found '" + describe(cur_) + "'");
            return false;
        }
        bump();
        return true;
    }

    static std::string describe(const Token& t) {
        if (t.kind == Tok::End) return "end of input";
        return t.text;
    }

    std::optional<std::string> parse_name(const char* what) {
        if (cur_.kind != Tok::Ident) {
            error_here(std::string("expected ") + what + ", found '" + describe(cur_) + "'");
            return std::nullopt;
        }
        std::string n = cur_.text;
        bump();
        return n;
    }

    std::optional<std::string> parse_path() {
        auto first = parse_name("a path");
        if (!first) return std::nullopt;
        std::string path = *first;
        while (cur_.kind == Tok::Dot) {
            bump();
            auto part = parse_name("a path segment");
            if (!part) return std::nullopt;
            path += "." + *part;
        }
        return path;
    }

    std::vector<int> parse_anchor_list() {
        std::vector<int> out;
        do {
            if (cur_.kind != Tok::Int) {
                error_here("expected an anchor number");
                return out;
            }
            long v = std::strtol(cur_.text.c_str(), nullptr, 10);
            if (v <= 0 || v > 1000000) {
                diags_.push_back({cur_.span, "P004", "anchor out of range: " + cur_.text});
            } else {
                out.push_back(static_cast<int>(v));
            }
            bump();
            if (cur_.kind != Tok::Comma) break;
            bump();
        } while (true);
        return out;
    }

    void parse_decls(const std::string& scope, bool in_block) {
        while (true) {
            if (cur_.kind == Tok::End) {
                if (in_block) error_here("expected '}' before end of input");
                return;
            }
            if (cur_.kind == Tok::RBrace) {
                if (in_block) {
                    bump();
                    return;
                }
                error_here("unexpected '}'");
                bump();
                continue;
            }
            if (cur_.kind != Tok::Ident) {
                error_here("expected a declaration, found '" + describe(cur_) + "'");
                recover();
                continue;
            }
            if (cur_.text == "machine") {
                parse_machine(scope);
            } else if (cur_.text == "flow") {
                parse_edge(scope, false);
            } else if (cur_.text == "trigger") {
                parse_edge(scope, true);
            } else if (auto kind = stage_kind_from_name(cur_.text)) {
                if (scope.empty()) {
                    error_here("stage declaration outside a machine");
                    recover();
                } else {
                    parse_stage(scope, *kind);
                }
            } else {
                error_here("unexpected token '" + cur_.text + "'");
                recover();
            }
        }
    }

    void parse_machine(const std::string& scope) {
        SourceSpan span = cur_.span;
        bump(); // machine
        auto name = parse_name("a machine name");
        if (!name) {
            recover();
            return;
        }
        std::string path = scope.empty() ? *name : scope + "." + *name;
        machines_.push_back({path, scope, span});
        if (!expect(Tok::LBrace, "'{'")) {
            recover();
            return;
        }
        parse_decls(path, /*in_block=*/true);
    }

    void parse_stage(const std::string& scope, StageKind kind) {
        SourceSpan span = cur_.span;
        bump(); // kind keyword
        auto name = parse_name("a stage name");
        if (!name) {
            recover();
            return;
        }
        StageDecl d;
        d.machine_path = scope;
        d.kind = kind;
        d.name = *name;
        d.span = span;
        while (cur_.kind == Tok::Ident) {
            if (cur_.text == "guard") {
                bump();
                auto g = parse_name("a guard name");
                if (!g) {
                    recover();
                    return;
                }
                d.guard = *g;
            } else if (cur_.text == "sink") {
                bump();
                d.sink = true;
            } else if (cur_.text == "anchor") {
                bump();
                auto list = parse_anchor_list();
                d.anchors.insert(d.anchors.end(), list.begin(), list.end());
            } else {
                break;
            }
        }
        if (!expect(Tok::Semi, "';'")) {
            recover();
            return;
        }
        stage_decls_.push_back(std::move(d));
    }

    void parse_edge(const std::string& scope, bool is_trigger) {
        SourceSpan span = cur_.span;
        bump(); // flow / trigger
        auto from = parse_path();
        if (!from) {
            recover();
            return;
        }
        if (!expect(Tok::Arrow, "'->'")) {
            recover();
            return;
        }
        auto to = parse_path();
        if (!to) {
            recover();
            return;
        }
        EdgeDecl d;
        d.is_trigger = is_trigger;
        d.from = *from;
        d.to = *to;
        d.scope = scope;
        d.span = span;
        while (cur_.kind == Tok::Ident) {
            if (!is_trigger && cur_.text == "when") {
                bump();
                auto b = parse_name("a branch label");
                if (!b) {
                    recover();
                    return;
                }
                d.branch_or_ctor = *b;
            } else if (is_trigger && cur_.text == "make") {
                bump();
                auto c = parse_name("a constructor name");
                if (!c) {
                    recover();
                    return;
                }
                d.branch_or_ctor = *c;
            } else if (!is_trigger && cur_.text == "anchor") {
                bump();
                auto list = parse_anchor_list();
                d.anchors.insert(d.anchors.end(), list.begin(), list.end());
            } else {
                break;
            }
        }
        if (!expect(Tok::Semi, "';'")) {
            recover();
            return;
        }
        edge_decls_.push_back(std::move(d));
    }

    Lexer lex_;
    std::string file_;
    Token cur_;
    std::vector<ParseDiagnostic> diags_;
    std::vector<std::tuple<std::string, std::string, SourceSpan>> machines_; // path, parent path
    std::vector<StageDecl> stage_decls_;
    std::vector<EdgeDecl> edge_decls_;
};

void print_thimac(const Model& m, ThimacId id, int depth, std::ostringstream& os) {
    const Thimac& t = m.thimacs[id];
    std::string indent(static_cast<size_t>(depth) * 2, ' ');
    os << indent << "machine " << t.name << " {\n";
    std::string inner(static_cast<size_t>(depth + 1) * 2, ' ');
    for (StageId sid : t.stages) {
        const Stage& s = m.stages[sid];
        os << inner << stage_kind_name(s.kind) << " " << s.name;
        if (s.guard) os << " guard " << *s.guard;
        if (s.sink) os << " sink";
        if (!s.anchors.empty()) {
            os << " anchor ";
            for (size_t i = 0; i < s.anchors.size(); ++i) {
                if (i) os << ", ";
                os << s.anchors[i];
            }
        }
        os << ";\n";
    }
    for (ThimacId c : t.children) print_thimac(m, c, depth + 1, os);
    os << indent << "}\n";
}

} // namespace

ParseResult parse(const std::string& text, const std::string& filename) {
    Parser p(text, filename);
    return p.run();
}

std::string print(const Model& model) {
    std::ostringstream os;
    for (ThimacId r : model.roots()) print_thimac(model, r, 0, os);
    for (const Flow& f : model.flows) {
        os << "flow " << model.stages[f.from].path << " -> " << model.stages[f.to].path;
        if (f.guard_branch) os << " when " << *f.guard_branch;
        if (!f.anchors.empty()) {
            os << " anchor ";
            for (size_t i = 0; i < f.anchors.size(); ++i) {
                if (i) os << ", ";
                os << f.anchors[i];
            }
        }
        os << ";\n";
    }
    for (const Trigger& t : model.triggers) {
        os << "trigger " << model.stages[t.from].path << " -> " << model.stages[t.to].path;
        if (t.constructor) os << " make " << *t.constructor;
        os << ";\n";
    }
    return os.str();
}

EventParseResult parse_events(const std::string& text, const Model& model,
                              const std::string& filename) {
    EventParseResult out;
    Lexer lex(text, filename);
    Token cur = lex.next();
    auto bump = [&] { cur = lex.next(); };
    auto diag = [&](const std::string& code, const std::string& msg, const SourceSpan& sp) {
        out.diagnostics.push_back({sp, code, msg});
    };
    auto recover = [&] {
        while (cur.kind != Tok::End && cur.kind != Tok::Semi && cur.kind != Tok::RBrace &&
               !(cur.kind == Tok::Ident && (cur.text == "event" || cur.text == "after")))
            bump();
        if (cur.kind == Tok::Semi || cur.kind == Tok::RBrace) bump();
    };
    auto parse_path = [&]() -> std::optional<std::string> {
        if (cur.kind != Tok::Ident) return std::nullopt;
        std::string path = cur.text;
        bump();
        while (cur.kind == Tok::Dot) {
            bump();
            if (cur.kind != Tok::Ident) return std::nullopt;
            path += "." + cur.text;
            bump();
        }
        return path;
    };

    std::map<std::string, int> by_name;
    while (cur.kind != Tok::End) {
        if (cur.kind == Tok::Ident && cur.text == "event") {
            SourceSpan sp = cur.span;
            bump();
            if (cur.kind != Tok::Ident) {
                diag("P001", "expected an event name", cur.span);
                recover();
                continue;
            }
            std::string name = cur.text;
            bump();
            if (by_name.count(name)) {
                diag("P104", "duplicate event '" + name + "'", sp);
                recover();
                continue;
            }
            if (cur.kind != Tok::LBrace) {
                diag("P001", "expected '{'", cur.span);
                recover();
                continue;
            }
            bump();
            if (!(cur.kind == Tok::Ident && cur.text == "region")) {
                diag("P001", "expected 'region'", cur.span);
                recover();
                continue;
            }
            bump();
            Event ev;
            ev.id = static_cast<int>(out.events.size());
            ev.name = name;
            bool bad = false;
            while (true) {
                SourceSpan esp = cur.span;
                auto first = parse_path();
                if (!first) {
                    diag("P001", "expected a region element", cur.span);
                    bad = true;
                    break;
                }
                if (cur.kind == Tok::Arrow) {
                    bump();
                    auto second = parse_path();
                    if (!second) {
                        diag("P001", "expected a flow target path", cur.span);
                        bad = true;
                        break;
                    }
                    auto a = model.find_stage(*first);
                    auto b = model.find_stage(*second);
                    std::optional<FlowId> fid;
                    if (a && b) {
                        for (const Flow& f : model.flows)
                            if (f.from == *a && f.to == *b) {
                                fid = f.id;
                                break;
                            }
                    }
                    if (!fid) {
                        diag("P101", "region flow '" + *first + " -> " + *second +
                                         "' does not resolve", esp);
                        bad = true;
                    } else {
                        ev.region_flows.insert(*fid);
                        ev.region_stages.insert(model.flows[*fid].from);
                        ev.region_stages.insert(model.flows[*fid].to);
                    }
                } else {
                    auto sid = model.find_stage(*first);
                    if (!sid) {
                        diag("P101", "region stage '" + *first + "' does not resolve", esp);
                        bad = true;
                    } else {
                        ev.region_stages.insert(*sid);
                    }
                }
                if (cur.kind == Tok::Comma) {
                    bump();
                    continue;
                }
                break;
            }
            if (cur.kind == Tok::RBrace)
                bump();
            else if (!bad)
                diag("P001", "expected '}'", cur.span);
            if (ev.region_stages.empty() && !bad) diag("P105", "empty region in '" + name + "'", sp);
            by_name[name] = ev.id;
            out.events.push_back(std::move(ev));
            out.chronology.events.push_back(name);
        } else if (cur.kind == Tok::Ident && cur.text == "after") {
            bump();
            SourceSpan sp = cur.span;
            if (cur.kind != Tok::Ident) {
                diag("P001", "expected an event name", cur.span);
                recover();
                continue;
            }
            std::string before = cur.text;
            bump();
            if (cur.kind != Tok::Arrow) {
                diag("P001", "expected '->'", cur.span);
                recover();
                continue;
            }
            bump();
            if (cur.kind != Tok::Ident) {
                diag("P001", "expected an event name", cur.span);
                recover();
                continue;
            }
            std::string after = cur.text;
            bump();
            if (cur.kind == Tok::Semi)
                bump();
            else
                diag("P001", "expected ';'", cur.span);
            out.chronology.edges.emplace_back(before, after);
            if (!by_name.count(before))
                diag("P102", "unknown event '" + before + "' in chronology", sp);
            if (!by_name.count(after))
                diag("P102", "unknown event '" + after + "' in chronology", sp);
        } else {
            diag("P001", "expected 'event' or 'after', found '" +
                             (cur.kind == Tok::End ? "end of input" : cur.text) + "'", cur.span);
            recover();
        }
    }

    // Cycle check over declared events (Kahn's algorithm).
    if (out.diagnostics.empty()) {
        std::map<std::string, int> indeg;
        std::map<std::string, std::vector<std::string>> adj;
        for (const auto& n : out.chronology.events) indeg[n] = 0;
        for (const auto& [a, b] : out.chronology.edges) {
            adj[a].push_back(b);
            indeg[b]++;
        }
        std::deque<std::string> q;
        for (const auto& [n, d] : indeg)
            if (d == 0) q.push_back(n);
        size_t seen = 0;
        while (!q.empty()) {
            auto n = q.front();
            q.pop_front();
            ++seen;
            for (const auto& m2 : adj[n])
                if (--indeg[m2] == 0) q.push_back(m2);
        }
        if (seen != indeg.size())
            diag("P103", "chronology has a cycle", SourceSpan{filename, 1, 1, 0});
    }

    if (!out.diagnostics.empty()) {
        out.events.clear();
        out.chronology = Chronology{};
    }
    return out;
}

} // namespace tmt::dsl
