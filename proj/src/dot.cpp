#include "tmt/dot.hpp"

#include <sstream>

namespace tmt {

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

void emit_cluster(const Model& m, ThimacId id, int depth, int& cluster_seq,
                  const Event* highlight, std::ostringstream& os) {
    const Thimac& t = m.thimacs[id];
    std::string indent(static_cast<size_t>(depth) * 2, ' ');
    os << indent << "subgraph cluster_" << cluster_seq++ << " {\n";
    os << indent << "  label=" << quoted(t.name) << ";\n";
    for (StageId sid : t.stages) {
        const Stage& s = m.stages[sid];
        os << indent << "  " << quoted(s.path) << " [label="
           << quoted(std::string(stage_kind_name(s.kind)) + ":" + s.path);
        if (s.sink) os << ", peripheries=2";
        if (highlight && highlight->region_stages.count(sid))
            os << ", style=filled, fillcolor=lightgoldenrod";
        os << "];\n";
    }
    for (ThimacId c : t.children) emit_cluster(m, c, depth + 1, cluster_seq, highlight, os);
    os << indent << "}\n";
}

} // namespace

std::string export_dot(const Model& model, const Event* highlight) {
    std::ostringstream os;
    os << "digraph model {\n";
    os << "  node [shape=box];\n";
    int cluster_seq = 0;
    for (ThimacId r : model.roots()) emit_cluster(model, r, 1, cluster_seq, highlight, os);
    for (const Flow& f : model.flows) {
        os << "  " << quoted(model.stages[f.from].path) << " -> "
           << quoted(model.stages[f.to].path);
        std::vector<std::string> attrs;
        if (f.guard_branch) attrs.push_back("label=" + quoted(*f.guard_branch));
        if (highlight && highlight->region_flows.count(f.id))
            attrs.push_back("color=goldenrod, penwidth=2");
        if (!attrs.empty()) {
            os << " [";
            for (size_t i = 0; i < attrs.size(); ++i) {
                if (i) os << ", ";
                os << attrs[i];
            }
            os << "]";
        }
        os << ";\n";
    }
    for (const Trigger& t : model.triggers) {
        os << "  " << quoted(model.stages[t.from].path) << " -> "
           << quoted(model.stages[t.to].path) << " [style=dashed";
        if (t.constructor) os << ", label=" << quoted(*t.constructor);
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace tmt
