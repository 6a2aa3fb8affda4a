#ifndef TMT_DOT_HPP
#define TMT_DOT_HPP

#include <optional>
#include <string>

#include "tmt/engine.hpp"
#include "tmt/model.hpp"

namespace tmt {

/// Graphviz rendering of a model: one node per stage labeled "kind:path",
/// machines as nested clusters, flows solid, triggers dashed, sinks
/// double-bordered. When `highlight` is given, its region is filled.
std::string export_dot(const Model& model, const Event* highlight = nullptr);

} // namespace tmt

#endif
