#ifndef TMT_DSL_HPP
#define TMT_DSL_HPP

#include <optional>
#include <string>
#include <vector>

#include "tmt/engine.hpp"
#include "tmt/model.hpp"

namespace tmt::dsl {

// Concrete syntax for models (.tm) and events (.tme).
//
//   model       := decl*
//   decl        := machine | flowDecl | triggerDecl
//   machine     := "machine" NAME "{" (stageDecl | decl)* "}"
//   stageDecl   := KIND NAME ("guard" NAME)? ("sink")? ("anchor" INT ("," INT)*)? ";"
//   KIND        := "create" | "process" | "release" | "transfer" | "receive"
//   flowDecl    := "flow" PATH "->" PATH ("when" NAME)? ("anchor" INT ("," INT)*)? ";"
//   triggerDecl := "trigger" PATH "->" PATH ("make" NAME)? ";"
//   PATH        := NAME ("." NAME)*
//
// Event files:
//
//   eventsFile  := (eventDecl | afterDecl)*
//   eventDecl   := "event" NAME "{" "region" regionElem ("," regionElem)* "}"
//   regionElem  := PATH | PATH "->" PATH          (stage, or flow by endpoints)
//   afterDecl   := "after" NAME "->" NAME ";"
//
// `//` comments run to end of line. Keywords are contextual: after a stage
// kind or "machine"/"event" any identifier (including a keyword spelling)
// is a valid NAME. Paths inside a machine body resolve innermost-out.
//
// Diagnostic codes (closed set):
//   P001 unexpected token          P002 duplicate identifier
//   P003 unresolved reference      P004 malformed number
//   P101 unresolved region element P102 unknown event in chronology
//   P103 cyclic chronology         P104 duplicate event
//   P105 empty region

struct SourceSpan {
    std::string file;
    int line = 1;   // 1-based
    int column = 1; // 1-based
    int length = 0;

    std::string str() const;
};

struct ParseDiagnostic {
    SourceSpan span;
    std::string code;
    std::string message;
};

struct ParseResult {
    std::optional<Model> model; // set iff diagnostics is empty
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

/// Parses model source. Never throws on malformed input: problems come back
/// as diagnostics and no partial model is produced.
ParseResult parse(const std::string& text, const std::string& filename = "<input>");

/// Canonical form: machines with their stages in declaration order, nested
/// blocks indented two spaces, then all flows, then all triggers, with
/// absolute paths. Output is newline-terminated and reparses to an equal
/// model.
std::string print(const Model& model);

struct EventParseResult {
    std::vector<Event> events;
    Chronology chronology;
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

/// Parses an event/chronology file against an already-built model. Region
/// elements must resolve, chronology edges must name declared events, and
/// the chronology must be acyclic.
EventParseResult parse_events(const std::string& text, const Model& model,
                              const std::string& filename = "<input>");

} // namespace tmt::dsl

#endif
