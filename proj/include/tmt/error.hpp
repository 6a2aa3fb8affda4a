#ifndef TMT_ERROR_HPP
#define TMT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tmt {

enum class Errc {
    DuplicateId,
    UnresolvedReference,
    UnknownStage,
    UnknownThimac,
    UnknownCase,
    UnknownScenario,
    UnknownEvent,
    GuardUnbound,
    ConstructorUnbound,
    ConstructorFailed,
    Quiescent,
    NoMXRecord,
    NoNatMapping,
    SchemaViolation,
    IoError,
};

const char* errc_name(Errc c);

/// Exception carrying a machine-checkable error code next to the message.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

} // namespace tmt

#endif
