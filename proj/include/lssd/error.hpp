#pragma once

#include <stdexcept>
#include <string>

namespace lssd {

enum class ErrorKind {
    Format,       // malformed file or stream
    Invariant,    // value violates a declared invariant
    Metadata,     // missing or inconsistent sidecar/metadata
    Argument,     // bad parameter to an operation
    Io,           // filesystem failure
    Config,       // bad run configuration
    Truncated,    // stream ended before its grammar allows
    Unsupported,  // recognized but out-of-scope variant (progressive JPEG, ...)
    Corrupt,      // entropy-coded data is inconsistent
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::Format: return "format";
        case ErrorKind::Invariant: return "invariant";
        case ErrorKind::Metadata: return "metadata";
        case ErrorKind::Argument: return "argument";
        case ErrorKind::Io: return "io";
        case ErrorKind::Config: return "config";
        case ErrorKind::Truncated: return "truncated";
        case ErrorKind::Unsupported: return "unsupported";
        case ErrorKind::Corrupt: return "corrupt";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) {
        fail(kind, message);
    }
}

}  // namespace lssd
