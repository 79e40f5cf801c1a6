#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace twinforge {

/// Base for all expected failures (bad input, violated contract). The CLI
/// maps these to exit code 2; anything else is an internal error (exit 1).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedRecord : Error {
    MalformedRecord(std::size_t line_no, std::string why)
        : Error("malformed record at line " + std::to_string(line_no) + ": " + why),
          line(line_no),
          reason(std::move(why)) {}
    std::size_t line;
    std::string reason;
};

struct BindFailure : Error {
    using Error::Error;
};

struct InsufficientData : Error {
    using Error::Error;
};

struct EmptyTrajectory : Error {
    using Error::Error;
};

struct InfeasibleBand : Error {
    using Error::Error;
};

struct EmptyTrainingSet : Error {
    using Error::Error;
};

struct QueryTooShort : Error {
    using Error::Error;
};

struct OutOfSpan : Error {
    using Error::Error;
};

struct InsufficientSupport : Error {
    using Error::Error;
};

struct SchemaViolation : Error {
    SchemaViolation(std::string at, std::string why)
        : Error("schema violation at " + at + ": " + why), path(std::move(at)), reason(std::move(why)) {}
    std::string path;
    std::string reason;
};

/// All unresolved names of one parse, collected exhaustively.
struct DanglingReference : Error {
    explicit DanglingReference(std::vector<std::string> unresolved)
        : Error("dangling references: " + join(unresolved)), names(std::move(unresolved)) {}
    std::vector<std::string> names;

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& n : v) {
            if (!s.empty()) s += ", ";
            s += n;
        }
        return s;
    }
};

struct DanglingEdge : Error {
    using Error::Error;
};

struct NotFound : Error {
    using Error::Error;
};

struct UnknownSignal : Error {
    using Error::Error;
};

struct InvalidConfig : Error {
    InvalidConfig(std::string at, std::string why)
        : Error("invalid config at " + at + ": " + why), path(std::move(at)), reason(std::move(why)) {}
    std::string path;
    std::string reason;
};

}  // namespace twinforge
