#pragma once

#include <stdexcept>
#include <string>

namespace plclab {

// Process exit codes used by the CLI and mirrored by the error taxonomy below.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// Bad arguments or flag combinations (exit code 2).
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unreadable, malformed or otherwise unusable input data (exit code 3).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric failure: NaN/Inf encountered, diverged optimization (exit code 4).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace plclab
