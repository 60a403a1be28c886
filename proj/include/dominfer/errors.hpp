#pragma once

#include <stdexcept>
#include <string>

namespace dominfer {

// Error categories map to process exit codes in the CLI:
// input/format/io problems -> 2, broken internal invariants -> 3.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

struct InputError : Error {
    explicit InputError(const std::string& msg) : Error(msg) {}
};

struct InvariantError : Error {
    explicit InvariantError(const std::string& msg) : Error(msg) {}
};

inline void invariant(bool cond, const std::string& msg) {
    if (!cond) throw InvariantError(msg);
}

}  // namespace dominfer
