#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lpnet {

/// Error categories, mapped to CLI exit codes (usage=1, data=2, numeric=3).
enum class ErrorKind { usage = 1, data = 2, numeric = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline void check(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond) throw Error(kind, msg);
}

} // namespace lpnet
