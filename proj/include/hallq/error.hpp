#pragma once

#include <stdexcept>
#include <string>

namespace hq {

enum class ErrorKind {
    Config = 2,     // invalid input, validation failure
    Numerical = 3   // gap collapse, non-convergence, integrator failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }
[[noreturn]] inline void numerical_error(const std::string& msg) { throw Error(ErrorKind::Numerical, msg); }

}  // namespace hq
