#pragma once

#include <stdexcept>
#include <string>

namespace okb {

// Bad configuration or unresolvable names (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: solver breakdown, violated residuals (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace okb
