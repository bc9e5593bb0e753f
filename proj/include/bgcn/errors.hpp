#pragma once

#include <stdexcept>
#include <string>

namespace bgcn {

// Error families map onto the CLI exit codes: config 2, numeric 3, monitor 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MonitorViolation : std::runtime_error {
    explicit MonitorViolation(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace bgcn
