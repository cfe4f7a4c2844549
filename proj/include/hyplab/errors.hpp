#pragma once

#include <stdexcept>
#include <string>

namespace hyplab {

// Error taxonomy shared by all modules. The CLI maps these to exit codes:
// config/parse -> 1, hyperbolicity -> 2, convergence -> 3, resolution -> 4.

struct ParseError : std::runtime_error {
    std::size_t offset;  // byte offset into the source string
    ParseError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonHyperbolicError : std::runtime_error {
    double t;
    NonHyperbolicError(const std::string& msg, double t_) : std::runtime_error(msg), t(t_) {}
};

struct RootCollisionError : std::runtime_error {
    double t;
    RootCollisionError(const std::string& msg, double t_) : std::runtime_error(msg), t(t_) {}
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChartError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hyplab
