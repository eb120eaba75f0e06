#pragma once
#include <stdexcept>
#include <string>

namespace rcv {

// Bad parameters, malformed configs, unusable files. CLI exit code 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& m) : std::runtime_error(m) {}
};

// Solver divergence, non-converged eigenvalue estimates, singular systems.
// CLI exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& m) : std::runtime_error(m) {}
};

} // namespace rcv
