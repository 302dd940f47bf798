#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace difflms {

// Invalid user-supplied configuration (bad sizes, non-PD covariance, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not deliver a trustworthy result
// (spectral ambiguity, unstable step-size, singular solve, ...).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A Monte Carlo trial produced a non-finite or exploding estimate.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double to_db(double x) { return 10.0 * std::log10(x); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace difflms
