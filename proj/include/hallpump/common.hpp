#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hallpump {

using cplx = std::complex<double>;
using std::size_t;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Thrown when a precondition of a spec'd operation is violated.
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when an iterative method fails to converge.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hallpump
