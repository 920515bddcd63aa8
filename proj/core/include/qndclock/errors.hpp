#pragma once

#include <stdexcept>
#include <string>

namespace qnd {

/// Covariance submatrix not invertible (conditioning / estimation).
struct DegenerateCovariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The measurement carries no first-order information about the parameter.
struct UnidentifiableParameter : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scattering fraction reached or exceeded one: the probe destroys the ensemble.
struct ProtocolInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Finite-difference derivative failed the step-halving consistency check.
struct DerivativeUnstable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature did not reach the requested tolerance.
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Spin squeezing witness is undefined for zero mean spin.
struct WitnessUndefined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qnd
