#pragma once

#include <cstdint>
#include <string>

#include "qndclock/protocol.hpp"

namespace qnd {

/// Maximum-likelihood detuning estimate from one outcome vector:
/// delta0 + mu'^T Gx^-1 (X - mu0) / (mu'^T Gx^-1 mu').
/// Solved by factorization; throws UnidentifiableParameter when mu' = 0 and
/// DegenerateCovariance when Gamma_X is singular.
double estimate_detuning(const Eigen::VectorXd& outcomes, const MeasurementModel& model);

/// Mean squared error of that estimator: 1 / (mu'^T Gx^-1 mu').
double mse(const MeasurementModel& model);

/// Sampled MSE over a detuning grid; the linearization is re-centered at each
/// grid point. Unidentifiable points are stored as +infinity.
struct SensitivityCurve {
    Eigen::VectorXd delta_grid;  // rad/s, strictly increasing
    Eigen::VectorXd mse_values;  // rad^2/s^2, +inf where unidentifiable
    std::string protocol_id;
    ProtocolSpec protocol;
    PhysicalParams params;
};

SensitivityCurve sensitivity_curve(const ProtocolSpec& spec, const PhysicalParams& params,
                                   const Eigen::VectorXd& delta_grid,
                                   std::string protocol_id = {}, int threads = 1);

struct MonteCarloSummary {
    double mean_estimate;
    double var_estimate;
    double standard_error_mean;  // of the sample mean
    int n_samples;
};

/// Draws X ~ N(mu(delta_true), Gamma_X) with the model linearized at
/// model.delta0 (mu(delta_true) = mu0 + mu'*(delta_true - delta0)) and runs
/// the estimator on each draw. Deterministic for a given seed.
MonteCarloSummary monte_carlo_validation(const MeasurementModel& model, double delta_true,
                                         int n_samples, std::uint64_t seed);

}  // namespace qnd
