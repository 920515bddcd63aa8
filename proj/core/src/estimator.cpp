#include "qndclock/estimator.hpp"

#include <cmath>
#include <limits>
#include <thread>

#include "qndclock/errors.hpp"
#include "qndclock/rng.hpp"

namespace qnd {

namespace {

Eigen::VectorXd solve_gamma(const Eigen::MatrixXd& gamma_x, const Eigen::VectorXd& rhs) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gamma_x);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * gamma_x.trace())
        throw DegenerateCovariance("estimator: singular outcome covariance");
    return ldlt.solve(rhs);
}

double information(const MeasurementModel& model) {
    const double scale = model.mu0.norm() / std::max(std::abs(model.delta0), 1.0);
    if (model.mu_prime.norm() <= 1e-14 * std::max(scale, 1e-300))
        throw UnidentifiableParameter("estimator: mu' = 0, detuning unidentifiable");
    const Eigen::VectorXd w = solve_gamma(model.gamma_x, model.mu_prime);
    const double info = model.mu_prime.dot(w);
    if (!(info > 0.0))
        throw UnidentifiableParameter("estimator: non-positive information");
    return info;
}

}  // namespace

double estimate_detuning(const Eigen::VectorXd& outcomes, const MeasurementModel& model) {
    if (outcomes.size() != model.mu0.size())
        throw std::invalid_argument("estimate_detuning: outcome dimension mismatch");
    const double info = information(model);
    const Eigen::VectorXd w = solve_gamma(model.gamma_x, model.mu_prime);
    return model.delta0 + w.dot(outcomes - model.mu0) / info;
}

double mse(const MeasurementModel& model) {
    return 1.0 / information(model);
}

SensitivityCurve sensitivity_curve(const ProtocolSpec& spec, const PhysicalParams& params,
                                   const Eigen::VectorXd& delta_grid,
                                   std::string protocol_id, int threads) {
    if (delta_grid.size() == 0)
        throw std::invalid_argument("sensitivity_curve: empty grid");
    for (Eigen::Index i = 1; i < delta_grid.size(); ++i)
        if (!(delta_grid(i) > delta_grid(i - 1)))
            throw std::invalid_argument("sensitivity_curve: grid not strictly increasing");

    SensitivityCurve curve;
    curve.delta_grid = delta_grid;
    curve.mse_values.resize(delta_grid.size());
    curve.protocol_id = std::move(protocol_id);
    curve.protocol = spec;
    curve.params = params;

    auto eval_range = [&](Eigen::Index lo, Eigen::Index hi) {
        for (Eigen::Index i = lo; i < hi; ++i) {
            try {
                curve.mse_values(i) = mse(measurement_model(spec, params, delta_grid(i)));
            } catch (const UnidentifiableParameter&) {
                curve.mse_values(i) = std::numeric_limits<double>::infinity();
            }
        }
    };

    const int n_threads = std::max(1, threads);
    if (n_threads == 1 || delta_grid.size() < 2 * n_threads) {
        eval_range(0, delta_grid.size());
    } else {
        std::vector<std::thread> pool;
        const Eigen::Index chunk = (delta_grid.size() + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const Eigen::Index lo = t * chunk;
            const Eigen::Index hi = std::min<Eigen::Index>(lo + chunk, delta_grid.size());
            if (lo < hi) pool.emplace_back(eval_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return curve;
}

MonteCarloSummary monte_carlo_validation(const MeasurementModel& model, double delta_true,
                                         int n_samples, std::uint64_t seed) {
    if (n_samples < 2)
        throw std::invalid_argument("monte_carlo_validation: need at least 2 samples");

    const Eigen::Index d = model.mu0.size();
    Eigen::LLT<Eigen::MatrixXd> llt(model.gamma_x);
    if (llt.info() != Eigen::Success)
        throw DegenerateCovariance("monte_carlo_validation: covariance not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();
    const Eigen::VectorXd mu_true =
        model.mu0 + model.mu_prime * (delta_true - model.delta0);

    double sum = 0.0, sum_sq = 0.0;
    CounterRng rng(seed);
    Eigen::VectorXd z(d);
    for (int s = 0; s < n_samples; ++s) {
        for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.next_normal();
        const Eigen::VectorXd x = mu_true + chol * z;
        const double est = estimate_detuning(x, model);
        sum += est;
        sum_sq += est * est;
    }
    MonteCarloSummary out;
    out.n_samples = n_samples;
    out.mean_estimate = sum / n_samples;
    out.var_estimate = (sum_sq - sum * sum / n_samples) / (n_samples - 1);
    out.standard_error_mean = std::sqrt(out.var_estimate / n_samples);
    return out;
}

}  // namespace qnd
