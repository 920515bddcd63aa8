#include "qndclock/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qndclock/errors.hpp"

namespace qnd {

void ProtocolSpec::canonicalize() {
    std::stable_sort(pulses.begin(), pulses.end(),
                     [](const ProbePulse& a, const ProbePulse& b) { return a.time < b.time; });
    if (total_time <= 0.0 && !pulses.empty()) total_time = pulses.back().time;
    for (const auto& p : pulses) {
        if (p.time < 0.0 || p.time > total_time)
            throw std::invalid_argument("ProtocolSpec: pulse time outside [0, total_time]");
        if (p.alpha_sq < 0.0)
            throw std::invalid_argument("ProtocolSpec: negative photon number");
    }
    if (!(omega > 0.0))
        throw std::invalid_argument("ProtocolSpec: omega must be positive");
    if (!(atom_model.mean > 0.0))
        throw std::invalid_argument("ProtocolSpec: atom number must be positive");
}

double PhysicalParams::g() const {
    if (const auto* d = std::get_if<DirectCoupling>(&model)) return d->g;
    return coupling_from_cavity(std::get<CavityModel>(model));
}

double PhysicalParams::eta_gamma() const {
    if (const auto* d = std::get_if<DirectCoupling>(&model)) return d->eta_gamma;
    // per-photon scattering fraction implied by the dispersive coupling
    const auto& c = std::get<CavityModel>(model);
    return coupling_from_cavity(c) * c.gamma_line / c.delta_qnd;
}

double coupling_from_cavity(const CavityModel& c) {
    if (!(c.s_eff > 0.0 && c.gamma_line > 0.0 && c.delta_qnd > 0.0 &&
          c.lambda_probe > 0.0 && c.p_cavity > 0.0 && c.i_sat > 0.0))
        throw std::invalid_argument("coupling_from_cavity: all parameters must be positive");
    const double s = c.p_cavity / (c.s_eff * c.i_sat);
    const double d_over_g = c.delta_qnd / c.gamma_line;
    const double sigma0 = 3.0 * c.lambda_probe * c.lambda_probe / (2.0 * std::numbers::pi);
    return (sigma0 / c.s_eff) * d_over_g / (s + 4.0 * d_over_g * d_over_g);
}

double scattering_fraction(const PhysicalParams& params, double alpha_sq) {
    if (alpha_sq < 0.0)
        throw std::invalid_argument("scattering_fraction: negative photon number");
    const double eta = params.eta_gamma() * alpha_sq;
    if (eta >= 1.0)
        throw ProtocolInfeasible("scattering_fraction: eta = " + std::to_string(eta) +
                                 " >= 1, probe destroys ensemble");
    return eta;
}

namespace {

PhaseSpaceState run_pipeline(const ProtocolSpec& spec, const PhysicalParams& params,
                             double delta, int pulses_applied,
                             std::optional<double> evolve_to) {
    ProtocolSpec s = spec;
    s.canonicalize();
    const int np = static_cast<int>(s.pulses.size());
    const int apply = pulses_applied < 0 ? np : std::min(pulses_applied, np);
    const double g = params.g();

    PhaseSpaceState state = new_coherent_state(s.atom_model);
    double now = 0.0;
    for (int l = 0; l < apply; ++l) {
        const auto& p = s.pulses[static_cast<size_t>(l)];
        state = rabi_evolve(state, s.omega, delta, p.time - now);
        now = p.time;
        state = append_probe_mode(state);
        state = qnd_interact(state, l, g, p.alpha_sq);
        state = apply_decoherence(state, scattering_fraction(params, p.alpha_sq));
    }
    double t_end = now;
    if (evolve_to)
        t_end = *evolve_to;
    else if (apply < np)
        t_end = s.pulses[static_cast<size_t>(apply)].time;
    if (t_end < now)
        throw std::invalid_argument("run_protocol_partial: evolve_to before last pulse");
    state = rabi_evolve(state, s.omega, delta, t_end - now);
    return state;
}

}  // namespace

MeasurementStats run_protocol(const ProtocolSpec& spec, const PhysicalParams& params,
                              double delta) {
    PhaseSpaceState state = run_pipeline(spec, params, delta, -1, std::nullopt);
    std::vector<int> idx(static_cast<size_t>(state.n_pulses()));
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return extract_measurement_stats(state, idx);
}

PhaseSpaceState run_protocol_partial(const ProtocolSpec& spec, const PhysicalParams& params,
                                     double delta, int pulses_applied,
                                     std::optional<double> evolve_to) {
    return run_pipeline(spec, params, delta, pulses_applied, evolve_to);
}

Eigen::VectorXd mu_derivative(const ProtocolSpec& spec, const PhysicalParams& params,
                              double delta0, double rel_step) {
    if (!(rel_step > 0.0))
        throw std::invalid_argument("mu_derivative: rel_step must be positive");
    const double scale = std::max(spec.omega, std::abs(delta0));
    const double h = rel_step * scale;

    auto central = [&](double step) {
        const Eigen::VectorXd up = run_protocol(spec, params, delta0 + step).mu;
        const Eigen::VectorXd dn = run_protocol(spec, params, delta0 - step).mu;
        return Eigen::VectorXd((up - dn) / (2.0 * step));
    };

    const Eigen::VectorXd d_h = central(h);
    const Eigen::VectorXd d_h2 = central(0.5 * h);

    // scale-aware consistency check; mu'/scale has the magnitude of mu itself
    const double mu_scale = run_protocol(spec, params, delta0).mu.norm() / scale;
    const double floor = 1e-9 * std::max(mu_scale, 1e-300);
    if ((d_h - d_h2).norm() > 1e-4 * d_h2.norm() + floor)
        throw DerivativeUnstable("mu_derivative: step-halving check failed at delta0 = " +
                                 std::to_string(delta0));
    return d_h2;
}

MeasurementModel measurement_model(const ProtocolSpec& spec, const PhysicalParams& params,
                                   double delta0) {
    MeasurementModel m;
    const MeasurementStats stats = run_protocol(spec, params, delta0);
    m.mu0 = stats.mu;
    m.gamma_x = stats.gamma_x;
    m.mu_prime = mu_derivative(spec, params, delta0);
    m.delta0 = delta0;
    return m;
}

ProtocolSpec reference_protocol(double omega, double interrogation_time, double alpha_sq,
                                double n_atoms) {
    if (!(omega > 0.0 && interrogation_time > 0.0 && alpha_sq > 0.0 && n_atoms > 0.0))
        throw std::invalid_argument("reference_protocol: all inputs must be positive");
    ProtocolSpec s;
    s.omega = omega;
    s.delta0 = 0.0;
    s.pulses = {{interrogation_time, alpha_sq}};
    s.total_time = interrogation_time;
    s.atom_model = {AtomNumberKind::Deterministic, n_atoms};
    return s;
}

}  // namespace qnd
