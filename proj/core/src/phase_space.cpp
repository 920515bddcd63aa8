#include "qndclock/phase_space.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <stdexcept>

#include "qndclock/errors.hpp"

namespace qnd {

namespace {

std::function<void(const std::string&)> g_warn = [](const std::string& msg) {
    std::cerr << "qndclock: warning: " << msg << "\n";
};

void resymmetrize(Eigen::MatrixXd& m) {
    m = ((m + m.transpose()) * 0.5).eval();
}

Eigen::Matrix3d rotation_about(const Eigen::Vector3d& axis, double angle) {
    Eigen::Matrix3d k;
    k << 0, -axis.z(), axis.y(),
         axis.z(), 0, -axis.x(),
         -axis.y(), axis.x(), 0;
    return Eigen::Matrix3d::Identity() + std::sin(angle) * k +
           (1.0 - std::cos(angle)) * (k * k);
}

}  // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
    g_warn = handler ? std::move(handler) : [](const std::string&) {};
}

double PhaseSpaceState::psd_defect() const {
    if (dim() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    const double tr = cov.trace();
    const double lmin = es.eigenvalues().minCoeff();
    return lmin < 0 ? lmin / (tr > 0 ? tr : 1.0) : 0.0;
}

bool PhaseSpaceState::is_symmetric(double rel_tol) const {
    const double scale = cov.cwiseAbs().maxCoeff();
    return (cov - cov.transpose()).cwiseAbs().maxCoeff() <= rel_tol * std::max(scale, 1.0);
}

PhaseSpaceState new_coherent_state(const AtomNumberModel& model) {
    if (!(model.mean > 0.0))
        throw std::invalid_argument("new_coherent_state: mean atom number must be positive");
    const double n = model.mean;
    Eigen::Vector4d mean(n / 2.0, 0.0, 0.0, -n / 2.0);
    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
    if (model.kind == AtomNumberKind::Deterministic) {
        cov.diagonal() << 0.0, n / 4.0, n / 4.0, 0.0;
    } else {
        cov.diagonal().setConstant(n / 4.0);
        cov(0, 3) = cov(3, 0) = -n / 4.0;  // Jz = -J0 exactly for the all-down state
    }
    return new_coherent_state(model, mean, cov);
}

PhaseSpaceState new_coherent_state(const AtomNumberModel& model,
                                   const Eigen::Vector4d& spin_mean,
                                   const Eigen::Matrix4d& spin_cov) {
    if (!(model.mean > 0.0))
        throw std::invalid_argument("new_coherent_state: mean atom number must be positive");
    PhaseSpaceState s;
    s.mean = spin_mean;
    s.cov = spin_cov;
    return s;
}

PhaseSpaceState append_probe_mode(const PhaseSpaceState& state) {
    const int n = state.dim();
    PhaseSpaceState out;
    out.mean = Eigen::VectorXd::Zero(n + 2);
    out.mean.head(n) = state.mean;
    out.cov = Eigen::MatrixXd::Zero(n + 2, n + 2);
    out.cov.topLeftCorner(n, n) = state.cov;
    out.cov(n, n) = kVacuumVar;
    out.cov(n + 1, n + 1) = kVacuumVar;
    return out;
}

PhaseSpaceState rabi_evolve(const PhaseSpaceState& state, double omega, double delta,
                            double duration) {
    if (duration < 0.0)
        throw std::invalid_argument("rabi_evolve: negative duration");
    const double oeff = std::hypot(omega, delta);
    if (duration == 0.0 || oeff == 0.0) return state;

    const Eigen::Vector3d axis = Eigen::Vector3d(omega, 0.0, -delta) / oeff;
    const Eigen::Matrix3d r = rotation_about(axis, oeff * duration);

    PhaseSpaceState out = state;
    out.mean.segment<3>(1) = r * state.mean.segment<3>(1);
    // conjugate rows/columns 1..3 of the full covariance
    out.cov.middleRows<3>(1) = r * state.cov.middleRows<3>(1);
    out.cov.middleCols<3>(1) = (out.cov.middleCols<3>(1) * r.transpose()).eval();
    resymmetrize(out.cov);
    return out;
}

PhaseSpaceState qnd_interact(const PhaseSpaceState& state, int pulse_index, double g,
                             double alpha_sq, double residual_rotation) {
    if (pulse_index < 0 || pulse_index >= state.n_pulses())
        throw std::invalid_argument("qnd_interact: bad pulse index");
    if (alpha_sq < 0.0)
        throw std::invalid_argument("qnd_interact: negative photon number");

    const double phase = g * (state.mean(0) - state.mean(3));
    if (std::abs(phase) > 0.3)
        g_warn("qnd_interact: phase shift g<Ndown> = " + std::to_string(phase) +
               " rad exceeds the small-angle regime");

    const int n = state.dim();
    const int ix = PhaseSpaceState::x_index(pulse_index);
    const int ip = PhaseSpaceState::p_index(pulse_index);
    const double a = std::sqrt(alpha_sq);

    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n);
    s(1, ip) = 2.0 * g * a * state.mean(2);
    s(2, ip) = -2.0 * g * a * state.mean(1);
    s(ix, 0) = g * a;
    s(ix, 3) = -g * a;
    if (residual_rotation != 0.0) {
        const double c = std::cos(residual_rotation), sn = std::sin(residual_rotation);
        s(1, 1) = c; s(1, 2) = -sn;
        s(2, 1) = sn; s(2, 2) = c;
    }

    PhaseSpaceState out;
    out.mean = s * state.mean;
    out.cov = s * state.cov * s.transpose();
    resymmetrize(out.cov);
    return out;
}

PhaseSpaceState apply_decoherence(const PhaseSpaceState& state, double eta) {
    if (eta < 0.0)
        throw std::invalid_argument("apply_decoherence: negative eta");
    if (eta >= 1.0)
        throw std::invalid_argument("apply_decoherence: eta >= 1, probe destroys ensemble");
    if (eta == 0.0) return state;

    const double n_atoms = state.mean_atom_number();
    const Eigen::Matrix4d gamma_lambda = state.cov.topLeftCorner<4, 4>() / n_atoms;

    PhaseSpaceState out = state;
    out.mean.head<4>() *= (1.0 - eta);
    out.cov.topRows<4>() *= (1.0 - eta);
    out.cov.leftCols<4>() *= (1.0 - eta);
    out.cov.topLeftCorner<4, 4>() +=
        eta * (1.0 - eta) * n_atoms * gamma_lambda +
        n_atoms * eta * 0.25 * Eigen::Matrix4d::Identity();
    resymmetrize(out.cov);
    return out;
}

MeasurementStats extract_measurement_stats(const PhaseSpaceState& state,
                                           std::span<const int> pulse_indices) {
    const auto k = static_cast<int>(pulse_indices.size());
    MeasurementStats stats;
    stats.mu.resize(k);
    stats.gamma_x.resize(k, k);
    for (int i = 0; i < k; ++i) {
        if (pulse_indices[i] < 0 || pulse_indices[i] >= state.n_pulses())
            throw std::invalid_argument("extract_measurement_stats: bad pulse index");
        const int xi = PhaseSpaceState::x_index(pulse_indices[i]);
        stats.mu(i) = state.mean(xi);
        for (int j = 0; j < k; ++j)
            stats.gamma_x(i, j) = state.cov(xi, PhaseSpaceState::x_index(pulse_indices[j]));
    }
    return stats;
}

PhaseSpaceState condition_on_pulses(const PhaseSpaceState& state,
                                    std::span<const int> pulse_indices,
                                    std::span<const double> outcomes) {
    if (pulse_indices.size() != outcomes.size())
        throw std::invalid_argument("condition_on_pulses: index/outcome size mismatch");
    const auto k = static_cast<int>(pulse_indices.size());
    if (k == 0) return state;

    std::vector<bool> measured(static_cast<size_t>(state.n_pulses()), false);
    for (int idx : pulse_indices) {
        if (idx < 0 || idx >= state.n_pulses())
            throw std::invalid_argument("condition_on_pulses: bad pulse index");
        if (measured[static_cast<size_t>(idx)])
            throw std::invalid_argument("condition_on_pulses: pulse measured twice");
        measured[static_cast<size_t>(idx)] = true;
    }

    // kept coordinates: spin block + both quadratures of unmeasured pulses
    std::vector<int> keep;
    for (int i = 0; i < 4; ++i) keep.push_back(i);
    for (int p = 0; p < state.n_pulses(); ++p) {
        if (measured[static_cast<size_t>(p)]) continue;
        keep.push_back(PhaseSpaceState::x_index(p));
        keep.push_back(PhaseSpaceState::p_index(p));
    }
    const auto m = static_cast<int>(keep.size());

    Eigen::VectorXd innov(k);
    Eigen::MatrixXd gx(k, k);
    Eigen::MatrixXd cross(m, k);  // Cov(kept, measured X)
    for (int i = 0; i < k; ++i) {
        const int xi = PhaseSpaceState::x_index(pulse_indices[i]);
        innov(i) = outcomes[i] - state.mean(xi);
        for (int j = 0; j < k; ++j)
            gx(i, j) = state.cov(xi, PhaseSpaceState::x_index(pulse_indices[j]));
        for (int r = 0; r < m; ++r) cross(r, i) = state.cov(keep[static_cast<size_t>(r)], xi);
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(gx);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * gx.trace())
        throw DegenerateCovariance("condition_on_pulses: singular measured covariance");

    const Eigen::MatrixXd gain = ldlt.solve(cross.transpose()).transpose();  // cross * gx^-1

    PhaseSpaceState out;
    out.mean.resize(m);
    out.cov.resize(m, m);
    for (int r = 0; r < m; ++r) out.mean(r) = state.mean(keep[static_cast<size_t>(r)]);
    out.mean += gain * innov;
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
            out.cov(r, c) = state.cov(keep[static_cast<size_t>(r)], keep[static_cast<size_t>(c)]);
    out.cov -= gain * cross.transpose();
    resymmetrize(out.cov);
    return out;
}

}  // namespace qnd
