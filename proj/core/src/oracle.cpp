#include "qndclock/oracle.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace qnd::oracle {

namespace {

int popcount_down(unsigned idx, int n_atoms) {
    return n_atoms - std::popcount(idx);
}

}  // namespace

ExactState down_state(int n_atoms) {
    if (n_atoms < 1 || n_atoms > 20)
        throw std::invalid_argument("oracle::down_state: unsupported atom count");
    ExactState s;
    s.n_atoms = n_atoms;
    s.amp = Eigen::VectorXcd::Zero(1 << n_atoms);
    s.amp(0) = 1.0;
    return s;
}

ExactState exact_rabi(const ExactState& state, double omega, double delta, double t) {
    if (t < 0.0) throw std::invalid_argument("oracle::exact_rabi: negative duration");
    const double oeff = std::hypot(omega, delta);
    if (t == 0.0 || oeff == 0.0) return state;

    // single-atom propagator exp(-i t (omega sx - delta sz)/2)
    using C = std::complex<double>;
    const double half = 0.5 * oeff * t;
    const C c = std::cos(half);
    const C is = C(0.0, -std::sin(half));
    Eigen::Matrix2cd u;
    // basis (down, up); sz|down> = -|down>
    const double nx = omega / oeff, nz = -delta / oeff;
    u << c + is * (-nz), is * nx,
         is * nx, c + is * nz;

    ExactState out = state;
    for (int atom = 0; atom < state.n_atoms; ++atom) {
        const unsigned bit = 1u << atom;
        Eigen::VectorXcd next = out.amp;
        for (unsigned idx = 0; idx < out.amp.size(); ++idx) {
            if (idx & bit) continue;
            const C a_down = out.amp(idx);
            const C a_up = out.amp(idx | bit);
            next(idx) = u(0, 0) * a_down + u(0, 1) * a_up;
            next(idx | bit) = u(1, 0) * a_down + u(1, 1) * a_up;
        }
        out.amp.swap(next);
    }
    return out;
}

double expect_n_down(const ExactState& state) {
    double e = 0.0;
    for (unsigned idx = 0; idx < state.amp.size(); ++idx)
        e += std::norm(state.amp(idx)) * popcount_down(idx, state.n_atoms);
    return e;
}

double var_n_down(const ExactState& state) {
    double e = 0.0, e2 = 0.0;
    for (unsigned idx = 0; idx < state.amp.size(); ++idx) {
        const double p = std::norm(state.amp(idx));
        const double nd = popcount_down(idx, state.n_atoms);
        e += p * nd;
        e2 += p * nd * nd;
    }
    return e2 - e * e;
}

double expect_jz(const ExactState& state) {
    double e = 0.0;
    for (unsigned idx = 0; idx < state.amp.size(); ++idx)
        e += std::norm(state.amp(idx)) *
             0.5 * (state.n_atoms - 2 * popcount_down(idx, state.n_atoms));
    return e;
}

ProbeMoments exact_probe_moments(const ExactState& state, double g, double alpha_sq) {
    if (alpha_sq < 0.0)
        throw std::invalid_argument("oracle::exact_probe_moments: negative photon number");
    const double a = std::sqrt(alpha_sq);
    double sin_g = 0.0, cos_2g = 0.0;
    for (unsigned idx = 0; idx < state.amp.size(); ++idx) {
        const double p = std::norm(state.amp(idx));
        const double nd = popcount_down(idx, state.n_atoms);
        sin_g += p * std::sin(g * nd);
        cos_2g += p * std::cos(2.0 * g * nd);
    }
    ProbeMoments m;
    m.mean_x = a * sin_g;
    const double x2 = (2.0 * alpha_sq * (1.0 - cos_2g) + 1.0) / 4.0;
    m.var_x = x2 - m.mean_x * m.mean_x;
    return m;
}

}  // namespace qnd::oracle
