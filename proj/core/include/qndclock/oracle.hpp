#pragma once

#include <Eigen/Dense>
#include <complex>

namespace qnd::oracle {

/// Exact state-vector simulator for a handful of spin-1/2 atoms.
/// Basis: bit b of the index is atom b, 0 = down, 1 = up. The probe is not
/// given a Hilbert space; coherent-state phase-shift moments are closed-form.
struct ExactState {
    int n_atoms = 0;
    Eigen::VectorXcd amp;

    double norm() const { return amp.norm(); }
};

/// All atoms in the clock ground state.
ExactState down_state(int n_atoms);

/// Exact propagation under the drive Hamiltonian omega*Jx - delta*Jz for time t
/// (tensor power of the single-atom propagator).
ExactState exact_rabi(const ExactState& state, double omega, double delta, double t);

/// Atomic expectation values.
double expect_n_down(const ExactState& state);
double var_n_down(const ExactState& state);
double expect_jz(const ExactState& state);

struct ProbeMoments {
    double mean_x;
    double var_x;
};

/// Exact output-quadrature moments of a coherent probe |alpha|, alpha = i|alpha|,
/// phase-shifted by g per ground-state atom:
///   <X_out>  = |alpha| <sin(g Ndown)>
///   <X_out^2> = [2|alpha|^2 (1 - <cos(2 g Ndown)>) + 1]/4
/// For Ndown eigenstates Var(X_out) = 1/4 identically.
ProbeMoments exact_probe_moments(const ExactState& state, double g, double alpha_sq);

}  // namespace qnd::oracle
