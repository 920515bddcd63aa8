#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace qnd {

enum class AtomNumberKind { Deterministic, Poisson };

struct AtomNumberModel {
    AtomNumberKind kind = AtomNumberKind::Deterministic;
    double mean = 0.0;  // <N>
};

/// Joint Gaussian state of the collective spin and the probe pulses appended so far.
///
/// Coordinate ordering: (J0, Jx, Jy, Jz, dX_0, dP_0, dX_1, dP_1, ...).
/// Spin components are dimensionless (hbar = 1); optical quadratures carry
/// vacuum variance 1/4. Value type: every operation returns a new state.
class PhaseSpaceState {
  public:
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    PhaseSpaceState() = default;
    PhaseSpaceState(Eigen::VectorXd m, Eigen::MatrixXd c)
        : mean(std::move(m)), cov(std::move(c)) {}

    int dim() const { return static_cast<int>(mean.size()); }
    int n_pulses() const { return (dim() - 4) / 2; }

    /// <N> = 2 <J0>; tracks loss, conditioning and any other update.
    double mean_atom_number() const { return 2.0 * mean(0); }

    Eigen::Vector3d spin_mean() const { return mean.segment<3>(1); }
    Eigen::Matrix3d spin_cov() const { return cov.block<3, 3>(1, 1); }

    static int x_index(int pulse) { return 4 + 2 * pulse; }
    static int p_index(int pulse) { return 5 + 2 * pulse; }

    /// Symmetry and positive-semidefiniteness check used by tests and debug paths.
    /// Returns the most negative eigenvalue scaled by trace (0 if empty).
    double psd_defect() const;
    bool is_symmetric(double rel_tol = 1e-12) const;
};

/// Optical vacuum variance per quadrature, X = (a^dag + a)/2.
inline constexpr double kVacuumVar = 0.25;

/// Handler for model-validity warnings (small-angle regime). Default writes to stderr.
void set_warning_handler(std::function<void(const std::string&)> handler);

/// All atoms pumped to the clock ground state: <J> = (N/2, 0, 0, -N/2).
/// Deterministic N: spin covariance diag(0, N/4, N/4, 0).
/// Poisson N: diag(N/4, N/4, N/4, N/4) with Cov(J0,Jz) = -N/4, so Var(J0-Jz) = Var(N) = N.
PhaseSpaceState new_coherent_state(const AtomNumberModel& model);

/// Same, with the 4x4 spin block overridden (normalization studies).
PhaseSpaceState new_coherent_state(const AtomNumberModel& model,
                                   const Eigen::Vector4d& spin_mean,
                                   const Eigen::Matrix4d& spin_cov);

/// Appends one probe mode in vacuum: block diag(1/4, 1/4), zero cross terms,
/// zero means (fluctuation coordinates).
PhaseSpaceState append_probe_mode(const PhaseSpaceState& state);

/// Coherent drive for `duration`: rotation of (Jx,Jy,Jz) through angle
/// Omega_eff*t about the unit axis (omega, 0, -delta)/Omega_eff,
/// Omega_eff = sqrt(omega^2 + delta^2). J0 and optical blocks are untouched.
PhaseSpaceState rabi_evolve(const PhaseSpaceState& state, double omega, double delta,
                            double duration);

/// Dispersive probe interaction with pulse `pulse_index`, photon number alpha_sq,
/// coupling g (rad/atom). Linearized about the current spin means:
///   Jx   += 2 g |a| <Jy> dP_i
///   Jy   -= 2 g |a| <Jx> dP_i
///   dX_i +=   g |a| (J0 - Jz)
/// The deterministic rotation by g|a|^2 is assumed compensated; an optional
/// residual angle about z can be supplied for sensitivity studies.
PhaseSpaceState qnd_interact(const PhaseSpaceState& state, int pulse_index, double g,
                             double alpha_sq, double residual_rotation = 0.0);

/// Scattering loss for a fraction eta of the atoms:
/// means scaled by (1-eta); spin covariance
///   (1-eta)^2 G + eta(1-eta) <N> G_lambda + <N> eta/4 I4
/// with G_lambda = G/<N> (current-state single-atom covariance) and the
/// isotropic term from f = 1/2 (f(f+1)/3 = 1/4). Atom-optical cross blocks
/// scale by (1-eta); optical blocks are untouched.
PhaseSpaceState apply_decoherence(const PhaseSpaceState& state, double eta);

struct MeasurementStats {
    Eigen::VectorXd mu;       // X-quadrature means, ordered by pulse index
    Eigen::MatrixXd gamma_x;  // covariance of those quadratures
};

/// Reads off the X statistics of the chosen pulses from the joint state.
MeasurementStats extract_measurement_stats(const PhaseSpaceState& state,
                                           std::span<const int> pulse_indices);

/// Gaussian conditioning on measured X quadratures. The measured modes are
/// removed from the state (their X collapsed to the outcome, their P
/// marginalized); remaining pulses are renumbered in order.
PhaseSpaceState condition_on_pulses(const PhaseSpaceState& state,
                                    std::span<const int> pulse_indices,
                                    std::span<const double> outcomes);

}  // namespace qnd
