#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "qndclock/phase_space.hpp"

namespace qnd {

struct ProbePulse {
    double time;      // s, relative to sequence start
    double alpha_sq;  // photons in the pulse
};

/// Declarative interrogation sequence: drive parameters plus an ordered
/// probe-pulse schedule.
struct ProtocolSpec {
    double omega = 0.0;   // Rabi frequency, rad/s
    double delta0 = 0.0;  // nominal operating detuning, rad/s
    std::vector<ProbePulse> pulses;
    double total_time = 0.0;  // end of interrogation; defaults to max pulse time
    AtomNumberModel atom_model;

    /// Sorts pulses by time, fills total_time, checks ranges. Throws
    /// std::invalid_argument on violation.
    void canonicalize();
};

/// Cavity probing geometry; determines the coupling and the scattering rate.
struct CavityModel {
    double s_eff;         // effective mode area, m^2
    double gamma_line;    // natural linewidth of the probe transition, rad/s
    double delta_qnd;     // probe detuning from that transition, rad/s
    double lambda_probe;  // probe wavelength, m
    double p_cavity;      // intracavity power, W
    double i_sat;         // saturation intensity, W/m^2
};

/// Direct override when the effective numbers are known.
struct DirectCoupling {
    double g;          // rad/atom
    double eta_gamma;  // scattering fraction per probe photon
};

struct PhysicalParams {
    std::variant<CavityModel, DirectCoupling> model;

    double g() const;
    double eta_gamma() const;
};

/// g = (1/S_eff)(3 lambda^2 / 2pi) (D/G) / (s + 4 (D/G)^2), s = P_c/(S_eff I_sat).
double coupling_from_cavity(const CavityModel& cavity);

/// eta = eta_gamma * alpha_sq. Throws ProtocolInfeasible when eta >= 1.
double scattering_fraction(const PhysicalParams& params, double alpha_sq);

/// Linearized outcome model of a protocol at an operating detuning.
struct MeasurementModel {
    Eigen::VectorXd mu0;       // expected outcomes at delta0
    Eigen::VectorXd mu_prime;  // d mu / d delta at delta0
    Eigen::MatrixXd gamma_x;   // outcome covariance at delta0
    double delta0 = 0.0;
};

/// Deterministic pipeline: coherent state, then per pulse (time order)
/// rabi_evolve -> append_probe_mode -> qnd_interact -> apply_decoherence,
/// then the X statistics of all pulses.
MeasurementStats run_protocol(const ProtocolSpec& spec, const PhysicalParams& params,
                              double delta);

/// State after the first `pulses_applied` pulses, freely evolved to
/// `evolve_to` (defaults to the next pulse time or total_time).
PhaseSpaceState run_protocol_partial(const ProtocolSpec& spec, const PhysicalParams& params,
                                     double delta, int pulses_applied,
                                     std::optional<double> evolve_to = std::nullopt);

/// Central finite difference of mu with step h = rel_step*max(omega, |delta0|),
/// accepted only if halving h moves the result by less than 1e-4 relative
/// (with a small absolute floor so exact zeros pass). Throws DerivativeUnstable.
Eigen::VectorXd mu_derivative(const ProtocolSpec& spec, const PhysicalParams& params,
                              double delta0, double rel_step = 1e-6);

/// mu, mu' and Gamma_X bundled at one operating point.
MeasurementModel measurement_model(const ProtocolSpec& spec, const PhysicalParams& params,
                                   double delta0);

/// Single readout at the end of the interrogation on exactly n_atoms atoms;
/// minimizing its MSE over delta defines the projective-readout baseline.
ProtocolSpec reference_protocol(double omega, double interrogation_time, double alpha_sq,
                                double n_atoms);

}  // namespace qnd
