#pragma once

#include "levisim/types.hpp"

#include <optional>

namespace levisim::experiment {

/// High-finesse cavity with a dielectric nanosphere trapped by the cavity
/// field itself, so the trap frequency follows the intracavity photon number.
struct ExperimentConfig {
  double radius = 200e-9;         // m
  double mass = 7.35e-17;         // kg
  double wavelength = 1064e-9;    // m
  double cavity_length = 13e-3;   // m
  double finesse = 4.0e5;
  double waist = 60e-6;           // m
  double epsilon_r = 3.9;         // silica, static value
  double gamma_ratio = 0.15;      // Gamma / omega_m, detuning-independent
  std::optional<double> kappa_total;  // rad/s; default 2 * intrinsic_loss
  std::optional<double> input_power;  // W; set by calibrate()
};

struct OperatingPoint {
  double n_c;           // intracavity photon number
  SystemParams params;  // SI angular frequencies
};

void check(const ExperimentConfig& config);  // throws DomainError

double cavity_frequency(const ExperimentConfig& config);  // rad/s

/// kappa_0 = 2*pi * c / (2 F L), in rad/s.
double intrinsic_loss(const ExperimentConfig& config);

double total_loss(const ExperimentConfig& config);  // rad/s

/// Polarizability rate A = (3 V_s / 2 V_m) (eps_r - 1)/(eps_r + 2) omega_l,
/// with omega_l taken at the cavity resonance (the detuning correction is
/// below 1e-8 relative over any sweep of interest).
double polarizability_rate(const ExperimentConfig& config);

/// n_c = (kappa/2) * P_in / (2 hbar (delta + omega_c)) / (kappa^2/4 + delta^2).
/// Requires input_power (run calibrate first).
double photon_number(const ExperimentConfig& config, double delta);

/// Trap frequency and optomechanical coupling at a given photon number:
///   omega_m^2 = 2 hbar k^2 A n_c / m,   g^2 = hbar k^2 A^2 n_c / (2 m omega_m),
/// so omega_m ~ n_c^(1/2) and g ~ n_c^(1/4). Throws for n_c <= 0 (no trap).
std::pair<double, double> coupling_constants(const ExperimentConfig& config,
                                             double n_c);

/// Fixes input_power so that the trap frequency at zero detuning equals
/// target_omega_m0 (rad/s). n_c is linear in P_in, so this is closed form.
ExperimentConfig calibrate(ExperimentConfig config, double target_omega_m0);

/// Full SI parameter set at a detuning (rad/s): local omega_m, g,
/// gamma = gamma_ratio * omega_m, kappa = total_loss.
OperatingPoint operating_point(const ExperimentConfig& config, double delta);

}  // namespace levisim::experiment
