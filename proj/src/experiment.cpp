#include "levisim/experiment.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace levisim::experiment {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wavenumber(const ExperimentConfig& c) { return two_pi / c.wavelength; }

}  // namespace

void check(const ExperimentConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "experiment config: " << name << " must be > 0";
      throw DomainError(os.str());
    }
  };
  positive(c.radius, "radius");
  positive(c.mass, "mass");
  positive(c.wavelength, "wavelength");
  positive(c.cavity_length, "cavity_length");
  positive(c.waist, "waist");
  positive(c.gamma_ratio, "gamma_ratio");
  if (!(c.finesse > 1.0)) throw DomainError("experiment config: finesse must exceed 1");
  if (!(c.epsilon_r > 1.0))
    throw DomainError("experiment config: epsilon_r must exceed 1");
  if (c.kappa_total && !(*c.kappa_total > 0.0))
    throw DomainError("experiment config: kappa_total must be > 0");
  if (c.input_power && !(*c.input_power > 0.0))
    throw DomainError("experiment config: input_power must be > 0");
}

double cavity_frequency(const ExperimentConfig& c) {
  return two_pi * consts::c_light / c.wavelength;
}

double intrinsic_loss(const ExperimentConfig& c) {
  return two_pi * consts::c_light / (2.0 * c.finesse * c.cavity_length);
}

double total_loss(const ExperimentConfig& c) {
  // The dielectric adds a loss of the same order as the mirror loss.
  return c.kappa_total.value_or(2.0 * intrinsic_loss(c));
}

double polarizability_rate(const ExperimentConfig& c) {
  const double v_sphere = (4.0 / 3.0) * std::numbers::pi * std::pow(c.radius, 3);
  const double v_mode = std::numbers::pi * c.waist * c.waist * c.cavity_length;
  const double depolarization = (c.epsilon_r - 1.0) / (c.epsilon_r + 2.0);
  return 1.5 * (v_sphere / v_mode) * depolarization * cavity_frequency(c);
}

double photon_number(const ExperimentConfig& c, double delta) {
  if (!c.input_power)
    throw DomainError("photon_number: input_power unset, calibrate() first");
  const double kappa = total_loss(c);
  const double omega_l = cavity_frequency(c) + delta;
  if (!(omega_l > 0.0))
    throw DomainError("photon_number: laser frequency must stay positive");
  return (kappa / 2.0) * (*c.input_power / (2.0 * consts::hbar * omega_l)) /
         (kappa * kappa / 4.0 + delta * delta);
}

std::pair<double, double> coupling_constants(const ExperimentConfig& c,
                                             double n_c) {
  if (!(n_c > 0.0))
    throw DomainError(
        "coupling_constants: n_c must be > 0 (the cavity field is the trap)");
  const double k2 = wavenumber(c) * wavenumber(c);
  const double a_rate = polarizability_rate(c);
  const double omega_m =
      std::sqrt(2.0 * consts::hbar * k2 * a_rate * n_c / c.mass);
  const double g = std::sqrt(consts::hbar * k2 * a_rate * a_rate * n_c /
                             (2.0 * c.mass * omega_m));
  return {omega_m, g};
}

ExperimentConfig calibrate(ExperimentConfig c, double target_omega_m0) {
  check(c);
  if (!(target_omega_m0 > 0.0))
    throw DomainError("calibrate: target trap frequency must be > 0");
  const double k2 = wavenumber(c) * wavenumber(c);
  const double a_rate = polarizability_rate(c);
  const double n_c0 = c.mass * target_omega_m0 * target_omega_m0 /
                      (2.0 * consts::hbar * k2 * a_rate);
  // At zero detuning n_c = P_in / (hbar omega_c kappa); n_c is linear in
  // P_in, so the root-find is closed form.
  c.input_power = n_c0 * consts::hbar * cavity_frequency(c) * total_loss(c);
  if (!std::isfinite(*c.input_power) || !(*c.input_power > 0.0))
    throw DomainError("calibrate: target is unattainable with this geometry");
  return c;
}

OperatingPoint operating_point(const ExperimentConfig& c, double delta) {
  check(c);
  const double n_c = photon_number(c, delta);
  const auto [omega_m, g] = coupling_constants(c, n_c);
  OperatingPoint op;
  op.n_c = n_c;
  op.params.omega_m = omega_m;
  op.params.delta = delta;
  op.params.g = g;
  op.params.kappa = total_loss(c);
  op.params.gamma = c.gamma_ratio * omega_m;
  op.params.units = Units::si;
  return op;
}

}  // namespace levisim::experiment
