#pragma once

#include "levisim/experiment.hpp"
#include "levisim/stability.hpp"
#include "levisim/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace levisim::sweep {

enum class Scenario { unconditional, cavity_homodyne, position_only, both };
enum class Objective { n_ph, purity, squeezing, delta_x };

struct EfficiencyPair {
  double eta1;
  double eta2;
};

/// One sweep = detuning grid x efficiency curves. Dimensionless mode uses
/// the system template with delta substituted per grid point (grid in units
/// of omega_m); experiment mode derives all rates per point from the
/// calibrated config (grid in units of the zero-detuning omega_m0).
struct SweepSpec {
  std::vector<double> delta_grid;
  Scenario scenario = Scenario::unconditional;
  std::vector<EfficiencyPair> efficiencies;
  Objective objective = Objective::squeezing;
  SystemParams system;
  std::optional<experiment::ExperimentConfig> experiment_config;  // calibrated
};

/// Unstable-and-unmonitored rows carry no steady-state values; per-row
/// failures are recorded in `error`, never aborting the sweep.
struct SweepRow {
  double delta;
  double eta1;
  double eta2;
  std::optional<double> phi_opt;  // absent when the phase is irrelevant
  std::optional<double> n_ph;
  std::optional<double> purity;
  std::optional<double> xi;
  std::optional<double> xi_db;
  std::optional<double> delta_x;          // experiment mode
  std::optional<double> delta_x_vacuum;   // experiment mode
  std::optional<double> omega_m_local;    // experiment mode, rad/s
  std::optional<double> n_c;              // experiment mode
  bool stable = false;
  bool detectable = false;
  std::optional<std::string> error;
};

struct PhaseOpt {
  double phi;
  bool phase_relevant;  // false when eta1 = 0 (objective is phi-independent)
  double objective_value;
};

/// Grid search (64 points over [0, pi)) plus golden-section refinement to
/// 1e-6 rad. Minimizes n_ph, xi or sigma_33; maximizes purity.
PhaseOpt optimize_phase(const SystemParams& params,
                        const MeasurementParams& meas_template,
                        Objective objective);

void check_spec(const SweepSpec& spec);  // throws DomainError

std::vector<SweepRow> detuning_sweep(const SweepSpec& spec);
std::vector<SweepRow> detuning_sweep_serial(const SweepSpec& spec);

struct DecoupledRow {
  double gamma_over_omega;
  double eta2;
  double n_ph;
  double purity;  // = sqrt(eta2) identically
  double xi;
  double xi_db;
};

/// Closed-form steady state of the position-monitored mechanical mode with
/// the cavity decoupled (g = 0), in units of omega_m. Requires eta2 > 0 and
/// gamma > 0 (otherwise the mode is undamped and has no steady state).
Matrix2d decoupled_mechanical_steady(double eta2, double gamma_over_omega);

std::vector<DecoupledRow> decoupled_curves(
    const std::vector<double>& gamma_over_omega_grid,
    const std::vector<double>& eta2_list);

/// Thin wrapper over stability::stability_map with tabular semantics.
stability::StabilityMap stability_scan(const std::vector<double>& delta_grid,
                                       const std::vector<double>& g_grid,
                                       double kappa, double gamma,
                                       double omega_m = 1.0);

}  // namespace levisim::sweep
