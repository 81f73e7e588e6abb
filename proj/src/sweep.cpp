#include "levisim/sweep.hpp"

#include "levisim/matrices.hpp"
#include "levisim/merit.hpp"
#include "levisim/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace levisim::sweep {

namespace {

constexpr double pi = std::numbers::pi;

double objective_of(const Matrix4d& sigma, Objective objective) {
  const Matrix2d sm = merit::reduce_mechanical(sigma);
  switch (objective) {
    case Objective::n_ph:
      return merit::phonon_number(sm);
    case Objective::purity:
      return -merit::purity(sm);  // maximized
    case Objective::squeezing:
      return merit::squeezing(sm).xi;
    case Objective::delta_x:
      return sm(0, 0);  // delta_x is monotone in sigma_33 at fixed omega_m
  }
  throw DomainError("unknown objective");
}

double eval_phi(const SystemParams& params, MeasurementParams meas, double phi,
                Objective objective) {
  meas.phi = phi;
  const auto cm = matrices::build_conditional(params, meas);
  const auto ss = solvers::solve_riccati(cm);
  return objective_of(ss.sigma, objective);
}

}  // namespace

PhaseOpt optimize_phase(const SystemParams& params,
                        const MeasurementParams& meas_template,
                        Objective objective) {
  if (meas_template.eta1 <= 0.0) {
    MeasurementParams meas = meas_template;
    meas.phi = 0.0;
    const auto cm = matrices::build_conditional(params, meas);
    const auto ss = solvers::solve_riccati(cm);
    return PhaseOpt{0.0, false, objective_of(ss.sigma, objective)};
  }

  // Coarse scan over a period, then golden-section refinement around the
  // best grid point. The objective is smooth and pi-periodic in phi.
  constexpr int n_grid = 64;
  constexpr double step = pi / n_grid;
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  std::array<double, n_grid> values{};
  for (int i = 0; i < n_grid; ++i) {
    values[i] = eval_phi(params, meas_template, i * step, objective);
    if (values[i] < best_value) {
      best_value = values[i];
      best = i;
    }
  }

  double lo = (best - 1) * step;
  double hi = (best + 1) * step;
  constexpr double inv_phi = 0.6180339887498949;  // 1/golden ratio
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = eval_phi(params, meas_template, x1, objective);
  double f2 = eval_phi(params, meas_template, x2, objective);
  while (hi - lo > 1e-6) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = eval_phi(params, meas_template, x1, objective);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = eval_phi(params, meas_template, x2, objective);
    }
  }
  double phi_opt = f1 <= f2 ? x1 : x2;
  double value = std::min(f1, f2);
  if (best_value < value) {  // refinement must never lose to the scan
    phi_opt = best * step;
    value = best_value;
  }
  phi_opt = std::fmod(phi_opt + pi, pi);
  return PhaseOpt{phi_opt, true, value};
}

void check_spec(const SweepSpec& spec) {
  if (spec.delta_grid.empty()) throw DomainError("sweep: empty detuning grid");
  if (!std::is_sorted(spec.delta_grid.begin(), spec.delta_grid.end()))
    throw DomainError("sweep: detuning grid must be sorted ascending");
  if (spec.efficiencies.empty())
    throw DomainError("sweep: need at least one efficiency pair");
  for (const auto& e : spec.efficiencies) {
    if (e.eta1 < 0 || e.eta1 > 1 || e.eta2 < 0 || e.eta2 > 1)
      throw DomainError("sweep: efficiencies must lie in [0, 1]");
    switch (spec.scenario) {
      case Scenario::unconditional:
        if (e.eta1 != 0.0 || e.eta2 != 0.0)
          throw DomainError("sweep: unconditional scenario requires eta1 = eta2 = 0");
        break;
      case Scenario::cavity_homodyne:
        if (e.eta2 != 0.0)
          throw DomainError("sweep: cavity-homodyne scenario requires eta2 = 0");
        break;
      case Scenario::position_only:
        if (e.eta1 != 0.0)
          throw DomainError("sweep: position-only scenario requires eta1 = 0");
        break;
      case Scenario::both:
        break;
    }
  }
  if (spec.experiment_config) {
    experiment::check(*spec.experiment_config);
    if (!spec.experiment_config->input_power)
      throw DomainError("sweep: experiment config must be calibrated first");
  } else if (spec.system.units != Units::dimensionless) {
    throw UnitError(
        "sweep: SI system parameters require an experiment config; "
        "dimensionless sweeps must be given in units of omega_m");
  }
}

namespace {

SweepRow compute_row(const SweepSpec& spec, double delta,
                     const EfficiencyPair& eff) {
  SweepRow row;
  row.delta = delta;
  row.eta1 = eff.eta1;
  row.eta2 = eff.eta2;
  try {
    SystemParams params;
    double omega_m_si = 0.0;
    double mass_si = 0.0;
    if (spec.experiment_config) {
      const auto& cfg = *spec.experiment_config;
      // Grid values are in units of the zero-detuning trap frequency; the
      // dynamics at each point use the local parameters.
      const double omega_m0 =
          experiment::coupling_constants(cfg, experiment::photon_number(cfg, 0.0))
              .first;
      const auto op = experiment::operating_point(cfg, delta * omega_m0);
      params = params_in_units_of(op.params, omega_m0);
      omega_m_si = op.params.omega_m;
      mass_si = cfg.mass;
      row.omega_m_local = omega_m_si;
      row.n_c = op.n_c;
    } else {
      params = spec.system;
      params.delta = delta;
    }

    MeasurementParams meas;
    meas.eta1 = eff.eta1;
    meas.eta2 = eff.eta2;
    std::tie(params, meas) = validate(params, meas);

    const auto un = matrices::build_unconditional(params);
    row.stable = stability::is_hurwitz(un.a).is_stable;

    const bool monitored = eff.eta1 > 0.0 || eff.eta2 > 0.0;
    Matrix4d sigma;
    bool have_sigma = false;
    if (monitored) {
      if (eff.eta1 > 0.0) {
        const auto opt = optimize_phase(params, meas, spec.objective);
        row.phi_opt = opt.phi;
        meas.phi = opt.phi;
      }
      const auto cm = matrices::build_conditional(params, meas);
      row.detectable = stability::is_detectable(cm.b, cm.a_tilde);
      if (row.detectable) {
        sigma = solvers::solve_riccati(cm).sigma;
        have_sigma = true;
      } else {
        row.error = "not detectable";
      }
    } else {
      const auto cm = matrices::build_conditional(params, meas);
      row.detectable = stability::is_detectable(cm.b, cm.a_tilde);
      if (row.stable) {
        sigma = solvers::solve_lyapunov(un.a, un.d).sigma;
        have_sigma = true;
      } else {
        row.error = "unstable without monitoring";
      }
    }

    if (have_sigma) {
      const Matrix2d sm = merit::reduce_mechanical(sigma);
      row.n_ph = merit::phonon_number(sm);
      row.purity = merit::purity(sm);
      const auto sq = merit::squeezing(sm);
      row.xi = sq.xi;
      row.xi_db = sq.xi_db;
      if (spec.experiment_config) {
        const auto pu = merit::position_uncertainty(sm, mass_si, omega_m_si);
        row.delta_x = pu.delta_x;
        row.delta_x_vacuum = pu.vacuum_threshold;
      }
    }
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

template <bool Parallel>
std::vector<SweepRow> sweep_impl(const SweepSpec& spec) {
  check_spec(spec);
  const std::size_t n_delta = spec.delta_grid.size();
  const std::size_t n_rows = n_delta * spec.efficiencies.size();
  std::vector<SweepRow> rows(n_rows);
  const auto total = static_cast<std::ptrdiff_t>(n_rows);

#pragma omp parallel for schedule(dynamic) if (Parallel)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    const std::size_t ei = static_cast<std::size_t>(i) / n_delta;
    const std::size_t di = static_cast<std::size_t>(i) % n_delta;
    rows[static_cast<std::size_t>(i)] =
        compute_row(spec, spec.delta_grid[di], spec.efficiencies[ei]);
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> detuning_sweep(const SweepSpec& spec) {
  return sweep_impl<true>(spec);
}

std::vector<SweepRow> detuning_sweep_serial(const SweepSpec& spec) {
  return sweep_impl<false>(spec);
}

Matrix2d decoupled_mechanical_steady(double eta2, double gamma_over_omega) {
  if (!(eta2 > 0.0) || eta2 > 1.0)
    throw DomainError("decoupled steady state needs 0 < eta2 <= 1");
  if (!(gamma_over_omega > 0.0))
    throw DomainError("decoupled steady state needs gamma > 0");
  const double s = gamma_over_omega;
  const double u = 4.0 * eta2 * s;
  const double c = (std::sqrt(1.0 + 4.0 * u * s) - 1.0) / u;
  const double a = std::sqrt(2.0 * c / u);
  const double b = a * (1.0 + u * c);
  Matrix2d sm;
  sm << a, c, c, b;
  return sm;
}

std::vector<DecoupledRow> decoupled_curves(
    const std::vector<double>& gamma_over_omega_grid,
    const std::vector<double>& eta2_list) {
  if (gamma_over_omega_grid.empty() || eta2_list.empty())
    throw DomainError("decoupled_curves: empty grid");
  std::vector<DecoupledRow> rows;
  rows.reserve(gamma_over_omega_grid.size() * eta2_list.size());
  for (double eta2 : eta2_list)
    for (double s : gamma_over_omega_grid) {
      const Matrix2d sm = decoupled_mechanical_steady(eta2, s);
      DecoupledRow row;
      row.gamma_over_omega = s;
      row.eta2 = eta2;
      row.n_ph = merit::phonon_number(sm);
      row.purity = merit::purity(sm);
      const auto sq = merit::squeezing(sm);
      row.xi = sq.xi;
      row.xi_db = sq.xi_db;
      rows.push_back(row);
    }
  return rows;
}

stability::StabilityMap stability_scan(const std::vector<double>& delta_grid,
                                       const std::vector<double>& g_grid,
                                       double kappa, double gamma,
                                       double omega_m) {
  return stability::stability_map(delta_grid, g_grid, kappa, gamma, omega_m);
}

}  // namespace levisim::sweep
