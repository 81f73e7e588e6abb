#include "levisim/solvers.hpp"

#include "levisim/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace levisim::solvers {

namespace {

using matrices::ConditionalMatrices;

/// Solves A X + X A^T + C = 0 through the 16x16 Kronecker system
/// (I (x) A + A (x) I) vec(X) = -vec(C). Exact up to LU roundoff; fine at
/// this dimension and immune to the spectrum pairings that defeat
/// fixed-point iterations.
Matrix4d lyapunov_linear_solve(const Matrix4d& a, const Matrix4d& c) {
  Eigen::Matrix<double, 16, 16> k = Eigen::Matrix<double, 16, 16>::Zero();
  // vec is column-major: X(i,j) sits at index j*4+i.
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      const int row = j * 4 + i;
      for (int m = 0; m < 4; ++m) {
        k(row, j * 4 + m) += a(i, m);   // (A X)(i,j)
        k(row, m * 4 + i) += a(j, m);   // (X A^T)(i,j)
      }
    }
  Eigen::Matrix<double, 16, 1> rhs;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) rhs(j * 4 + i) = -c(i, j);
  Eigen::PartialPivLU<Eigen::Matrix<double, 16, 16>> lu(k);
  const Eigen::Matrix<double, 16, 1> x = lu.solve(rhs);
  if (!x.allFinite())
    throw NumericalError("lyapunov solve produced non-finite entries");
  Matrix4d out;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) out(i, j) = x(j * 4 + i);
  return symmetrized(out);
}

struct RiccatiOde {
  Matrix4d a_tilde;
  Matrix4d btb;
  Matrix4d d_tilde;

  Matrix4d operator()(const Matrix4d& s) const {
    const Matrix4d as = a_tilde * s;
    return as + as.transpose() - s * btb * s + d_tilde;
  }
};

/// Dormand-Prince 5(4) with step control on the matrix state, run until the
/// flow stalls (||ds/dt|| below stop_tol), an early-exit predicate fires, or
/// the budget is spent.
template <typename F, typename Stop>
std::pair<Matrix4d, double> integrate_to_stall(const F& f, Matrix4d s,
                                               double stop_tol, double t_budget,
                                               const Stop& early_exit,
                                               double rtol = 1e-9,
                                               double atol = 1e-11) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = 0.0;
  Matrix4d k1 = f(s);
  double h = 0.01 / (1.0 + k1.norm() / std::max(s.norm(), 1.0));
  std::size_t steps = 0;
  std::size_t accepted = 0;
  const std::size_t max_steps = 20'000'000;

  while (k1.norm() > stop_tol) {
    if (t > t_budget || ++steps > max_steps)
      throw NumericalError("matrix ODE did not reach a fixed point in budget");
    const Matrix4d k2 = f(s + h * (a21 * k1));
    const Matrix4d k3 = f(s + h * (a31 * k1 + a32 * k2));
    const Matrix4d k4 = f(s + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Matrix4d k5 = f(s + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Matrix4d k6 =
        f(s + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Matrix4d snew =
        s + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Matrix4d k7 = f(snew);
    const Matrix4d errm =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double scale =
            atol + rtol * std::max(std::abs(s(i, j)), std::abs(snew(i, j)));
        err = std::max(err, std::abs(errm(i, j)) / scale);
      }
    if (!std::isfinite(err)) throw NumericalError("matrix ODE step overflow");

    if (err <= 1.0) {
      t += h;
      s = symmetrized(snew);
      k1 = f(s);  // not reusing k7: symmetrization nudges the state
      if ((++accepted & 31u) == 0 && early_exit(s)) break;
    }
    const double factor =
        std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    h *= factor;
  }
  return {s, t};
}

double lyapunov_residual(const Matrix4d& a, const Matrix4d& d,
                         const Matrix4d& s) {
  return (a * s + s * a.transpose() + d).norm();
}

double riccati_residual(const ConditionalMatrices& cm, const Matrix4d& btb,
                        const Matrix4d& s) {
  const Matrix4d as = cm.a_tilde * s;
  return (as + as.transpose() - s * btb * s + cm.d_tilde).norm();
}

}  // namespace

SteadyState solve_lyapunov(const Matrix4d& a, const Matrix4d& d) {
  const auto verdict = stability::is_hurwitz(a);
  if (!verdict.is_stable) {
    std::ostringstream os;
    os << "solve_lyapunov: drift is not Hurwitz (spectral abscissa "
       << verdict.spectral_abscissa << ")";
    throw StabilityError(os.str());
  }
  SteadyState out;
  out.sigma = lyapunov_linear_solve(a, d);
  out.residual = lyapunov_residual(a, d, out.sigma);
  out.iterations_or_time = 0.0;
  const double scale = std::max(d.norm(), 1e-300);
  if (!(out.residual <= consts::tol_steady * scale))
    throw NumericalError("solve_lyapunov: residual above tolerance");
  return out;
}

SteadyState solve_riccati(const ConditionalMatrices& cm) {
  if (!stability::is_detectable(cm.b, cm.a_tilde))
    throw StabilityError(
        "solve_riccati: (B, A_tilde) is not detectable, no stabilizing "
        "steady state exists");

  const Matrix4d btb = cm.b.transpose() * cm.b;
  const double scale = std::max(cm.d_tilde.norm(), 1e-300);
  const RiccatiOde ode{cm.a_tilde, btb, cm.d_tilde};

  const auto stabilizing = [&](const Matrix4d& s) {
    return stability::is_hurwitz(cm.a_tilde - s * btb).is_stable;
  };

  // Vacuum initial condition; under detectability the flow converges to the
  // stabilizing solution. We only integrate until the current iterate is
  // itself stabilizing (checked periodically) -- from there Newton converges
  // quadratically -- or until the flow stalls, whichever happens first.
  auto [sigma, t_ode] = integrate_to_stall(ode, Matrix4d::Identity(),
                                           1e-7 * scale, 1e7, stabilizing);

  // Newton polish: each step solves a Lyapunov equation in the closed-loop
  // matrix. From a stabilizing iterate the sequence stays stabilizing and
  // converges monotonically (Kleinman), so this also finishes instances
  // whose flow contracts too slowly to integrate to the fixed point.
  double residual = riccati_residual(cm, btb, sigma);
  for (int iter = 0; iter < 200 && residual > 1e-12 * scale; ++iter) {
    const Matrix4d closed = cm.a_tilde - sigma * btb;
    if (!stability::is_hurwitz(closed).is_stable) break;
    const Matrix4d res =
        cm.a_tilde * sigma + sigma * cm.a_tilde.transpose() -
        sigma * btb * sigma + cm.d_tilde;
    const Matrix4d delta = lyapunov_linear_solve(closed, res);
    const Matrix4d candidate = symmetrized(sigma + delta);
    const double cand_res = riccati_residual(cm, btb, candidate);
    if (!std::isfinite(cand_res)) break;
    if (cand_res >= residual && residual <= consts::tol_steady * scale) break;
    sigma = candidate;
    residual = cand_res;
  }

  if (!(residual <= consts::tol_steady * scale))
    throw NumericalError("solve_riccati: residual above tolerance");
  const auto closed_verdict = stability::is_hurwitz(cm.a_tilde - sigma * btb);
  if (closed_verdict.spectral_abscissa > consts::eps_stab)
    throw NumericalError("solve_riccati: solution is not stabilizing");

  SteadyState out;
  out.sigma = sigma;
  out.residual = residual;
  out.iterations_or_time = t_ode;
  return out;
}

namespace {

void guard_finite(const Matrix4d& sigma, double dt) {
  if (!sigma.allFinite() || sigma.norm() > 1e12) {
    std::ostringstream os;
    os << "moment integration became unstable; retry with a smaller dt than "
       << dt;
    throw NumericalError(os.str());
  }
}

}  // namespace

TrajectoryRecord integrate_moments(const GaussianState& initial,
                                   const SystemParams& params,
                                   const std::optional<MeasurementParams>& meas,
                                   double t_final, double dt) {
  if (!(dt > 0.0) || !(t_final >= dt))
    throw DomainError("integrate_moments: need dt > 0 and t_final >= dt");
  const auto n_steps = static_cast<std::size_t>(std::llround(t_final / dt));

  TrajectoryRecord rec;
  rec.times.reserve(n_steps + 1);
  rec.sigma_path.reserve(n_steps + 1);

  Matrix4d sigma = symmetrized(initial.cov);
  Vector4d mean = initial.mean;
  const bool monitored = meas.has_value();

  Matrix4d a, drift_const;  // sigma' = a s + s a^T + drift_const (- s btb s)
  Matrix4d btb = Matrix4d::Zero();
  if (monitored) {
    const auto cm = matrices::build_conditional(params, *meas);
    a = cm.a_tilde;
    drift_const = cm.d_tilde;
    btb = cm.b.transpose() * cm.b;
  } else {
    const auto un = matrices::build_unconditional(params);
    a = un.a;
    drift_const = un.d;
  }
  const Matrix4d a_mean =
      matrices::build_unconditional(params).a;  // dR = A R dt, unmonitored

  rec.times.push_back(0.0);
  rec.sigma_path.push_back(sigma);
  if (!monitored) rec.means.push_back(mean);

  for (std::size_t k = 1; k <= n_steps; ++k) {
    const Matrix4d as = a * sigma;
    Matrix4d ds = as + as.transpose() + drift_const;
    if (monitored) ds -= sigma * btb * sigma;
    sigma = symmetrized(sigma + dt * ds);
    if ((k & 63u) == 0 || k == n_steps) guard_finite(sigma, dt);
    rec.times.push_back(static_cast<double>(k) * dt);
    rec.sigma_path.push_back(sigma);
    if (!monitored) {
      mean = mean + dt * (a_mean * mean);
      rec.means.push_back(mean);
    }
  }
  return rec;
}

FeedbackGain feedback_gain(const Matrix4d& sigma_ss,
                           const ConditionalMatrices& cm) {
  const Matrix4d omega = SymplecticForm::matrix();
  const Matrix4d gain =
      (sigma_ss * cm.b.transpose() - cm.n) / std::numbers::sqrt2;
  FeedbackGain fb;
  // Omega * f_map = -gain exactly (Omega products only permute and negate),
  // so the noise term of the closed-loop mean equation vanishes bit-exactly.
  fb.f_map = omega * gain;
  fb.closed_loop = cm.a_tilde - sigma_ss * cm.b.transpose() * cm.b;
  fb.closed_loop_verdict = stability::is_hurwitz(fb.closed_loop);
  return fb;
}

namespace {

struct TrajectoryWorkspace {
  Matrix4d a;                      // unconditional drift
  std::vector<Matrix4d> kicks;     // per-step noise gain G(t)
  Matrix4d fb_term;                // Omega F * sqrt(2) B (feedback drift part)
  Matrix4d fb_noise;               // Omega F (feedback noise part)
  bool feedback = false;
  std::size_t n_steps = 0;
  double dt = 0.0;
};

TrajectoryWorkspace prepare_trajectory(const GaussianState& initial,
                                       const SystemParams& params,
                                       const MeasurementParams& meas,
                                       double t_final, double dt,
                                       bool feedback) {
  if (!(dt > 0.0) || !(t_final >= dt))
    throw DomainError("simulate_trajectory: need dt > 0 and t_final >= dt");
  TrajectoryWorkspace ws;
  ws.feedback = feedback;
  ws.dt = dt;
  ws.n_steps = static_cast<std::size_t>(std::llround(t_final / dt));
  ws.a = matrices::build_unconditional(params).a;
  const auto cm = matrices::build_conditional(params, meas);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

  if (feedback) {
    // Steady-regime feedback: sigma pinned at the filter fixed point.
    const auto ss = solve_riccati(cm);
    const auto fb = feedback_gain(ss.sigma, cm);
    ws.kicks.assign(1, (ss.sigma * cm.b.transpose() - cm.n) * inv_sqrt2);
    ws.fb_noise = SymplecticForm::matrix() * fb.f_map;
    ws.fb_term = ws.fb_noise * (std::numbers::sqrt2 * cm.b);
  } else {
    const auto path = integrate_moments(initial, params, meas, t_final, dt);
    ws.kicks.reserve(ws.n_steps);
    for (std::size_t k = 0; k < ws.n_steps; ++k)
      ws.kicks.push_back((path.sigma_path[k] * cm.b.transpose() - cm.n) *
                         inv_sqrt2);
  }
  return ws;
}

Vector4d run_one(const TrajectoryWorkspace& ws, const Vector4d& r0,
                 std::uint64_t seed, std::uint64_t index,
                 std::vector<Vector4d>* path) {
  rng::NormalStream noise(rng::stream(seed, index));
  const double sqrt_dt = std::sqrt(ws.dt);
  Vector4d r = r0;
  if (path) path->push_back(r);
  for (std::size_t k = 0; k < ws.n_steps; ++k) {
    Vector4d xi;
    for (int c = 0; c < 4; ++c) xi(c) = sqrt_dt * noise.next();
    const Matrix4d& gain = ws.feedback ? ws.kicks[0] : ws.kicks[k];
    Vector4d dr = ws.dt * (ws.a * r) + gain * xi;
    if (ws.feedback) {
      // Record-driven actuation; the xi parts cancel exactly.
      dr += ws.fb_term * (ws.dt * r) + ws.fb_noise * xi;
    }
    r += dr;
    if (path) path->push_back(r);
  }
  if (!r.allFinite())
    throw NumericalError("trajectory diverged; retry with a smaller dt");
  return r;
}

}  // namespace

TrajectoryRecord simulate_trajectory(const GaussianState& initial,
                                     const SystemParams& params,
                                     const MeasurementParams& meas,
                                     double t_final, double dt,
                                     std::uint64_t seed, bool feedback) {
  const auto ws =
      prepare_trajectory(initial, params, meas, t_final, dt, feedback);
  TrajectoryRecord rec;
  rec.noise_seed = seed;
  rec.feedback_enabled = feedback;
  rec.times.reserve(ws.n_steps + 1);
  for (std::size_t k = 0; k <= ws.n_steps; ++k)
    rec.times.push_back(static_cast<double>(k) * dt);
  rec.means.reserve(ws.n_steps + 1);
  run_one(ws, initial.mean, seed, 0, &rec.means);
  return rec;
}

namespace {

template <bool Parallel>
std::vector<Vector4d> ensemble_impl(const GaussianState& initial,
                                    const SystemParams& params,
                                    const MeasurementParams& meas,
                                    double t_final, double dt,
                                    std::uint64_t seed, std::size_t n,
                                    bool feedback) {
  const auto ws = prepare_trajectory(initial, params, meas, t_final, dt,
                                     feedback);
  std::vector<Vector4d> finals(n);
  const auto total = static_cast<std::ptrdiff_t>(n);
  bool diverged = false;
#pragma omp parallel for schedule(static) if (Parallel) shared(diverged)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    try {
      finals[static_cast<std::size_t>(i)] = run_one(
          ws, initial.mean, seed, static_cast<std::uint64_t>(i), nullptr);
    } catch (const NumericalError&) {
      diverged = true;  // exceptions must not cross the omp region
    }
  }
  if (diverged)
    throw NumericalError("ensemble trajectory diverged; reduce dt");
  return finals;
}

}  // namespace

std::vector<Vector4d> ensemble_final_means(const GaussianState& initial,
                                           const SystemParams& params,
                                           const MeasurementParams& meas,
                                           double t_final, double dt,
                                           std::uint64_t seed, std::size_t n,
                                           bool feedback) {
  return ensemble_impl<true>(initial, params, meas, t_final, dt, seed, n,
                             feedback);
}

std::vector<Vector4d> ensemble_final_means_serial(
    const GaussianState& initial, const SystemParams& params,
    const MeasurementParams& meas, double t_final, double dt,
    std::uint64_t seed, std::size_t n, bool feedback) {
  return ensemble_impl<false>(initial, params, meas, t_final, dt, seed, n,
                              feedback);
}

}  // namespace levisim::solvers
