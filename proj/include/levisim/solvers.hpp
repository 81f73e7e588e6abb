#pragma once

#include "levisim/matrices.hpp"
#include "levisim/stability.hpp"
#include "levisim/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace levisim::solvers {

struct SteadyState {
  Matrix4d sigma;
  double residual;            // Frobenius norm of the defining equation's LHS
  double iterations_or_time;  // integration time (ODE route) or 0 (direct)
};

/// Steady covariance of dsigma/dt = A sigma + sigma A^T + D = 0, via a
/// 16x16 Kronecker linear solve. Requires Hurwitz A.
SteadyState solve_lyapunov(const Matrix4d& a, const Matrix4d& d);

/// Stabilizing solution of
///   At sigma + sigma At^T - sigma B^T B sigma + Dt = 0.
/// Method: adaptive integration of the matrix ODE from sigma = I until the
/// flow stalls, then Newton polish (closed-loop Lyapunov solves) to
/// residual <= 1e-12 * ||Dt||. Requires detectability of (B, At).
SteadyState solve_riccati(const matrices::ConditionalMatrices& cm);

struct TrajectoryRecord {
  std::vector<double> times;            // fixed step dt, starting at 0
  std::vector<Vector4d> means;          // empty for monitored integrate_moments
  std::vector<Matrix4d> sigma_path;     // may be empty for large ensembles
  std::uint64_t noise_seed = 0;
  bool feedback_enabled = false;
};

/// Deterministic moment path with fixed-step explicit Euler. Unmonitored
/// (meas absent): both R(t) and sigma(t). Monitored: sigma(t) only (the
/// first moments are then stochastic, see simulate_trajectory).
TrajectoryRecord integrate_moments(const GaussianState& initial,
                                   const SystemParams& params,
                                   const std::optional<MeasurementParams>& meas,
                                   double t_final, double dt);

/// Euler-Maruyama sample path of the conditional first moments
///   dR = A R dt + G dxi,  G = (sigma(t) B^T - N)/sqrt(2),
/// with dxi ~ N(0, I dt) over the four noise channels and sigma(t) the
/// deterministic Euler path. With feedback on, sigma is held at the
/// steady solution and the record-driven term cancels G dxi exactly,
/// leaving the Hurwitz closed-loop drift.
TrajectoryRecord simulate_trajectory(const GaussianState& initial,
                                     const SystemParams& params,
                                     const MeasurementParams& meas,
                                     double t_final, double dt,
                                     std::uint64_t seed, bool feedback);

struct FeedbackGain {
  Matrix4d f_map;          // photocurrent -> linear-Hamiltonian coefficients
  Matrix4d closed_loop;    // first-moment drift with feedback applied
  stability::StabilityVerdict closed_loop_verdict;  // non-Hurwitz = warning
};

/// Gain F with Omega F = -G = (N - sigma_ss B^T)/sqrt(2): feedback
/// f(t) dt = F dy, dy = sqrt(2) B R dt + dxi, cancels the stochastic term
/// of the first-moment equation identically. The closed loop equals the
/// filter matrix At - sigma_ss B^T B.
FeedbackGain feedback_gain(const Matrix4d& sigma_ss,
                           const matrices::ConditionalMatrices& cm);

/// Final first-moment vectors of an ensemble of independent trajectories.
/// Per-trajectory noise streams are derived from (seed, index), so the
/// result does not depend on scheduling. OpenMP over trajectories.
std::vector<Vector4d> ensemble_final_means(const GaussianState& initial,
                                           const SystemParams& params,
                                           const MeasurementParams& meas,
                                           double t_final, double dt,
                                           std::uint64_t seed,
                                           std::size_t n_trajectories,
                                           bool feedback);

/// Serial reference for the ensemble kernel; bit-identical results.
std::vector<Vector4d> ensemble_final_means_serial(
    const GaussianState& initial, const SystemParams& params,
    const MeasurementParams& meas, double t_final, double dt,
    std::uint64_t seed, std::size_t n_trajectories, bool feedback);

}  // namespace levisim::solvers
