#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace levisim {

using Eigen::Matrix2d;
using Eigen::Matrix4d;
using Eigen::Vector4d;
using Matrix4cd = Eigen::Matrix4cd;

namespace consts {
inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double c_light = 299792458.0;      // m/s
inline constexpr double eps_phys = 1e-9;            // slack on eigenvalues of sigma + i*Omega
inline constexpr double eps_stab = 1e-10;           // Hurwitz margin on Re(lambda)
inline constexpr double eps_det = 1e-8;             // PBH output-norm threshold
inline constexpr double tol_steady = 1e-10;         // steady-state residual, relative
}  // namespace consts

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Invalid parameter values (out-of-range efficiencies, negative rates, ...).
struct DomainError : Error {
  using Error::Error;
};
/// Precondition on the dynamics fails: non-Hurwitz drift, non-detectable pair.
struct StabilityError : Error {
  using Error::Error;
};
/// Solver breakdown: non-convergence, NaN/overflow, step-size instability.
struct NumericalError : Error {
  using Error::Error;
};
/// SI-only quantity requested without SI context, or unit systems mixed.
struct UnitError : Error {
  using Error::Error;
};

/// Unit system of a parameter set: pure numbers in multiples of a reference
/// mechanical frequency, or SI angular frequencies (rad/s).
enum class Units { dimensionless, si };

/// Dynamical rates (omega_m, delta, g, kappa, gamma), all in one unit system.
/// delta = omega_laser - omega_cavity may take either sign.
struct SystemParams {
  double omega_m = 1.0;
  double delta = 0.0;
  double g = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  Units units = Units::dimensionless;
};

/// Monitoring configuration: cavity homodyne efficiency eta1 with local
/// oscillator phase phi, and position-measurement efficiency eta2.
struct MeasurementParams {
  double eta1 = 0.0;
  double eta2 = 0.0;
  double phi = 0.0;  // radians, reduced into [0, pi)
};

/// Quadrature ordering is (x_c, p_c, x_m, p_m) throughout.
/// Covariance convention: sigma_jk = <{r_j, r_k}> - 2 R_j R_k, vacuum = I.
struct GaussianState {
  Vector4d mean = Vector4d::Zero();
  Matrix4d cov = Matrix4d::Identity();
};

/// Reduced mechanical state and its figures of merit.
struct MechanicalSummary {
  Matrix2d sigma_m;
  double n_ph;     // (tr - 2)/4, zero-mean states
  double purity;   // 1/sqrt(det)
  double xi;       // min eigenvalue
  double xi_db;    // 10*log10(xi)
  std::optional<double> delta_x;  // metres, SI context only
};

/// Block-diagonal symplectic form, [[0,1],[-1,0]] per mode.
struct SymplecticForm {
  static Matrix4d matrix();
};

/// Exact symmetrization: mirror the upper triangle into the lower one.
Matrix4d symmetrized(const Matrix4d& m);

/// Smallest eigenvalue of sigma + i*Omega. Physical states have >= 0
/// up to numerical slack (vacuum convention: sigma = I is exactly on 0).
double physicality_deficit(const Matrix4d& sigma);
bool is_physical(const Matrix4d& sigma, double tol = consts::eps_phys);

GaussianState vacuum_state();

/// R = 0, sigma = diag(2 n_c + 1, 2 n_c + 1, 2 n_m + 1, 2 n_m + 1).
GaussianState thermal_state(double n_cavity, double n_mech);

/// Checks all parameter invariants; normalizes phi into [0, pi).
/// Throws DomainError with a description of the offending field.
std::pair<SystemParams, MeasurementParams> validate(SystemParams params,
                                                    MeasurementParams meas);

/// Rescales all rates by 1/scale (dimensionless working copies of SI params).
SystemParams params_in_units_of(const SystemParams& params, double scale);

}  // namespace levisim
