#include "levisim/types.hpp"

#include <cmath>
#include <sstream>

namespace levisim {

Matrix4d SymplecticForm::matrix() {
  Matrix4d omega = Matrix4d::Zero();
  omega(0, 1) = 1.0;
  omega(1, 0) = -1.0;
  omega(2, 3) = 1.0;
  omega(3, 2) = -1.0;
  return omega;
}

Matrix4d symmetrized(const Matrix4d& m) {
  Matrix4d s = m;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  return s;
}

double physicality_deficit(const Matrix4d& sigma) {
  const std::complex<double> iu(0.0, 1.0);
  Matrix4cd h = sigma.cast<std::complex<double>>() + iu * SymplecticForm::matrix().cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("physicality eigensolver failed");
  return es.eigenvalues().minCoeff();
}

bool is_physical(const Matrix4d& sigma, double tol) {
  return physicality_deficit(sigma) >= -tol;
}

GaussianState vacuum_state() { return GaussianState{}; }

GaussianState thermal_state(double n_cavity, double n_mech) {
  if (!(n_cavity >= 0.0) || !(n_mech >= 0.0))
    throw DomainError("thermal_state: occupations must be >= 0");
  GaussianState st;
  const double c = 2.0 * n_cavity + 1.0;
  const double m = 2.0 * n_mech + 1.0;
  st.cov = Eigen::Vector4d(c, c, m, m).asDiagonal();
  return st;
}

namespace {

[[noreturn]] void fail(const std::string& field, double value, const std::string& rule) {
  std::ostringstream os;
  os << "invalid " << field << " = " << value << " (" << rule << ")";
  throw DomainError(os.str());
}

}  // namespace

std::pair<SystemParams, MeasurementParams> validate(SystemParams params,
                                                    MeasurementParams meas) {
  const double pi = std::acos(-1.0);
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(params.omega_m) || !(params.omega_m > 0.0))
    fail("omega_m", params.omega_m, "must be finite and > 0");
  if (!finite(params.delta)) fail("delta", params.delta, "must be finite");
  if (!finite(params.g) || params.g < 0.0) fail("g", params.g, "must be >= 0");
  if (!finite(params.kappa) || params.kappa < 0.0)
    fail("kappa", params.kappa, "must be >= 0");
  if (!finite(params.gamma) || params.gamma < 0.0)
    fail("gamma", params.gamma, "must be >= 0");
  if (!finite(meas.eta1) || meas.eta1 < 0.0 || meas.eta1 > 1.0)
    fail("eta1", meas.eta1, "efficiency must lie in [0, 1]");
  if (!finite(meas.eta2) || meas.eta2 < 0.0 || meas.eta2 > 1.0)
    fail("eta2", meas.eta2, "efficiency must lie in [0, 1]");
  if (!finite(meas.phi)) fail("phi", meas.phi, "must be finite");
  // The monitored quadrature is pi-periodic up to sign.
  meas.phi = std::fmod(meas.phi, pi);
  if (meas.phi < 0.0) meas.phi += pi;
  return {params, meas};
}

SystemParams params_in_units_of(const SystemParams& params, double scale) {
  if (!(scale > 0.0)) throw DomainError("unit scale must be > 0");
  SystemParams out = params;
  out.omega_m = params.omega_m / scale;
  out.delta = params.delta / scale;
  out.g = params.g / scale;
  out.kappa = params.kappa / scale;
  out.gamma = params.gamma / scale;
  out.units = Units::dimensionless;
  return out;
}

}  // namespace levisim
