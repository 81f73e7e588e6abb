#include "levisim/merit.hpp"

#include <cmath>

namespace levisim::merit {

Matrix2d reduce_mechanical(const Matrix4d& sigma) {
  return sigma.bottomRightCorner<2, 2>();
}

double phonon_number(const Matrix2d& sigma_m) {
  return (sigma_m(0, 0) + sigma_m(1, 1) - 2.0) / 4.0;
}

double purity(const Matrix2d& sigma_m) {
  const double det = sigma_m.determinant();
  if (!(det > 0.0))
    throw DomainError("purity: non-positive determinant (unphysical input)");
  return 1.0 / std::sqrt(det);
}

Squeezing squeezing(const Matrix2d& sigma_m) {
  const double mean = 0.5 * (sigma_m(0, 0) + sigma_m(1, 1));
  const double half_gap = 0.5 * (sigma_m(0, 0) - sigma_m(1, 1));
  const double off = 0.5 * (sigma_m(0, 1) + sigma_m(1, 0));
  const double radius = std::hypot(half_gap, off);
  Squeezing out;
  out.xi = mean - radius;
  out.xi_db = 10.0 * std::log10(out.xi);
  return out;
}

PositionUncertainty position_uncertainty(const Matrix2d& sigma_m, double mass,
                                         double omega_m, double hbar) {
  if (!(mass > 0.0) || !(omega_m > 0.0) || !(hbar > 0.0))
    throw UnitError("position_uncertainty: needs positive SI mass/frequency");
  // sigma_33 = 2 * <dx_m^2> in the vacuum-normalized convention.
  const double dxm2 = sigma_m(0, 0) / 2.0;
  PositionUncertainty out;
  out.delta_x = std::sqrt(hbar * dxm2 / (mass * omega_m));
  out.vacuum_threshold = std::sqrt(hbar * 0.5 / (mass * omega_m));
  return out;
}

MechanicalSummary summarize(const Matrix4d& sigma) {
  MechanicalSummary s;
  s.sigma_m = reduce_mechanical(sigma);
  s.n_ph = phonon_number(s.sigma_m);
  s.purity = purity(s.sigma_m);
  const auto sq = squeezing(s.sigma_m);
  s.xi = sq.xi;
  s.xi_db = sq.xi_db;
  return s;
}

MechanicalSummary summarize(const Matrix4d& sigma, double mass,
                            double omega_m) {
  MechanicalSummary s = summarize(sigma);
  s.delta_x = position_uncertainty(s.sigma_m, mass, omega_m).delta_x;
  return s;
}

}  // namespace levisim::merit
