#include "levisim/stability.hpp"

#include "levisim/matrices.hpp"

#include <algorithm>
#include <complex>

namespace levisim::stability {

namespace {

using Eigen::Vector4cd;

std::array<std::complex<double>, 4> sorted_by_real(const Vector4cd& ev) {
  std::array<std::complex<double>, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = ev(i);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return out;
}

}  // namespace

StabilityVerdict is_hurwitz(const Matrix4d& a) {
  if (!a.allFinite()) throw NumericalError("is_hurwitz: non-finite drift matrix");
  Eigen::EigenSolver<Matrix4d> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NumericalError("is_hurwitz: eigensolver did not converge");
  StabilityVerdict v;
  v.eigenvalues = sorted_by_real(es.eigenvalues());
  v.spectral_abscissa = v.eigenvalues[0].real();
  v.is_stable = v.spectral_abscissa < -consts::eps_stab;
  return v;
}

bool is_detectable(const Matrix4d& b, const Matrix4d& a_tilde) {
  if (!b.allFinite() || !a_tilde.allFinite())
    throw NumericalError("is_detectable: non-finite input");
  Eigen::EigenSolver<Matrix4d> es(a_tilde, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success)
    throw NumericalError("is_detectable: eigensolver did not converge");

  const auto values = es.eigenvalues();
  const auto vectors = es.eigenvectors();

  // Eigenvector conditioning; near-defective matrices go to the rank test.
  Eigen::JacobiSVD<Matrix4cd> vsvd(vectors);
  const double cond = vsvd.singularValues()(0) /
                      std::max(vsvd.singularValues()(3), 1e-300);
  const bool defective = !(cond < 1e10);

  const double bnorm = std::max(b.norm(), 1.0);
  for (int i = 0; i < 4; ++i) {
    const std::complex<double> lambda = values(i);
    if (lambda.real() < -consts::eps_stab) continue;
    if (!defective) {
      const Vector4cd x = vectors.col(i);
      if ((b.cast<std::complex<double>>() * x).norm() <=
          consts::eps_det * x.norm())
        return false;
    } else {
      // Stacked PBH rank test: [a_tilde - lambda I; b] must have full
      // column rank for every non-decaying eigenvalue.
      Eigen::Matrix<std::complex<double>, 8, 4> stacked;
      stacked.topRows<4>() =
          a_tilde.cast<std::complex<double>>() -
          lambda * Matrix4cd::Identity();
      stacked.bottomRows<4>() = b.cast<std::complex<double>>();
      Eigen::JacobiSVD<Eigen::Matrix<std::complex<double>, 8, 4>> svd(stacked);
      const double smax = svd.singularValues()(0);
      const double smin = svd.singularValues()(3);
      if (smin <= consts::eps_det * std::max(smax, bnorm)) return false;
    }
  }
  return true;
}

namespace {

template <bool Parallel>
StabilityMap map_impl(const std::vector<double>& delta_grid,
                      const std::vector<double>& g_grid, double kappa,
                      double gamma, double omega_m) {
  if (delta_grid.empty() || g_grid.empty())
    throw DomainError("stability_map: empty grid");
  StabilityMap map;
  map.delta_grid = delta_grid;
  map.g_grid = g_grid;
  map.stable.assign(delta_grid.size() * g_grid.size(), 0);
  const std::ptrdiff_t total =
      static_cast<std::ptrdiff_t>(map.stable.size());

#pragma omp parallel for schedule(static) if (Parallel)
  for (std::ptrdiff_t cell = 0; cell < total; ++cell) {
    const std::size_t gi = static_cast<std::size_t>(cell) / delta_grid.size();
    const std::size_t di = static_cast<std::size_t>(cell) % delta_grid.size();
    SystemParams p;
    p.omega_m = omega_m;
    p.delta = delta_grid[di];
    p.g = g_grid[gi];
    p.kappa = kappa;
    p.gamma = gamma;
    const auto un = matrices::build_unconditional(p);
    map.stable[static_cast<std::size_t>(cell)] =
        is_hurwitz(un.a).is_stable ? 1 : 0;
  }
  return map;
}

}  // namespace

StabilityMap stability_map(const std::vector<double>& delta_grid,
                           const std::vector<double>& g_grid, double kappa,
                           double gamma, double omega_m) {
  return map_impl<true>(delta_grid, g_grid, kappa, gamma, omega_m);
}

StabilityMap stability_map_serial(const std::vector<double>& delta_grid,
                                  const std::vector<double>& g_grid,
                                  double kappa, double gamma, double omega_m) {
  return map_impl<false>(delta_grid, g_grid, kappa, gamma, omega_m);
}

}  // namespace levisim::stability
