#pragma once

#include "levisim/types.hpp"

#include <vector>

namespace levisim::stability {

struct StabilityVerdict {
  bool is_stable;
  double spectral_abscissa;                       // max_j Re(lambda_j)
  std::array<std::complex<double>, 4> eigenvalues;  // sorted by Re, descending
};

/// Hurwitz test on a real 4x4 drift matrix. Marginal spectra
/// (|Re lambda| <= eps_stab) count as not stable.
StabilityVerdict is_hurwitz(const Matrix4d& a);

/// PBH detectability: every eigenvector of a_tilde with Re(lambda) >= -eps_stab
/// must have a nonzero image under b. Falls back to a stacked-rank SVD test
/// when the eigenvector basis is ill-conditioned.
bool is_detectable(const Matrix4d& b, const Matrix4d& a_tilde);

struct StabilityMap {
  std::vector<double> delta_grid;
  std::vector<double> g_grid;
  std::vector<uint8_t> stable;  // row-major: [g_index * delta_count + delta_index]

  bool at(std::size_t g_index, std::size_t delta_index) const {
    return stable[g_index * delta_grid.size() + delta_index] != 0;
  }
};

StabilityMap stability_map(const std::vector<double>& delta_grid,
                           const std::vector<double>& g_grid, double kappa,
                           double gamma, double omega_m);

/// Serial reference for the OpenMP kernel above; results are bit-identical.
StabilityMap stability_map_serial(const std::vector<double>& delta_grid,
                                  const std::vector<double>& g_grid,
                                  double kappa, double gamma, double omega_m);

}  // namespace levisim::stability
