#pragma once

#include "levisim/types.hpp"

namespace levisim::merit {

/// Mechanical 2x2 block of a 4-mode covariance (rows/cols 3-4).
Matrix2d reduce_mechanical(const Matrix4d& sigma);

/// (tr - 2)/4. Exact for zero first moments, a lower bound otherwise.
double phonon_number(const Matrix2d& sigma_m);

/// 1/sqrt(det). Throws DomainError for det <= 0.
double purity(const Matrix2d& sigma_m);

struct Squeezing {
  double xi;     // smaller eigenvalue; < 1 means sub-vacuum fluctuations
  double xi_db;  // 10*log10(xi)
};

/// Closed-form 2x2 eigenvalues (trace/determinant), no iterative solver.
Squeezing squeezing(const Matrix2d& sigma_m);

struct PositionUncertainty {
  double delta_x;           // sqrt(hbar * (sigma_33/2) / (m omega_m)), metres
  double vacuum_threshold;  // the same at sigma_33 = 1
};

PositionUncertainty position_uncertainty(const Matrix2d& sigma_m, double mass,
                                         double omega_m,
                                         double hbar = consts::hbar);

MechanicalSummary summarize(const Matrix4d& sigma);

/// SI variant: also fills delta_x from (mass, omega_m).
MechanicalSummary summarize(const Matrix4d& sigma, double mass,
                            double omega_m);

}  // namespace levisim::merit
