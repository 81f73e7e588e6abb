#pragma once

#include "levisim/types.hpp"

namespace levisim::matrices {

/// Drift and diffusion of the unmonitored moment equations
///   dR/dt = A R,   dsigma/dt = A sigma + sigma A^T + D.
struct UnconditionalMatrices {
  Matrix4d a;
  Matrix4d d;
};

/// Matrices of the monitored (conditional) moment equations
///   dsigma/dt = At sigma + sigma At^T - sigma B^T B sigma + Dt,
/// with At = A + N B and Dt = D - N N^T. B rows are output channels:
/// rows 1-2 the homodyne quadrature split, row 4 the position channel.
struct ConditionalMatrices {
  Matrix4d a_tilde;
  Matrix4d d_tilde;
  Matrix4d b;
  Matrix4d n;
};

UnconditionalMatrices build_unconditional(const SystemParams& params);

ConditionalMatrices build_conditional(const SystemParams& params,
                                      const MeasurementParams& meas);

}  // namespace levisim::matrices
