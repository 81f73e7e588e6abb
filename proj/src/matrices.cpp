#include "levisim/matrices.hpp"

#include <cmath>

namespace levisim::matrices {

UnconditionalMatrices build_unconditional(const SystemParams& params) {
  const double om = params.omega_m;
  const double dl = params.delta;
  const double g = params.g;
  const double kap = params.kappa;

  UnconditionalMatrices m;
  m.a << -kap / 2.0, -dl, 0.0, 0.0,
         dl, -kap / 2.0, -2.0 * g, 0.0,
         0.0, 0.0, 0.0, om,
         -2.0 * g, 0.0, -om, 0.0;
  m.d = Eigen::Vector4d(kap, kap, 0.0, 4.0 * params.gamma).asDiagonal();
  return m;
}

ConditionalMatrices build_conditional(const SystemParams& params,
                                      const MeasurementParams& meas) {
  const auto un = build_unconditional(params);
  const double s1 = std::sqrt(meas.eta1 * params.kappa);
  const double c = std::cos(meas.phi);
  const double s = std::sin(meas.phi);

  ConditionalMatrices cm;
  cm.b = Matrix4d::Zero();
  cm.b(0, 0) = s1 * c * c;
  cm.b(0, 1) = -s1 * s * c;
  cm.b(1, 0) = -s1 * s * c;
  cm.b(1, 1) = s1 * s * s;
  cm.b(3, 2) = std::sqrt(4.0 * meas.eta2 * params.gamma);

  cm.n = cm.b;
  cm.n(3, 2) = 0.0;  // the position channel carries no cross-correlation

  cm.a_tilde = un.a + cm.n * cm.b;
  cm.d_tilde = symmetrized(un.d - cm.n * cm.n.transpose());
  return cm;
}

}  // namespace levisim::matrices
