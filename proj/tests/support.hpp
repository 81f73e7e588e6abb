#pragma once

// Shared test helpers. The moment-ODE reference integrator here is the
// independent oracle for the steady-state solvers: plain fixed-step RK4,
// no adaptivity, no Newton polish, written apart from the library path.

#include "levisim/matrices.hpp"
#include "levisim/stability.hpp"
#include "levisim/types.hpp"

#include <functional>
#include <random>

namespace testutil {

using levisim::Matrix4d;
using levisim::MeasurementParams;
using levisim::SystemParams;

using MatrixOde = std::function<Matrix4d(const Matrix4d&)>;

inline Matrix4d rk4_integrate(const MatrixOde& f, Matrix4d s, double t_final,
                              double h) {
  const auto n = static_cast<std::size_t>(t_final / h);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix4d k1 = f(s);
    const Matrix4d k2 = f(s + 0.5 * h * k1);
    const Matrix4d k3 = f(s + 0.5 * h * k2);
    const Matrix4d k4 = f(s + h * k3);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return s;
}

inline MatrixOde lyapunov_ode(const Matrix4d& a, const Matrix4d& d) {
  return [a, d](const Matrix4d& s) {
    return Matrix4d(a * s + s * a.transpose() + d);
  };
}

inline MatrixOde riccati_ode(const levisim::matrices::ConditionalMatrices& cm) {
  const Matrix4d btb = cm.b.transpose() * cm.b;
  return [cm, btb](const Matrix4d& s) {
    return Matrix4d(cm.a_tilde * s + s * cm.a_tilde.transpose() -
                    s * btb * s + cm.d_tilde);
  };
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline SystemParams draw_params(std::mt19937_64& rng) {
  SystemParams p;
  p.omega_m = 1.0;
  p.delta = uniform(rng, -6.0, 6.0);
  p.g = uniform(rng, 0.1, 2.0);
  p.kappa = uniform(rng, 0.5, 4.0);
  p.gamma = uniform(rng, 0.02, 0.5);
  return p;
}

/// Rejection-samples until the unmonitored drift is Hurwitz.
inline SystemParams draw_stable_params(std::mt19937_64& rng) {
  for (int tries = 0; tries < 10000; ++tries) {
    SystemParams p = draw_params(rng);
    p.delta = uniform(rng, -6.0, -0.05);
    const auto un = levisim::matrices::build_unconditional(p);
    if (levisim::stability::is_hurwitz(un.a).is_stable) return p;
  }
  throw std::runtime_error("draw_stable_params: rejection sampling failed");
}

inline MeasurementParams draw_meas(std::mt19937_64& rng, bool monitored) {
  MeasurementParams m;
  if (monitored) {
    // at least one channel solidly on
    if (uniform(rng, 0.0, 1.0) < 0.5) {
      m.eta1 = uniform(rng, 0.1, 1.0);
      m.eta2 = uniform(rng, 0.0, 1.0);
    } else {
      m.eta1 = uniform(rng, 0.0, 1.0);
      m.eta2 = uniform(rng, 0.1, 1.0);
    }
  }
  m.phi = uniform(rng, 0.0, 3.14159);
  return m;
}

}  // namespace testutil
