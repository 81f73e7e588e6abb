#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "levisim/experiment.hpp"

#include <cmath>
#include <numbers>

using namespace levisim;
using namespace levisim::experiment;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kTargetOmegaM0 = kTwoPi * 33e3;

ExperimentConfig calibrated() {
  return calibrate(ExperimentConfig{}, kTargetOmegaM0);
}

}  // namespace

TEST_CASE("intrinsic cavity loss from finesse and length") {
  ExperimentConfig c;
  CHECK(intrinsic_loss(c) / kTwoPi == doctest::Approx(28826.1979).epsilon(1e-6));

  ExperimentConfig longer = c;
  longer.cavity_length *= 2.0;
  CHECK(intrinsic_loss(longer) ==
        doctest::Approx(intrinsic_loss(c) / 2.0).epsilon(1e-12));

  ExperimentConfig sharp = c;
  sharp.finesse = 1e12;
  CHECK(intrinsic_loss(sharp) < 1e-5 * intrinsic_loss(c));

  // default total loss doubles the mirror loss
  CHECK(total_loss(c) == doctest::Approx(2.0 * intrinsic_loss(c)));
}

TEST_CASE("photon number: Lorentzian profile and monotone decay in |delta|") {
  const auto c = calibrated();
  const double kappa = total_loss(c);
  const double omega_c = cavity_frequency(c);
  const double n0 = photon_number(c, 0.0);

  for (double x : {0.5, 1.0, 3.0, 6.0}) {
    const double delta = x * kTargetOmegaM0;
    const double lorentz =
        (kappa * kappa / 4.0) / (kappa * kappa / 4.0 + delta * delta);
    const double expected = n0 * lorentz * omega_c / (omega_c + delta);
    CHECK(photon_number(c, delta) == doctest::Approx(expected).epsilon(1e-12));
  }

  double prev = n0;
  for (double x = 0.25; x <= 6.0; x += 0.25) {
    const double np = photon_number(c, x * kTargetOmegaM0);
    const double nm = photon_number(c, -x * kTargetOmegaM0);
    CHECK(np < prev);
    CHECK(nm < prev);
    prev = std::max(np, nm);
  }
}

TEST_CASE("photon number requires calibration") {
  ExperimentConfig c;
  CHECK_THROWS_AS(photon_number(c, 0.0), DomainError);
}

TEST_CASE("coupling constants: quartic-root scaling in the photon number") {
  const auto c = calibrated();
  const double n_c = photon_number(c, 0.0);
  const auto [w1, g1] = coupling_constants(c, n_c);
  const auto [w16, g16] = coupling_constants(c, 16.0 * n_c);
  CHECK(w16 == doctest::Approx(4.0 * w1).epsilon(1e-12));
  CHECK(g16 == doctest::Approx(2.0 * g1).epsilon(1e-12));

  CHECK_THROWS_AS(coupling_constants(c, 0.0), DomainError);

  // vanishing polarizability kills both rates
  ExperimentConfig weak = c;
  weak.epsilon_r = 1.0 + 1e-9;
  const auto [ww, gw] = coupling_constants(weak, n_c);
  CHECK(ww < 1e-4 * w1);
  CHECK(gw < 1e-4 * g1);
}

TEST_CASE("calibration hits the target trap frequency and the quoted coupling") {
  const auto c = calibrated();
  const auto [w0, g0] = coupling_constants(c, photon_number(c, 0.0));
  CHECK(std::abs(w0 - kTargetOmegaM0) <= 1e-9 * kTargetOmegaM0);

  // with the silica static dielectric constant the zero-detuning coupling
  // lands on ~19.76 kHz
  CHECK(g0 / kTwoPi == doctest::Approx(19764.1).epsilon(2e-4));
  CHECK(g0 / kTwoPi > 18e3);
  CHECK(g0 / kTwoPi < 22e3);

  // doubling the target quadruples the required photon number
  const auto c2 = calibrate(ExperimentConfig{}, 2.0 * kTargetOmegaM0);
  CHECK(photon_number(c2, 0.0) ==
        doctest::Approx(4.0 * photon_number(c, 0.0)).epsilon(1e-10));

  CHECK_THROWS_AS(calibrate(ExperimentConfig{}, -5.0), DomainError);
}

TEST_CASE("operating point: fixed gamma ratio, SI units, lossless rescale") {
  const auto c = calibrated();
  double prev_wm = 1e300;
  for (double x : {0.0, 0.5, 1.5, 3.0, 6.0}) {
    const auto op = operating_point(c, -x * kTargetOmegaM0);
    CHECK(op.params.units == Units::si);
    CHECK(op.params.gamma / op.params.omega_m ==
          doctest::Approx(0.15).epsilon(1e-14));
    CHECK(op.params.omega_m < prev_wm);  // trap softens away from resonance
    prev_wm = op.params.omega_m;

    const auto dimless = params_in_units_of(op.params, kTargetOmegaM0);
    CHECK(std::abs(dimless.g * kTargetOmegaM0 - op.params.g) <=
          2e-16 * op.params.g);
    CHECK(std::abs(dimless.delta * kTargetOmegaM0 - op.params.delta) <=
          2e-16 * std::abs(op.params.delta) + 1e-300);
  }
}

TEST_CASE("g^4 / omega_m^2 is detuning-independent") {
  const auto c = calibrated();
  const double a_rate = polarizability_rate(c);
  for (double x : {-6.0, -2.5, 0.0, 1.0, 4.0}) {
    const auto op = operating_point(c, x * kTargetOmegaM0);
    const double ratio =
        std::pow(op.params.g, 4) / std::pow(op.params.omega_m, 2);
    CHECK(ratio == doctest::Approx(a_rate * a_rate / 16.0).epsilon(1e-10));
  }
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.finesse = 0.5;
  CHECK_THROWS_AS(check(c), DomainError);
  c = ExperimentConfig{};
  c.epsilon_r = 0.9;
  CHECK_THROWS_AS(check(c), DomainError);
  c = ExperimentConfig{};
  c.mass = -1.0;
  CHECK_THROWS_AS(check(c), DomainError);
}
