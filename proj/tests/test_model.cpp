#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "levisim/merit.hpp"
#include "levisim/types.hpp"

#include <cmath>
#include <random>

using namespace levisim;

TEST_CASE("symplectic form squares to minus identity") {
  const Matrix4d omega = SymplecticForm::matrix();
  CHECK((omega * omega + Matrix4d::Identity()).norm() == 0.0);
  CHECK((omega.transpose() + omega).norm() == 0.0);
}

TEST_CASE("vacuum state") {
  const auto v = vacuum_state();
  CHECK(v.mean.norm() == 0.0);
  CHECK((v.cov - Matrix4d::Identity()).norm() == 0.0);
  CHECK(merit::phonon_number(merit::reduce_mechanical(v.cov)) == 0.0);
  CHECK(merit::purity(merit::reduce_mechanical(v.cov)) == doctest::Approx(1.0));
  CHECK(is_physical(v.cov));
}

TEST_CASE("thermal states") {
  CHECK((thermal_state(0, 0).cov - Matrix4d::Identity()).norm() == 0.0);

  const auto t01 = thermal_state(0, 1);
  CHECK(t01.cov(2, 2) == 3.0);
  CHECK(t01.cov(3, 3) == 3.0);
  CHECK(merit::phonon_number(merit::reduce_mechanical(t01.cov)) ==
        doctest::Approx(1.0));

  const auto t20 = thermal_state(2, 0);
  CHECK(t20.cov(0, 0) == 5.0);
  CHECK(t20.cov(1, 1) == 5.0);
  CHECK(is_physical(t20.cov));

  CHECK_THROWS_AS(thermal_state(-0.1, 0), DomainError);
  CHECK_THROWS_AS(thermal_state(0, -1), DomainError);
}

TEST_CASE("thermal then phonon_number is the identity on the occupation") {
  for (double n : {0.0, 0.3, 1.0, 7.5, 123.0}) {
    const auto st = thermal_state(0.4, n);
    CHECK(merit::phonon_number(merit::reduce_mechanical(st.cov)) ==
          doctest::Approx(n).epsilon(1e-14));
  }
}

TEST_CASE("validate accepts the reference parameter set") {
  SystemParams p{1.0, -2.0, 1.0, 2.0, 0.1, Units::dimensionless};
  MeasurementParams m{1.0, 0.0, 0.0};
  CHECK_NOTHROW(validate(p, m));
}

TEST_CASE("validate rejects out-of-range inputs") {
  SystemParams p{1.0, -2.0, 1.0, 2.0, 0.1, Units::dimensionless};
  MeasurementParams m;

  m.eta1 = 1.2;
  CHECK_THROWS_AS(validate(p, m), DomainError);
  m.eta1 = 0.0;
  m.eta2 = -0.1;
  CHECK_THROWS_AS(validate(p, m), DomainError);
  m = MeasurementParams{};

  SystemParams bad = p;
  bad.omega_m = 0.0;
  CHECK_THROWS_AS(validate(bad, m), DomainError);
  bad = p;
  bad.g = -0.5;
  CHECK_THROWS_AS(validate(bad, m), DomainError);
  bad = p;
  bad.kappa = std::nan("");
  CHECK_THROWS_AS(validate(bad, m), DomainError);
}

TEST_CASE("validate reduces phi modulo pi") {
  const double pi = std::acos(-1.0);
  SystemParams p{1.0, -2.0, 1.0, 2.0, 0.1, Units::dimensionless};
  MeasurementParams m;

  m.phi = 1.5 * pi;
  auto [vp, vm] = validate(p, m);
  CHECK(vm.phi == doctest::Approx(0.5 * pi).epsilon(1e-14));

  m.phi = -0.25 * pi;
  std::tie(vp, vm) = validate(p, m);
  CHECK(vm.phi == doctest::Approx(0.75 * pi).epsilon(1e-14));
  CHECK(vm.phi >= 0.0);
  CHECK(vm.phi < pi);
}

TEST_CASE("physicality flags sub-Heisenberg covariances") {
  Matrix4d bad = Matrix4d::Identity();
  bad(0, 0) = 0.1;
  bad(1, 1) = 0.1;  // both quadratures below vacuum: impossible
  CHECK_FALSE(is_physical(bad));
  CHECK(physicality_deficit(Matrix4d::Identity()) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // squeezed vacuum stays physical for any squeezing strength
  for (double r : {0.5, 1.0, 2.0}) {
    Matrix4d sq = Matrix4d::Identity();
    sq(2, 2) = std::exp(-2 * r);
    sq(3, 3) = std::exp(2 * r);
    CHECK(is_physical(sq));
  }
}

TEST_CASE("unit rescaling round-trips") {
  SystemParams p{2.0731e5, -4.1e5, 1.2e5, 3.6e5, 3.1e4, Units::si};
  const double scale = 2.0731e5;
  const auto d = params_in_units_of(p, scale);
  CHECK(d.units == Units::dimensionless);
  CHECK(d.omega_m == doctest::Approx(1.0));
  CHECK(std::abs(d.delta * scale - p.delta) <= 2e-16 * std::abs(p.delta));
  CHECK(std::abs(d.g * scale - p.g) <= 2e-16 * std::abs(p.g));
  CHECK(std::abs(d.kappa * scale - p.kappa) <= 2e-16 * std::abs(p.kappa));
  CHECK(std::abs(d.gamma * scale - p.gamma) <= 2e-16 * std::abs(p.gamma));
  CHECK_THROWS_AS(params_in_units_of(p, 0.0), DomainError);
}
