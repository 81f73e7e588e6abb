#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "levisim/matrices.hpp"
#include "levisim/merit.hpp"
#include "levisim/solvers.hpp"
#include "levisim/sweep.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace levisim;
using namespace levisim::sweep;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(lo + (hi - lo) * i / static_cast<double>(n - 1));
  return out;
}

SystemParams reference_system() { return {1.0, 0.0, 1.0, 2.0, 0.1}; }

}  // namespace

TEST_CASE("phase optimization: irrelevant without cavity monitoring") {
  MeasurementParams m{0.0, 0.5, 0.3};
  const auto p = optimize_phase({1.0, -1.0, 1.0, 2.0, 0.1}, m, Objective::n_ph);
  CHECK_FALSE(p.phase_relevant);
  CHECK(p.phi == 0.0);
  // and the reported value equals the phi-independent one
  const auto cm = matrices::build_conditional({1.0, -1.0, 1.0, 2.0, 0.1},
                                              {0.0, 0.5, 1.234});
  const auto ss = solvers::solve_riccati(cm);
  CHECK(p.objective_value ==
        doctest::Approx(merit::phonon_number(merit::reduce_mechanical(ss.sigma)))
            .epsilon(1e-10));
}

TEST_CASE("phase optimization beats random phases") {
  const SystemParams sys{1.0, -2.5, 1.0, 2.0, 0.1};
  const MeasurementParams tmpl{1.0, 0.0, 0.0};
  const auto best = optimize_phase(sys, tmpl, Objective::squeezing);
  CHECK(best.phase_relevant);

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, std::numbers::pi);
  for (int i = 0; i < 32; ++i) {
    MeasurementParams m = tmpl;
    m.phi = u(rng);
    const auto cm = matrices::build_conditional(sys, m);
    const auto ss = solvers::solve_riccati(cm);
    CHECK(best.objective_value <=
          merit::squeezing(merit::reduce_mechanical(ss.sigma)).xi + 1e-12);
  }

  // the optimum near delta = -2.5 is around -3.2 dB of squeezing
  CHECK(10.0 * std::log10(best.objective_value) ==
        doctest::Approx(-3.24).epsilon(0.05));
}

TEST_CASE("sweep spec validation") {
  SweepSpec spec;
  spec.system = reference_system();
  spec.efficiencies = {{0.0, 0.0}};
  CHECK_THROWS_AS(check_spec(spec), DomainError);  // empty grid

  spec.delta_grid = {0.0, -1.0};
  CHECK_THROWS_AS(check_spec(spec), DomainError);  // unsorted

  spec.delta_grid = {-1.0, 0.0};
  spec.scenario = Scenario::position_only;
  spec.efficiencies = {{0.5, 0.2}};
  CHECK_THROWS_AS(check_spec(spec), DomainError);  // eta1 > 0 in position-only

  spec.scenario = Scenario::cavity_homodyne;
  spec.efficiencies = {{0.5, 0.2}};
  CHECK_THROWS_AS(check_spec(spec), DomainError);  // eta2 > 0 in cavity-only

  spec.efficiencies = {{0.5, 0.0}};
  CHECK_NOTHROW(check_spec(spec));

  // SI-valued system parameters are never converted silently
  spec.system.units = Units::si;
  CHECK_THROWS_AS(check_spec(spec), UnitError);
}

TEST_CASE("unconditional sweep: missing markers outside the stable set") {
  SweepSpec spec;
  spec.system = reference_system();
  spec.scenario = Scenario::unconditional;
  spec.efficiencies = {{0.0, 0.0}};
  spec.delta_grid = {-6.0, -2.0, 0.0, 2.0};
  const auto rows = detuning_sweep(spec);
  REQUIRE(rows.size() == 4);

  CHECK(rows[0].stable);
  CHECK(rows[0].n_ph.has_value());
  CHECK(*rows[0].n_ph == doctest::Approx(7.872435897).epsilon(1e-8));
  CHECK_FALSE(rows[0].phi_opt.has_value());

  for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
    CHECK_FALSE(rows[k].stable);
    CHECK_FALSE(rows[k].n_ph.has_value());
    CHECK_FALSE(rows[k].purity.has_value());
    CHECK(rows[k].error.has_value());  // recorded per-row, sweep not aborted
  }
}

TEST_CASE("sweeps are pure: rerunning is bit-identical, parallel == serial") {
  SweepSpec spec;
  spec.system = reference_system();
  spec.scenario = Scenario::both;
  spec.efficiencies = {{1.0, 0.2}};
  spec.objective = Objective::squeezing;
  spec.delta_grid = grid(-4.0, 2.0, 9);

  const auto a = detuning_sweep(spec);
  const auto b = detuning_sweep(spec);
  const auto c = detuning_sweep_serial(spec);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (const auto* other : {&b[i], &c[i]}) {
      CHECK(a[i].phi_opt == other->phi_opt);
      CHECK(a[i].n_ph == other->n_ph);
      CHECK(a[i].purity == other->purity);
      CHECK(a[i].xi_db == other->xi_db);
    }
  }
}

TEST_CASE("position-monitoring curves improve monotonically with efficiency") {
  SweepSpec spec;
  spec.system = reference_system();
  spec.scenario = Scenario::position_only;
  spec.efficiencies = {{0.0, 0.2}, {0.0, 0.5}, {0.0, 0.8}, {0.0, 1.0}};
  spec.delta_grid = grid(-6.0, 6.0, 241);
  const auto rows = detuning_sweep(spec);
  const std::size_t n = spec.delta_grid.size();
  REQUIRE(rows.size() == 4 * n);
  for (std::size_t di = 0; di < n; ++di) {
    const double n02 = *rows[0 * n + di].n_ph;
    const double n05 = *rows[1 * n + di].n_ph;
    const double n08 = *rows[2 * n + di].n_ph;
    const double n10 = *rows[3 * n + di].n_ph;
    CHECK(n10 <= n05 + 1e-9);
    CHECK(n05 <= n02 + 1e-9);
    CHECK(n10 <= n08 + 1e-9);
    CHECK(n08 <= n05 + 1e-9);
  }
}

TEST_CASE("adding the cavity homodyne never hurts the phonon number") {
  // paired rows on the default detuning grid, eta2 shared, eta1: 0 vs 1
  const auto deltas = grid(-6.0, 6.0, 241);
  for (double eta2 : {0.5, 1.0}) {
    SweepSpec pos;
    pos.system = reference_system();
    pos.scenario = Scenario::position_only;
    pos.efficiencies = {{0.0, eta2}};
    pos.delta_grid = deltas;

    SweepSpec both;
    both.system = reference_system();
    both.scenario = Scenario::both;
    both.efficiencies = {{1.0, eta2}};
    both.objective = Objective::n_ph;
    both.delta_grid = deltas;

    const auto rp = detuning_sweep(pos);
    const auto rb = detuning_sweep(both);
    for (std::size_t i = 0; i < deltas.size(); ++i)
      CHECK(*rb[i].n_ph <= *rp[i].n_ph + 1e-9);
  }
}

TEST_CASE("decoupled curves: exact purity law and efficiency ordering") {
  const auto gammas = grid(0.02, 0.5, 25);
  const auto rows = decoupled_curves(gammas, {0.2, 0.5, 0.8, 1.0});
  REQUIRE(rows.size() == 4 * gammas.size());

  for (const auto& r : rows)
    CHECK(std::abs(r.purity - std::sqrt(r.eta2)) <= 1e-12);

  // n_ph decreases with eta2 at fixed gamma
  const std::size_t n = gammas.size();
  for (std::size_t gi = 0; gi < n; ++gi) {
    CHECK(rows[3 * n + gi].n_ph <= rows[2 * n + gi].n_ph);
    CHECK(rows[2 * n + gi].n_ph <= rows[1 * n + gi].n_ph);
    CHECK(rows[1 * n + gi].n_ph <= rows[0 * n + gi].n_ph);
  }
}

TEST_CASE("decoupled closed form agrees with the full 4x4 solver at g = 0") {
  for (double eta2 : {0.2, 0.7, 1.0})
    for (double s : {0.05, 0.1, 0.3}) {
      const Matrix2d analytic = decoupled_mechanical_steady(eta2, s);
      const auto cm = matrices::build_conditional({1.0, -0.7, 0.0, 2.0, s},
                                                  {0.0, eta2, 0.0});
      const auto ss = solvers::solve_riccati(cm);
      CHECK((merit::reduce_mechanical(ss.sigma) - analytic).norm() <= 1e-9);
    }
  CHECK_THROWS_AS(decoupled_mechanical_steady(0.0, 0.1), DomainError);
  CHECK_THROWS_AS(decoupled_mechanical_steady(0.5, 0.0), DomainError);
}

TEST_CASE("experiment-mode sweep carries SI observables") {
  auto cfg = experiment::calibrate(experiment::ExperimentConfig{},
                                   kTwoPi * 33e3);
  SweepSpec spec;
  spec.experiment_config = cfg;
  spec.scenario = Scenario::both;
  spec.efficiencies = {{0.5, 0.2}};
  spec.objective = Objective::n_ph;
  spec.delta_grid = {-2.0, 0.0, 1.0};
  const auto rows = detuning_sweep(spec);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    REQUIRE(r.n_ph.has_value());
    CHECK(r.delta_x.has_value());
    CHECK(r.delta_x_vacuum.has_value());
    CHECK(r.omega_m_local.has_value());
    CHECK(*r.delta_x > 0.0);
    CHECK(*r.n_c > 1e6);
    CHECK(r.detectable);
  }
  // the detuned points have softer traps than resonance
  CHECK(*rows[0].omega_m_local < *rows[1].omega_m_local);
  CHECK(*rows[2].omega_m_local < *rows[1].omega_m_local);

  // uncalibrated config is rejected
  SweepSpec bad = spec;
  bad.experiment_config = experiment::ExperimentConfig{};
  CHECK_THROWS_AS(check_spec(bad), DomainError);
}

TEST_CASE("stability scan wrapper matches the map module") {
  const auto deltas = grid(-3.0, 1.0, 17);
  const auto gs = grid(0.0, 2.0, 9);
  const auto a = stability_scan(deltas, gs, 2.0, 0.1);
  const auto b = stability::stability_map(deltas, gs, 2.0, 0.1, 1.0);
  CHECK(a.stable == b.stable);
}
