// Serial vs OpenMP comparison for the three data-parallel kernels:
// stability-map cells, sweep rows, and trajectory ensembles.

#include "levisim/solvers.hpp"
#include "levisim/stability.hpp"
#include "levisim/sweep.hpp"

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i)
    out.push_back(lo + (hi - lo) * i / static_cast<double>(n - 1));
  return out;
}

template <typename F>
double time_best_of(int reps, const F& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-24s serial %8.3f s   openmp %8.3f s   speedup %.2fx\n", name,
              serial, parallel, serial / parallel);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("openmp disabled at build time\n");
#endif

  {
    const auto deltas = linspace(-6.0, 6.0, 241);
    const auto gs = linspace(0.0, 3.0, 61);
    const double s = time_best_of(3, [&] {
      (void)levisim::stability::stability_map_serial(deltas, gs, 2.0, 0.1, 1.0);
    });
    const double p = time_best_of(3, [&] {
      (void)levisim::stability::stability_map(deltas, gs, 2.0, 0.1, 1.0);
    });
    report("stability_map", s, p);
  }

  {
    levisim::sweep::SweepSpec spec;
    spec.delta_grid = linspace(-6.0, 6.0, 61);
    spec.scenario = levisim::sweep::Scenario::cavity_homodyne;
    spec.efficiencies = {{1.0, 0.0}};
    spec.objective = levisim::sweep::Objective::squeezing;
    spec.system = {1.0, 0.0, 1.0, 2.0, 0.1, levisim::Units::dimensionless};
    const double s = time_best_of(1, [&] {
      (void)levisim::sweep::detuning_sweep_serial(spec);
    });
    const double p =
        time_best_of(1, [&] { (void)levisim::sweep::detuning_sweep(spec); });
    report("detuning_sweep", s, p);
  }

  {
    levisim::SystemParams params{1.0, -4.5, 1.0, 2.0, 0.1,
                                 levisim::Units::dimensionless};
    levisim::MeasurementParams meas{1.0, 0.2, 0.4};
    const auto init = levisim::vacuum_state();
    const double dt = 2e-3 * 6.283185307179586;
    const double s = time_best_of(1, [&] {
      (void)levisim::solvers::ensemble_final_means_serial(
          init, params, meas, 60.0, dt, 42, 512, false);
    });
    const double p = time_best_of(1, [&] {
      (void)levisim::solvers::ensemble_final_means(init, params, meas, 60.0,
                                                   dt, 42, 512, false);
    });
    report("trajectory_ensemble", s, p);
  }
  return 0;
}
