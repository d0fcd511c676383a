#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kmu/coverage.hpp"
#include "kmu/rng.hpp"

namespace kmu::mcsim {

struct Point2 {
  double x;
  double y;
};

// One realization window.  The window is sized so that the expected station
// count is at least min_expected_points; the mean interference of everything
// beyond it is added back deterministically unless compensation is disabled.
struct SimConfig {
  double window_radius = 0.0;         // explicit radius; 0 derives it from the point target
  double min_expected_points = 2000;  // expected stations per realization window
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  double ci_level = 0.99;             // two-sided confidence level for the intervals
  bool far_field_compensation = true;
};

struct SimEstimate {
  double p_hat;
  double ci_low;
  double ci_high;
  std::uint64_t trials;
  std::uint64_t seed;
};

struct SimDiagnostics {
  std::uint64_t resampled_realizations = 0;  // windows redrawn for lack of stations
  double window_ppp_mean = 0.0;              // expected station count per window
};

struct SimResult {
  std::vector<SimEstimate> estimates;  // one per requested threshold, same order
  SimDiagnostics diag;
};

// Homogeneous Poisson point process on a disk of the given radius.
std::vector<Point2> sample_ppp(double density, double radius, rng::Stream& rng);

// One SIR realization: the user sits at the origin, serves from the nearest
// station, every other station in the window interferes.  Realizations whose
// window cannot produce a valid SIR are redrawn and counted via *resamples.
double sir_trial(const coverage::NetworkModel& model, const SimConfig& cfg, rng::Stream& rng,
                 std::uint64_t* resamples = nullptr);

// Empirical coverage curve over the given thresholds.  Per-trial generators
// are keyed by (seed, trial index), and per-threshold tallies are integers,
// so the result is bit-identical for any thread count.
SimResult estimate_coverage(const coverage::NetworkModel& model,
                            std::span<const double> thresholds, const SimConfig& cfg);

// Plain-loop reference implementation; must match estimate_coverage exactly.
SimResult estimate_coverage_serial(const coverage::NetworkModel& model,
                                   std::span<const double> thresholds, const SimConfig& cfg);

// Standard normal quantile, accurate to ~1e-14 over (0, 1).
double normal_quantile(double p);

// Wilson score interval for a binomial proportion.
void wilson_interval(std::uint64_t successes, std::uint64_t trials, double z, double& lo,
                     double& hi);

}  // namespace kmu::mcsim
