#include "kmu/mcsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "kmu/fading.hpp"

namespace kmu::mcsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

/*
 * Everything is simulated in the transformed coordinate t = pi * density * r^2.
 * The ordered squared station distances scaled this way are the arrival times
 * of a unit-rate Poisson process, so a realization is just a cumulative sum of
 * unit exponentials and the density drops out of the dynamics entirely.  The
 * path loss r^-alpha becomes t^{-alpha/2} up to a common factor that cancels
 * in the SIR.
 */
double window_measure(const coverage::NetworkModel& model, const SimConfig& cfg) {
  if (!(cfg.min_expected_points > 0.0) || !std::isfinite(cfg.min_expected_points)) {
    throw std::invalid_argument("mcsim: min_expected_points must be positive and finite");
  }
  if (cfg.window_radius < 0.0 || !std::isfinite(cfg.window_radius)) {
    throw std::invalid_argument("mcsim: window_radius must be non-negative and finite");
  }
  if (cfg.window_radius == 0.0) return cfg.min_expected_points;
  const double t_r = kPi * model.density * cfg.window_radius * cfg.window_radius;
  if (t_r < cfg.min_expected_points) {
    throw std::invalid_argument(
        "mcsim: explicit window_radius holds fewer than min_expected_points stations");
  }
  return t_r;
}

inline double power_law(double t, double alpha, double neg_half_alpha) {
  if (alpha == 4.0) return 1.0 / (t * t);
  if (alpha == 3.0) return 1.0 / (t * std::sqrt(t));
  return std::pow(t, neg_half_alpha);
}

struct TrialContext {
  double t_r;
  double alpha;
  double neg_half_alpha;
  double far_field;  // deterministic mean of the interference beyond the window
  bool compensate;
  fading::PowerSampler desired;
  fading::PowerSampler interferer;

  TrialContext(const coverage::NetworkModel& model, const SimConfig& cfg)
      : t_r(window_measure(model, cfg)),
        alpha(model.alpha),
        neg_half_alpha(-0.5 * model.alpha),
        far_field(0.0),
        compensate(cfg.far_field_compensation),
        desired(model.desired),
        interferer(model.interferer) {
    if (compensate) {
      // mean of sum g_i t_i^{-alpha/2} over unit-rate arrivals past t_r
      far_field = 2.0 / (alpha - 2.0) * model.interferer.mean_power *
                  std::pow(t_r, 1.0 - 0.5 * alpha);
    }
  }
};

double run_trial(const TrialContext& ctx, rng::Stream& rng, std::uint64_t& resamples) {
  for (;;) {
    const double t1 = rng.exponential();
    if (t1 >= ctx.t_r) {
      ++resamples;  // no station in the window at all
      continue;
    }
    double interference = 0.0;
    bool any_interferer = false;
    for (double t = t1 + rng.exponential(); t < ctx.t_r; t += rng.exponential()) {
      interference += ctx.interferer.draw(rng) * power_law(t, ctx.alpha, ctx.neg_half_alpha);
      any_interferer = true;
    }
    if (ctx.compensate) {
      interference += ctx.far_field;
    } else if (!any_interferer) {
      ++resamples;  // SIR undefined without compensation and without interferers
      continue;
    }
    const double signal = ctx.desired.draw(rng) * power_law(t1, ctx.alpha, ctx.neg_half_alpha);
    return signal / interference;
  }
}

struct SortedThresholds {
  std::vector<double> values;       // ascending
  std::vector<std::size_t> origin;  // values[j] came from thresholds[origin[j]]
};

SortedThresholds sort_thresholds(std::span<const double> thresholds) {
  for (double t : thresholds) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("mcsim: thresholds must be positive and finite");
    }
  }
  SortedThresholds s;
  s.origin.resize(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) s.origin[i] = i;
  std::sort(s.origin.begin(), s.origin.end(),
            [&](std::size_t a, std::size_t b) { return thresholds[a] < thresholds[b]; });
  s.values.reserve(thresholds.size());
  for (std::size_t idx : s.origin) s.values.push_back(thresholds[idx]);
  return s;
}

void validate_common(const SimConfig& cfg) {
  if (cfg.trials == 0) throw std::invalid_argument("mcsim: trials must be at least 1");
  if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0)) {
    throw std::invalid_argument("mcsim: ci_level must lie strictly between 0 and 1");
  }
}

SimResult assemble(std::span<const double> thresholds, const SortedThresholds& sorted,
                   const std::vector<std::uint64_t>& bin_counts, const SimConfig& cfg,
                   double t_r, std::uint64_t resamples) {
  // bin_counts[b] = trials whose SIR exceeded exactly b of the sorted thresholds;
  // threshold j is covered by every trial landing in a bin past j.
  const std::size_t nt = sorted.values.size();
  std::vector<std::uint64_t> covered(nt, 0);
  std::uint64_t suffix = 0;
  for (std::size_t j = nt; j-- > 0;) {
    suffix += bin_counts[j + 1];
    covered[j] = suffix;
  }

  const double z = normal_quantile(1.0 - 0.5 * (1.0 - cfg.ci_level));
  SimResult res;
  res.estimates.resize(thresholds.size());
  for (std::size_t j = 0; j < nt; ++j) {
    SimEstimate e;
    e.p_hat = static_cast<double>(covered[j]) / static_cast<double>(cfg.trials);
    e.trials = cfg.trials;
    e.seed = cfg.seed;
    wilson_interval(covered[j], cfg.trials, z, e.ci_low, e.ci_high);
    res.estimates[sorted.origin[j]] = e;
  }
  res.diag.resampled_realizations = resamples;
  res.diag.window_ppp_mean = t_r;
  return res;
}

inline std::size_t sir_bin(const std::vector<double>& sorted_values, double sir) {
  return static_cast<std::size_t>(
      std::lower_bound(sorted_values.begin(), sorted_values.end(), sir) -
      sorted_values.begin());
}

}  // namespace

std::vector<Point2> sample_ppp(double density, double radius, rng::Stream& rng) {
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw std::invalid_argument("sample_ppp: density must be positive and finite");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("sample_ppp: radius must be positive and finite");
  }
  const std::uint64_t n = rng.poisson(density * kPi * radius * radius);
  std::vector<Point2> pts;
  pts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double r = radius * std::sqrt(rng.uniform_co());
    const double phi = 2.0 * kPi * rng.uniform_co();
    pts.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  return pts;
}

double sir_trial(const coverage::NetworkModel& model, const SimConfig& cfg, rng::Stream& rng,
                 std::uint64_t* resamples) {
  const TrialContext ctx(model, cfg);
  std::uint64_t local = 0;
  const double sir = run_trial(ctx, rng, local);
  if (resamples != nullptr) *resamples += local;
  return sir;
}

SimResult estimate_coverage(const coverage::NetworkModel& model,
                            std::span<const double> thresholds, const SimConfig& cfg) {
  validate_common(cfg);
  const TrialContext ctx(model, cfg);
  const SortedThresholds sorted = sort_thresholds(thresholds);
  const std::size_t nbins = sorted.values.size() + 1;

  std::vector<std::uint64_t> bin_counts(nbins, 0);
  std::uint64_t resamples = 0;

#ifdef _OPENMP
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(nbins, 0);
    std::uint64_t local_resamples = 0;
#pragma omp for schedule(static) nowait
    for (long long i = 0; i < static_cast<long long>(cfg.trials); ++i) {
      rng::Stream stream(cfg.seed, static_cast<std::uint64_t>(i));
      const double sir = run_trial(ctx, stream, local_resamples);
      ++local[sir_bin(sorted.values, sir)];
    }
#pragma omp critical
    {
      for (std::size_t b = 0; b < nbins; ++b) bin_counts[b] += local[b];
      resamples += local_resamples;
    }
  }
#else
  for (std::uint64_t i = 0; i < cfg.trials; ++i) {
    rng::Stream stream(cfg.seed, i);
    const double sir = run_trial(ctx, stream, resamples);
    ++bin_counts[sir_bin(sorted.values, sir)];
  }
#endif

  return assemble(thresholds, sorted, bin_counts, cfg, ctx.t_r, resamples);
}

SimResult estimate_coverage_serial(const coverage::NetworkModel& model,
                                   std::span<const double> thresholds, const SimConfig& cfg) {
  validate_common(cfg);
  const TrialContext ctx(model, cfg);
  const SortedThresholds sorted = sort_thresholds(thresholds);

  std::vector<std::uint64_t> bin_counts(sorted.values.size() + 1, 0);
  std::uint64_t resamples = 0;
  for (std::uint64_t i = 0; i < cfg.trials; ++i) {
    rng::Stream stream(cfg.seed, i);
    const double sir = run_trial(ctx, stream, resamples);
    ++bin_counts[sir_bin(sorted.values, sir)];
  }
  return assemble(thresholds, sorted, bin_counts, cfg, ctx.t_r, resamples);
}

/*
 * Acklam's rational approximation refined with one Halley step against the
 * exact erfc-based CDF.  The refinement pushes the relative error from ~1e-9
 * to the limits of double precision.
 */
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie strictly between 0 and 1");
  }
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double err = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = err * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

void wilson_interval(std::uint64_t successes, std::uint64_t trials, double z, double& lo,
                     double& hi) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: trials must be at least 1");
  const double n = static_cast<double>(trials);
  const double p_hat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p_hat + z2 / (2.0 * n)) / denom;
  const double half =
      z / denom * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n));
  lo = std::max(0.0, center - half);
  hi = std::min(1.0, center + half);
}

}  // namespace kmu::mcsim
