// Times the OpenMP coverage estimator against the serial reference on the
// same workload and verifies that the two produce bit-identical estimates.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kmu/coverage.hpp"
#include "kmu/fading.hpp"
#include "kmu/mcsim.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t trials = 200000;
  if (argc > 1) trials = std::strtoull(argv[1], nullptr, 10);

  const kmu::fading::FadingParams fp(2.0, 2.0, 3.0, 1.0);
  const kmu::coverage::NetworkModel model(1.0, 4.0, fp, fp);

  std::vector<double> thresholds;
  for (int db = -10; db <= 10; db += 2) thresholds.push_back(std::pow(10.0, db / 10.0));

  kmu::mcsim::SimConfig cfg;
  cfg.trials = trials;
  cfg.seed = 7;
  cfg.min_expected_points = 500;

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif

  auto t0 = std::chrono::steady_clock::now();
  const auto serial = kmu::mcsim::estimate_coverage_serial(model, thresholds, cfg);
  const double t_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const auto parallel = kmu::mcsim::estimate_coverage(model, thresholds, cfg);
  const double t_parallel = seconds_since(t0);

  bool identical = serial.estimates.size() == parallel.estimates.size();
  for (std::size_t i = 0; identical && i < serial.estimates.size(); ++i) {
    identical = serial.estimates[i].p_hat == parallel.estimates[i].p_hat &&
                serial.estimates[i].ci_low == parallel.estimates[i].ci_low &&
                serial.estimates[i].ci_high == parallel.estimates[i].ci_high;
  }

  std::printf("trials            %llu\n", static_cast<unsigned long long>(trials));
  std::printf("thresholds        %zu\n", thresholds.size());
  std::printf("threads           %d\n", threads);
  std::printf("serial            %.3f s  (%.0f trials/s)\n", t_serial,
              static_cast<double>(trials) / t_serial);
  std::printf("parallel          %.3f s  (%.0f trials/s)\n", t_parallel,
              static_cast<double>(trials) / t_parallel);
  std::printf("speedup           %.2fx\n", t_serial / t_parallel);
  std::printf("bit-identical     %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
