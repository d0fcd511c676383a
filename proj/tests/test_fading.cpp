#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kmu/fading.hpp"
#include "kmu/rng.hpp"
#include "kmu/specfun.hpp"
#include "support/testutil.hpp"

using namespace kmu;
using fading::FadingParams;
using fading::GammaMixture;

namespace {

std::vector<double> draw_many(const FadingParams& p, std::uint64_t seed, std::size_t n,
                              bool physical) {
  rng::Stream rng(seed, physical ? 1 : 0);
  std::vector<double> xs(n);
  fading::PowerSampler sampler(p);
  for (double& x : xs) x = physical ? fading::sample_power_physical(p, rng) : sampler.draw(rng);
  return xs;
}

}  // namespace

TEST_CASE("FadingParams validates its domain") {
  CHECK_THROWS_AS(FadingParams(-0.1, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(FadingParams(1.0, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(FadingParams(1.0, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(FadingParams(1.0, 1.0, 1.0, -2.0), std::domain_error);
  const FadingParams p(1.5, 2.0, 4.0, 2.0);
  CHECK(p.rate() == doctest::Approx(2.0 * 2.5 / 2.0).epsilon(1e-15));
}

TEST_CASE("named limit forms carry the right parameters") {
  const FadingParams ray = fading::rayleigh();
  CHECK(ray.kappa == 0.0);
  CHECK(ray.mu == 1.0);
  CHECK(ray.shadowing_is_infinite());
  CHECK(ray.mean_power == 1.0);

  const FadingParams nak = fading::nakagami(3.0);
  CHECK(nak.kappa == 0.0);
  CHECK(nak.mu == 3.0);
  CHECK(nak.shadowing_is_infinite());

  const FadingParams ric = fading::rician(4.0, 2.0);
  CHECK(ric.kappa == 4.0);
  CHECK(ric.mu == 1.0);
  CHECK(ric.shadowing_is_infinite());
  CHECK(ric.mean_power == 2.0);

  const FadingParams rs = fading::rician_shadowed(4.0, 2.5);
  CHECK(rs.kappa == 4.0);
  CHECK(rs.mu == 1.0);
  CHECK(rs.m == 2.5);

  const FadingParams km = fading::kappa_mu(2.0, 3.5);
  CHECK(km.kappa == 2.0);
  CHECK(km.mu == 3.5);
  CHECK(km.shadowing_is_infinite());
}

TEST_CASE("kappa = 0 collapses the mixture to one component") {
  const GammaMixture mix = fading::mixture_weights(FadingParams(0.0, 1.0, 5.0), 1e-9);
  REQUIRE(mix.weights.size() == 1);
  CHECK(mix.weights[0] == 1.0);
  CHECK(mix.residual == 0.0);
  CHECK(mix.base_shape == 1.0);
}

TEST_CASE("unit parameters give geometric weights") {
  const GammaMixture mix = fading::mixture_weights(FadingParams(1.0, 1.0, 1.0), 1e-12);
  REQUIRE(mix.weights.size() >= 20);
  for (std::size_t l = 0; l < 20; ++l) {
    CHECK(mix.weights[l] == doctest::Approx(std::pow(2.0, -static_cast<double>(l) - 1.0))
                                .epsilon(1e-12));
  }
  double total = mix.residual;
  for (double w : mix.weights) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("infinite shadowing gives Poisson weights") {
  const FadingParams p(2.0, 1.0, fading::infinite_m);
  const GammaMixture mix = fading::mixture_weights(p, 1e-12);
  double w = std::exp(-2.0);
  for (std::size_t l = 0; l < mix.weights.size(); ++l) {
    CHECK(mix.weights[l] == doctest::Approx(w).epsilon(1e-12));
    w *= 2.0 / static_cast<double>(l + 1);
  }

  // A huge finite m must approach the same weights term by term.
  const GammaMixture big = fading::mixture_weights(FadingParams(2.0, 1.0, 1e8), 1e-12);
  const std::size_t shared = std::min(mix.weights.size(), big.weights.size());
  REQUIRE(shared >= 10);
  for (std::size_t l = 0; l < shared; ++l) {
    CHECK(std::abs(mix.weights[l] - big.weights[l]) <= 1e-6);
  }
}

TEST_CASE("mixture weights are a probability vector at every truncation") {
  for (double eps : {1e-6, 1e-9, 1e-12}) {
    const GammaMixture mix = fading::mixture_weights(FadingParams(2.7, 1.8, 3.3), eps);
    CHECK(mix.residual >= 0.0);
    CHECK(mix.residual <= eps);
    double sum = 0.0;
    for (double w : mix.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(sum + mix.residual == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("truncated_poisson helper handles the degenerate mean") {
  double residual = -1.0;
  const std::vector<double> w = fading::detail::truncated_poisson(0.0, 1e-9, 100, residual);
  REQUIRE(w.size() == 1);
  CHECK(w[0] == 1.0);
  CHECK(residual == 0.0);
}

TEST_CASE("tail_mass matches the analytic remainders") {
  CHECK(fading::tail_mass(FadingParams(0.0, 2.0, 5.0), 0) == 0.0);
  // Geometric weights: mass beyond index 9 is 2^-10.
  CHECK(fading::tail_mass(FadingParams(1.0, 1.0, 1.0), 9) ==
        doctest::Approx(std::pow(2.0, -10.0)).epsilon(1e-12));
}

TEST_CASE("tail_mass decays at least geometrically for the reference channel") {
  const FadingParams p(2.0, 2.0, 3.0);
  double prev = fading::tail_mass(p, 5);
  for (std::size_t n = 15; n <= 45; n += 10) {
    const double cur = fading::tail_mass(p, n);
    CHECK(cur <= 0.5 * prev);
    CHECK(cur >= 0.0);
    prev = cur;
  }
}

TEST_CASE("pdf reduces to the exponential density under Rayleigh fading") {
  CHECK(fading::pdf(fading::rayleigh(), 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(fading::pdf(fading::rayleigh(2.0), 3.0) ==
        doctest::Approx(0.5 * std::exp(-1.5)).epsilon(1e-14));
}

TEST_CASE("closed-form pdf agrees with the mixture density") {
  for (double kappa : {0.5, 2.0, 10.0}) {
    for (double mu : {1.0, 2.0, 3.5}) {
      for (double m : {0.5, 2.0, 10.0}) {
        const FadingParams p(kappa, mu, m);
        const GammaMixture mix = fading::mixture_weights(p, 1e-14);
        for (double gamma : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
          const double closed = fading::pdf(p, gamma);
          const double viamix = fading::mixture_pdf(mix, gamma);
          CHECK(std::abs(closed - viamix) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("pdf matches the Bessel form of the Rician density") {
  const double k = 4.0;
  const FadingParams p = fading::rician(k);
  for (double gamma : {0.05, 0.3, 1.0, 2.5, 6.0}) {
    const double want = (1.0 + k) * std::exp(-k - (1.0 + k) * gamma) *
                        std::cyl_bessel_i(0.0, 2.0 * std::sqrt(k * (1.0 + k) * gamma));
    CHECK(fading::pdf(p, gamma) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("pdf integrates to one and to the mean power") {
  for (const FadingParams& p :
       {FadingParams(0.5, 1.0, 2.0), FadingParams(2.0, 2.0, 10.0),
        FadingParams(5.0, 3.5, 0.5), fading::rician(4.0)}) {
    const double mass =
        testutil::integrate([&](double g) { return fading::pdf(p, g); }, 1e-12, 60.0, 1e-10);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
  const FadingParams scaled(1.5, 2.0, 4.0, 2.5);
  const double mean = testutil::integrate([&](double g) { return g * fading::pdf(scaled, g); },
                                          1e-12, 150.0, 1e-10);
  CHECK(mean == doctest::Approx(2.5).epsilon(1e-8));
}

TEST_CASE("ccdf endpoints and the exponential special case") {
  const FadingParams p(1.5, 2.0, 4.0);
  // Truncation leaves at most the weight-residual short of unity.
  CHECK(fading::ccdf(p, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fading::ccdf(fading::rayleigh(), 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("ccdf of the geometric mixture is a weighted Erlang tail sum") {
  const FadingParams p(1.0, 1.0, 1.0);  // rate 2, shapes l+1, weights 2^-(l+1)
  for (double y : {0.25, 1.0, 3.0}) {
    double want = 0.0;
    for (int l = 0; l < 80; ++l) {
      want += std::pow(2.0, -(l + 1.0)) * specfun::reg_upper_gamma(l + 1.0, 2.0 * y);
    }
    CHECK(fading::ccdf(p, y, 1e-13) == doctest::Approx(want).epsilon(1e-11));
  }
}

TEST_CASE("ccdf of a pure Nakagami channel is a regularized gamma tail") {
  const FadingParams p = fading::nakagami(2.5);
  for (double y : {0.1, 1.0, 4.0}) {
    CHECK(fading::ccdf(p, y) ==
          doctest::Approx(specfun::reg_upper_gamma(2.5, 2.5 * y)).epsilon(1e-10));
  }
}

TEST_CASE("ccdf agrees with quadrature of the pdf") {
  const FadingParams p(1.5, 2.0, 4.0);
  for (double y : {0.5, 2.0}) {
    const double tail =
        testutil::integrate([&](double g) { return fading::pdf(p, g); }, y, 60.0, 1e-11);
    CHECK(fading::ccdf(p, y, 1e-12) == doctest::Approx(tail).epsilon(1e-9));
  }
}

TEST_CASE("ccdf is monotone non-increasing and bounded") {
  const FadingParams p(2.0, 1.7, 3.0);
  const GammaMixture mix = fading::mixture_weights(p, 1e-12);
  double prev = 1.0;
  for (double y = 0.0; y <= 12.0; y += 0.1) {
    const double v = fading::ccdf(mix, y);
    CHECK(v <= prev + 1e-14);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("second_moment matches quadrature and the Rayleigh closed form") {
  const GammaMixture ray = fading::mixture_weights(fading::rayleigh(1.5), 1e-12);
  CHECK(fading::second_moment(ray) == doctest::Approx(2.0 * 1.5 * 1.5).epsilon(1e-12));

  const FadingParams p(1.5, 2.0, 4.0);
  const GammaMixture mix = fading::mixture_weights(p, 1e-13);
  const double quad = testutil::integrate([&](double g) { return g * g * fading::pdf(p, g); },
                                          1e-12, 80.0, 1e-11);
  CHECK(fading::second_moment(mix) == doctest::Approx(quad).epsilon(1e-8));
}

TEST_CASE("power draws are deterministic given the stream state") {
  const FadingParams p(1.5, 2.0, 4.0);
  rng::Stream a(99, 7);
  rng::Stream b(99, 7);
  fading::PowerSampler sampler(p);
  for (int i = 0; i < 100; ++i) {
    CHECK(sampler.draw(a) == sampler.draw(b));
  }
}

TEST_CASE("sampler mean converges to the configured mean power") {
  for (const FadingParams& p : {fading::rayleigh(), FadingParams(1.5, 2.0, 4.0, 2.0)}) {
    const std::vector<double> xs = draw_many(p, 4242, 200000, false);
    double sum = 0.0, sumsq = 0.0;
    for (double x : xs) {
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / static_cast<double>(xs.size());
    const double var = sumsq / static_cast<double>(xs.size()) - mean * mean;
    const double se = std::sqrt(var / static_cast<double>(xs.size()));
    CHECK(std::abs(mean - p.mean_power) <= 4.0 * se);
  }
}

TEST_CASE("Rayleigh draws pass a one-sample KS test against the exponential law") {
  std::vector<double> xs = draw_many(fading::rayleigh(), 31337, 20000, false);
  const double stat = testutil::ks_one_sample(xs, [](double x) { return -std::expm1(-x); });
  CHECK(stat < testutil::ks_crit_one(xs.size()));
}

TEST_CASE("mixture sampler and physical sampler agree in distribution") {
  const FadingParams p(1.5, 2.0, 4.0);
  std::vector<double> a = draw_many(p, 555, 30000, false);
  std::vector<double> b = draw_many(p, 556, 30000, true);
  const double stat = testutil::ks_two_sample(a, b);
  CHECK(stat < testutil::ks_crit_two(a.size(), b.size()));
}

TEST_CASE("physical sampler requires an integer cluster count") {
  rng::Stream rng(1, 1);
  CHECK_THROWS_AS(fading::sample_power_physical(FadingParams(1.0, 2.5, 4.0), rng),
                  std::domain_error);
}

TEST_CASE("pdf and ccdf reject out-of-domain points") {
  const FadingParams p(1.0, 1.0, 1.0);
  CHECK_THROWS_AS(fading::pdf(p, 0.0), std::domain_error);
  CHECK_THROWS_AS(fading::pdf(p, -1.0), std::domain_error);
  CHECK_THROWS_AS(fading::ccdf(p, -0.5), std::domain_error);
}
