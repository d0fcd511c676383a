#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "kmu/rng.hpp"

namespace kmu::fading {

// Distinguished shadowing value: no dominant-component fluctuation.
inline constexpr double infinite_m = std::numeric_limits<double>::infinity();

/*
 * Channel-power law of a kappa-mu shadowed link.
 *   kappa  >= 0   dominant-to-scattered power ratio
 *   mu     >  0   number of multipath clusters (real-valued in general)
 *   m      >  0   shadowing severity of the dominant components (infinite_m
 *                 for none)
 *   mean_power > 0
 */
struct FadingParams {
  double kappa;
  double mu;
  double m;
  double mean_power;

  FadingParams(double kappa, double mu, double m, double mean_power = 1.0);

  // Rate of every Gamma component in the mixture form of the power law.
  double rate() const { return mu * (1.0 + kappa) / mean_power; }

  bool shadowing_is_infinite() const;
};

// Named limit forms.
FadingParams rayleigh(double mean_power = 1.0);
FadingParams rician(double k_factor, double mean_power = 1.0);
FadingParams rician_shadowed(double k_factor, double m, double mean_power = 1.0);
FadingParams nakagami(double m_hat, double mean_power = 1.0);
FadingParams kappa_mu(double kappa, double mu, double mean_power = 1.0);

// Discrete Gamma mixture: component l has shape base_shape + l and scale
// 1/rate; weights sum to 1 - residual.
struct GammaMixture {
  double rate = 1.0;
  double base_shape = 1.0;
  std::vector<double> weights;
  double residual = 0.0;

  double component_shape(std::size_t l) const { return base_shape + static_cast<double>(l); }
};

// Mixture weights of the power law, truncated once the summed residual drops
// to eps.  Negative-binomial weights for finite m, Poisson in the m -> inf
// limit, a single unit weight for kappa = 0.
GammaMixture mixture_weights(const FadingParams& p, double eps, std::size_t max_terms = 10000);

// Residual mixture mass beyond component n_terms: 1 - sum_{l<=n_terms} w_l.
double tail_mass(const FadingParams& p, std::size_t n_terms);

// Power density at gamma > 0 (closed confluent-hypergeometric form; the
// m = infinite_m limit is evaluated through the mixture).
double pdf(const FadingParams& p, double gamma);

// Density of an explicit mixture (reference path for cross-checks).
double mixture_pdf(const GammaMixture& mix, double gamma);

// P(power > y).
double ccdf(const FadingParams& p, double y, double eps = 1e-10);
double ccdf(const GammaMixture& mix, double y);

// E[power^2] of a mixture.
double second_moment(const GammaMixture& mix);

// Draws channel powers: inverse-CDF over the mixture weights (residual mass
// assigned to the last component), then a Gamma variate of that component.
class PowerSampler {
 public:
  explicit PowerSampler(const FadingParams& p, double eps = 1e-10);
  double draw(rng::Stream& rng) const;
  double mean_power() const { return mean_power_; }

 private:
  std::vector<double> cum_;
  double base_shape_;
  double scale_;
  double mean_power_;
};

// One-shot convenience wrapper around PowerSampler.
double sample_power(const FadingParams& p, rng::Stream& rng, double eps = 1e-10);

// Reference sampler built from the physical signal model (integer mu only):
// mu clusters of scattered diffusion around dominant components whose common
// amplitude is modulated by a Gamma(m, 1/m) shadowing draw.
double sample_power_physical(const FadingParams& p, rng::Stream& rng);

namespace detail {

// Poisson(mean) weights truncated at residual <= eps; residual returned.
std::vector<double> truncated_poisson(double mean, double eps, std::size_t max_terms,
                                      double& residual);

}  // namespace detail

}  // namespace kmu::fading
