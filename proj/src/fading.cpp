#include "kmu/fading.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kmu/specfun.hpp"

namespace kmu::fading {

namespace {

void validate_eps(double eps) {
  if (!(eps > 0.0) || eps >= 1.0) throw std::domain_error("mixture eps must lie in (0, 1)");
}

bool near_integer(double v) { return std::fabs(v - std::round(v)) < 1e-9; }

}  // namespace

FadingParams::FadingParams(double kappa_, double mu_, double m_, double mean_power_)
    : kappa(kappa_), mu(mu_), m(m_), mean_power(mean_power_) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::domain_error("FadingParams: kappa must be >= 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::domain_error("FadingParams: mu must be > 0");
  if (!(m > 0.0)) throw std::domain_error("FadingParams: m must be > 0 (or infinite)");
  if (!(mean_power > 0.0) || !std::isfinite(mean_power)) {
    throw std::domain_error("FadingParams: mean_power must be > 0");
  }
}

bool FadingParams::shadowing_is_infinite() const { return std::isinf(m); }

FadingParams rayleigh(double mean_power) { return FadingParams(0.0, 1.0, infinite_m, mean_power); }

FadingParams rician(double k_factor, double mean_power) {
  return FadingParams(k_factor, 1.0, infinite_m, mean_power);
}

FadingParams rician_shadowed(double k_factor, double m, double mean_power) {
  return FadingParams(k_factor, 1.0, m, mean_power);
}

FadingParams nakagami(double m_hat, double mean_power) {
  return FadingParams(0.0, m_hat, infinite_m, mean_power);
}

FadingParams kappa_mu(double kappa, double mu, double mean_power) {
  return FadingParams(kappa, mu, infinite_m, mean_power);
}

namespace detail {

std::vector<double> truncated_poisson(double mean, double eps, std::size_t max_terms,
                                      double& residual) {
  validate_eps(eps);
  std::vector<double> w;
  if (mean <= 0.0) {
    w.push_back(1.0);
    residual = 0.0;
    return w;
  }
  const double lmean = std::log(mean);
  double logw = -mean;
  double cum = 0.0;
  for (std::size_t l = 0; l < max_terms; ++l) {
    const double wl = std::exp(logw);
    w.push_back(wl);
    cum += wl;
    if (1.0 - cum <= eps && static_cast<double>(l) >= mean) {
      residual = std::max(0.0, 1.0 - cum);
      return w;
    }
    logw += lmean - std::log(static_cast<double>(l + 1));
  }
  throw numeric_error("truncated_poisson: residual target not reached within term cap");
}

}  // namespace detail

/*
 * Mixture weights.  For finite m these are negative-binomial,
 *   w_l = (m)_l / l! * x^l * y^m,   x = mu k / (mu k + m),  y = m / (mu k + m),
 * accumulated through the ratio recurrence w_{l+1}/w_l = x (m+l)/(l+1) in the
 * log domain.  m -> inf degenerates to Poisson(mu k); kappa = 0 collapses to a
 * single unit weight.  Truncation stops when the summed residual reaches eps;
 * the exact residual 1 - sum w_l is stored.
 */
GammaMixture mixture_weights(const FadingParams& p, double eps, std::size_t max_terms) {
  validate_eps(eps);
  GammaMixture mix;
  mix.rate = p.rate();
  mix.base_shape = p.mu;

  if (p.kappa == 0.0) {
    mix.weights = {1.0};
    mix.residual = 0.0;
    return mix;
  }

  const double mk = p.mu * p.kappa;
  if (p.shadowing_is_infinite()) {
    mix.weights = detail::truncated_poisson(mk, eps, max_terms, mix.residual);
    return mix;
  }

  const double x = mk / (mk + p.m);
  const double y = p.m / (mk + p.m);
  const double lx = std::log(x);
  double logw = p.m * std::log(y);
  double cum = 0.0;
  // mode of the weight sequence; do not stop before it
  const double mode = std::max(0.0, (p.m * x - 1.0) / (1.0 - x));
  for (std::size_t l = 0; l < max_terms; ++l) {
    const double wl = std::exp(logw);
    mix.weights.push_back(wl);
    cum += wl;
    if (1.0 - cum <= eps && static_cast<double>(l) >= mode) {
      mix.residual = std::max(0.0, 1.0 - cum);
      return mix;
    }
    logw += lx + std::log((p.m + static_cast<double>(l)) / static_cast<double>(l + 1));
  }
  throw numeric_error("mixture_weights: residual target not reached within term cap");
}

double tail_mass(const FadingParams& p, std::size_t n_terms) {
  if (p.kappa == 0.0) return 0.0;
  const double mk = p.mu * p.kappa;
  double cum = 0.0;
  if (p.shadowing_is_infinite()) {
    double logw = -mk;
    const double lmean = std::log(mk);
    for (std::size_t l = 0; l <= n_terms; ++l) {
      cum += std::exp(logw);
      logw += lmean - std::log(static_cast<double>(l + 1));
    }
  } else {
    const double x = mk / (mk + p.m);
    const double lx = std::log(x);
    double logw = p.m * std::log(p.m / (mk + p.m));
    for (std::size_t l = 0; l <= n_terms; ++l) {
      cum += std::exp(logw);
      logw += lx + std::log((p.m + static_cast<double>(l)) / static_cast<double>(l + 1));
    }
  }
  return std::max(0.0, 1.0 - cum);
}

double pdf(const FadingParams& p, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::domain_error("pdf: requires gamma > 0");
  if (p.shadowing_is_infinite()) {
    return mixture_pdf(mixture_weights(p, 1e-12), gamma);
  }
  const double c = p.rate();
  const double mk = p.mu * p.kappa;
  const double theta = c * mk / (mk + p.m);  // argument scale of the confluent factor
  const double log1f1 =
      theta * gamma > 0.0 ? specfun::detail::log_hyp1f1_pos(p.m, p.mu, theta * gamma) : 0.0;
  const double logf = p.mu * std::log(p.mu) + p.m * std::log(p.m) +
                      p.mu * std::log1p(p.kappa) + (p.mu - 1.0) * std::log(gamma) -
                      specfun::log_gamma(p.mu) - p.mu * std::log(p.mean_power) -
                      p.m * std::log(mk + p.m) - c * gamma + log1f1;
  return std::exp(logf);
}

double mixture_pdf(const GammaMixture& mix, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::domain_error("mixture_pdf: requires gamma > 0");
  const double lc = std::log(mix.rate);
  const double lg = std::log(gamma);
  double acc = 0.0;
  for (std::size_t l = 0; l < mix.weights.size(); ++l) {
    const double shape = mix.component_shape(l);
    const double logterm =
        shape * lc + (shape - 1.0) * lg - mix.rate * gamma - specfun::log_gamma(shape);
    acc += mix.weights[l] * std::exp(logterm);
  }
  return acc;
}

double ccdf(const GammaMixture& mix, double y) {
  if (!(y >= 0.0) || !std::isfinite(y)) throw std::domain_error("ccdf: requires y >= 0");
  double acc = 0.0;
  for (std::size_t l = 0; l < mix.weights.size(); ++l) {
    acc += mix.weights[l] * specfun::reg_upper_gamma(mix.component_shape(l), mix.rate * y);
  }
  return acc;
}

double ccdf(const FadingParams& p, double y, double eps) {
  return ccdf(mixture_weights(p, eps), y);
}

double second_moment(const GammaMixture& mix) {
  double acc = 0.0;
  for (std::size_t l = 0; l < mix.weights.size(); ++l) {
    const double a = mix.component_shape(l);
    acc += mix.weights[l] * a * (a + 1.0);
  }
  return acc / (mix.rate * mix.rate);
}

PowerSampler::PowerSampler(const FadingParams& p, double eps) {
  const GammaMixture mix = mixture_weights(p, eps);
  cum_.resize(mix.weights.size());
  double acc = 0.0;
  for (std::size_t l = 0; l < mix.weights.size(); ++l) {
    acc += mix.weights[l];
    cum_[l] = acc;
  }
  cum_.back() = 1.0;  // residual mass goes to the last component
  base_shape_ = mix.base_shape;
  scale_ = 1.0 / mix.rate;
  mean_power_ = p.mean_power;
}

double PowerSampler::draw(rng::Stream& rng) const {
  const double u = rng.uniform_co();
  const std::size_t idx = static_cast<std::size_t>(
      std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
  const std::size_t l = std::min(idx, cum_.size() - 1);
  return rng.gamma(base_shape_ + static_cast<double>(l), scale_);
}

double sample_power(const FadingParams& p, rng::Stream& rng, double eps) {
  return PowerSampler(p, eps).draw(rng);
}

double sample_power_physical(const FadingParams& p, rng::Stream& rng) {
  if (!near_integer(p.mu) || p.mu < 1.0) {
    throw std::domain_error("sample_power_physical: requires integer mu >= 1");
  }
  const std::size_t mu = static_cast<std::size_t>(std::llround(p.mu));
  const double sigma2 = p.mean_power / (2.0 * p.mu * (1.0 + p.kappa));
  const double sigma = std::sqrt(sigma2);
  const double d = std::sqrt(2.0 * sigma2 * p.kappa);  // per-cluster dominant amplitude
  const double xi = p.shadowing_is_infinite() ? 1.0 : std::sqrt(rng.gamma(p.m, 1.0 / p.m));
  double power = 0.0;
  for (std::size_t i = 0; i < mu; ++i) {
    const double in_phase = sigma * rng.normal() + xi * d;
    const double quadrature = sigma * rng.normal();
    power += in_phase * in_phase + quadrature * quadrature;
  }
  return power;
}

}  // namespace kmu::fading
