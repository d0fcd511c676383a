#include "kmu/coverage.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kmu::coverage {

using specfun::PowerSeries;

namespace {

void validate_threshold(double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw std::invalid_argument("coverage: threshold must be positive and finite");
  }
}

double rounded_integer_mu(double mu) {
  const double r = std::round(mu);
  if (r >= 1.0 && std::abs(mu - r) <= 1e-9) return r;
  return 0.0;  // not an integer >= 1
}

/*
 * Taylor expansion about s = 1 of the interference response
 *
 *   G(s) = 1 + sum_q v_q (F(a_q, -d; 1-d; -s x) - 1),   d = 2/alpha,
 *   x = threshold * rate_sig / rate_int,  a_q = mu_int + q,
 *
 * where F is the Gauss hypergeometric function.  Differentiating k times,
 *
 *   G_k = (-1)^{k+1} sum_q v_q (a_q)_k / k! * d/(k-d) * x^k
 *                    * F(a_q+k, k-d; 1+k-d; -x),   k >= 1,
 *
 * using ((-d))_k / ((1-d))_k = -d/(k-d).  Every factor after the leading sign
 * is positive, so each coefficient is a same-sign sum: no cancellation, and
 * the whole magnitude can be assembled in the log domain.
 */
PowerSeries interference_taylor(double threshold, double alpha, double rate_sig,
                                const fading::GammaMixture& imix, std::size_t order) {
  const double d = 2.0 / alpha;
  const double x = threshold * rate_sig / imix.rate;
  const double lx = std::log(x);
  const double ld = std::log(d);
  const std::size_t nq = imix.weights.size();

  std::vector<double> lg_a(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    lg_a[q] = specfun::log_gamma(imix.component_shape(q));
  }

  PowerSeries g;
  g.center = 1.0;
  g.coeffs.assign(order + 1, 0.0);

  double g0 = 1.0;
  for (std::size_t q = 0; q < nq; ++q) {
    const double logf = specfun::detail::log_hyp2f1_neg(imix.component_shape(q), 1.0 - d, -x);
    g0 += imix.weights[q] * std::expm1(logf);
  }
  g.coeffs[0] = g0;

  for (std::size_t k = 1; k <= order; ++k) {
    const double kd = static_cast<double>(k);
    const double lg_k = std::lgamma(kd + 1.0);
    double sum = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const double a = imix.component_shape(q);
      const double logf = specfun::detail::log_hyp2f1_neg(a + kd, 1.0 + kd - d, -x);
      const double l = specfun::log_gamma(a + kd) - lg_a[q] - lg_k + ld - std::log(kd - d) +
                       kd * lx + logf;
      sum += imix.weights[q] * std::exp(l);
    }
    g.coeffs[k] = (k % 2 == 1) ? sum : -sum;
  }
  return g;
}

/*
 * Prefix alternating sums A_j = sum_{n<=j} (-1)^n h_n of the reciprocal
 * series h = 1/G.  A_j is the coverage probability of a pure Gamma(j+1)
 * desired link, so every prefix lies in [0, 1].
 */
std::vector<double> alternating_prefix(const PowerSeries& h) {
  std::vector<double> a(h.coeffs.size());
  double acc = 0.0;
  for (std::size_t n = 0; n < h.coeffs.size(); ++n) {
    acc += (n % 2 == 0) ? h.coeffs[n] : -h.coeffs[n];
    a[n] = acc;
  }
  return a;
}

}  // namespace

NetworkModel::NetworkModel(double density_, double alpha_, fading::FadingParams desired_,
                           fading::FadingParams interferer_)
    : density(density_), alpha(alpha_), desired(desired_), interferer(interferer_) {
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw std::invalid_argument("NetworkModel: density must be positive and finite");
  }
  if (!(alpha > 2.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("NetworkModel: path-loss exponent must exceed 2");
  }
}

const char* method_name(Method m) {
  switch (m) {
    case Method::exact_integer_mu: return "EXACT_INTEGER_MU";
    case Method::rician_approx: return "RICIAN_APPROX";
    case Method::automatic: return "AUTO";
  }
  return "UNKNOWN";
}

double g_function(double s, double threshold, const NetworkModel& model,
                  const fading::GammaMixture& interferer_mix) {
  validate_threshold(threshold);
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("g_function: s must be positive and finite");
  }
  const double d = 2.0 / model.alpha;
  const double x = s * threshold * model.desired.rate() / interferer_mix.rate;
  double g = 1.0;
  for (std::size_t q = 0; q < interferer_mix.weights.size(); ++q) {
    const double logf =
        specfun::detail::log_hyp2f1_neg(interferer_mix.component_shape(q), 1.0 - d, -x);
    g += interferer_mix.weights[q] * std::expm1(logf);
  }
  return g;
}

PowerSeries g_taylor(double threshold, const NetworkModel& model,
                     const fading::GammaMixture& interferer_mix, std::size_t order) {
  validate_threshold(threshold);
  return interference_taylor(threshold, model.alpha, model.desired.rate(), interferer_mix,
                             order);
}

CoverageResult coverage_exact(const NetworkModel& model, const CoverageQuery& query) {
  validate_threshold(query.threshold);
  const double mu0 = rounded_integer_mu(model.desired.mu);
  if (mu0 == 0.0) {
    throw std::invalid_argument(
        "coverage_exact: desired-link mu must be a positive integer; "
        "use the Rician approximation for fractional mu");
  }

  const fading::GammaMixture mw = fading::mixture_weights(model.desired, query.eps_weights);
  const fading::GammaMixture mv = fading::mixture_weights(model.interferer, query.eps_weights);

  const std::size_t shape0 = static_cast<std::size_t>(mu0);
  const std::size_t needed = mw.weights.size() - 1 + shape0 - 1;
  if (needed > query.max_series_order) {
    throw numeric_error(
        "coverage_exact: required derivative order " + std::to_string(needed) +
        " exceeds max_series_order " + std::to_string(query.max_series_order) +
        "; raise the cap or loosen eps_weights");
  }

  const PowerSeries g =
      interference_taylor(query.threshold, model.alpha, model.desired.rate(), mv, needed);
  const PowerSeries h = specfun::series_reciprocal(g);
  const std::vector<double> a = alternating_prefix(h);

  double value = 0.0;
  for (std::size_t l = 0; l < mw.weights.size(); ++l) {
    value += mw.weights[l] * a[l + shape0 - 1];
  }
  if (!std::isfinite(value)) {
    throw numeric_error("coverage_exact: series evaluation lost finiteness");
  }

  CoverageResult res;
  res.value = std::clamp(value, 0.0, 1.0);
  res.method_used = Method::exact_integer_mu;
  res.l_terms = mw.weights.size();
  res.q_terms = mv.weights.size();
  res.max_derivative_order = needed;
  res.residual_estimate = mw.residual + mv.residual;
  return res;
}

RicianApproxTerms rician_terms(double mu0, double c0, std::size_t l_max, double eps) {
  if (!(mu0 >= 1.0) || !std::isfinite(mu0)) {
    throw std::domain_error("rician_terms: desired-link mu must be at least 1");
  }
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    throw std::invalid_argument("rician_terms: rate must be positive and finite");
  }

  RicianApproxTerms out;
  out.mu0 = mu0;
  out.c0 = c0;
  out.terms.reserve(l_max + 1);
  for (std::size_t l = 0; l <= l_max; ++l) {
    // Match Gamma(l + mu0, 1/c0) in mean and second moment: the Rician factor
    // solves (K+1)^2/(2K+1) = l + mu0, the mean is carried over unchanged.
    const double shape = static_cast<double>(l) + mu0;
    RicianApproxTerm t;
    t.k_factor = shape - 1.0 + std::sqrt(shape * (shape - 1.0));
    t.omega_mean = shape / c0;
    t.erlang_rate = (1.0 + t.k_factor) / t.omega_mean;
    t.poisson_weights =
        fading::detail::truncated_poisson(t.k_factor, eps, 10000, t.poisson_residual);
    out.terms.push_back(std::move(t));
  }
  return out;
}

CoverageResult coverage_approx(const NetworkModel& model, const CoverageQuery& query) {
  validate_threshold(query.threshold);
  if (!(model.desired.mu >= 1.0)) {
    throw std::domain_error(
        "coverage_approx: the moment-matched expansion needs desired-link mu >= 1");
  }

  const fading::GammaMixture mw = fading::mixture_weights(model.desired, query.eps_weights);
  const fading::GammaMixture mv = fading::mixture_weights(model.interferer, query.eps_weights);
  const std::size_t nl = mw.weights.size();

  const RicianApproxTerms rt =
      rician_terms(model.desired.mu, model.desired.rate(), nl - 1, query.eps_weights);

  std::size_t max_order = 0;
  for (const RicianApproxTerm& t : rt.terms) {
    max_order = std::max(max_order, t.poisson_weights.size() - 1);
  }
  if (max_order > query.max_series_order) {
    throw numeric_error(
        "coverage_approx: required derivative order " + std::to_string(max_order) +
        " exceeds max_series_order " + std::to_string(query.max_series_order) +
        "; raise the cap or loosen eps_weights");
  }

  std::vector<double> per_l(nl, 0.0);
  std::atomic<bool> failed{false};
  std::string fail_what;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t li = 0; li < static_cast<std::ptrdiff_t>(nl); ++li) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      const RicianApproxTerm& t = rt.terms[static_cast<std::size_t>(li)];
      const std::size_t order = t.poisson_weights.size() - 1;
      const PowerSeries g =
          interference_taylor(query.threshold, model.alpha, t.erlang_rate, mv, order);
      const PowerSeries h = specfun::series_reciprocal(g);
      const std::vector<double> a = alternating_prefix(h);
      double v = 0.0;
      for (std::size_t p = 0; p < t.poisson_weights.size(); ++p) {
        v += t.poisson_weights[p] * a[p];
      }
      per_l[static_cast<std::size_t>(li)] = v;
    } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        failed.store(true, std::memory_order_relaxed);
        fail_what = e.what();
      }
    }
  }
  if (failed.load()) throw numeric_error("coverage_approx: " + fail_what);

  double value = 0.0;
  double weight_residual = 0.0;
  for (std::size_t l = 0; l < nl; ++l) {
    value += mw.weights[l] * per_l[l];
    weight_residual += mw.weights[l] * rt.terms[l].poisson_residual;
  }
  if (!std::isfinite(value)) {
    throw numeric_error("coverage_approx: series evaluation lost finiteness");
  }

  CoverageResult res;
  res.value = std::clamp(value, 0.0, 1.0);
  res.method_used = Method::rician_approx;
  res.l_terms = nl;
  res.q_terms = mv.weights.size();
  res.max_derivative_order = max_order;
  res.residual_estimate = mw.residual + mv.residual + weight_residual;
  return res;
}

CoverageResult compute_coverage(const NetworkModel& model, const CoverageQuery& query) {
  switch (query.method) {
    case Method::exact_integer_mu:
      return coverage_exact(model, query);
    case Method::rician_approx:
      return coverage_approx(model, query);
    case Method::automatic:
      break;
  }
  if (rounded_integer_mu(model.desired.mu) != 0.0) return coverage_exact(model, query);
  return coverage_approx(model, query);
}

double conditional_coverage(const NetworkModel& model, double threshold, double r,
                            double eps_weights, std::size_t max_series_order) {
  validate_threshold(threshold);
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("conditional_coverage: distance must be positive and finite");
  }
  const double mu0 = rounded_integer_mu(model.desired.mu);
  if (mu0 == 0.0) {
    throw std::invalid_argument(
        "conditional_coverage: desired-link mu must be a positive integer");
  }

  const fading::GammaMixture mw = fading::mixture_weights(model.desired, eps_weights);
  const fading::GammaMixture mv = fading::mixture_weights(model.interferer, eps_weights);
  const std::size_t shape0 = static_cast<std::size_t>(mu0);
  const std::size_t needed = mw.weights.size() - 1 + shape0 - 1;
  if (needed > max_series_order) {
    throw numeric_error("conditional_coverage: required derivative order exceeds the cap");
  }

  const PowerSeries g =
      interference_taylor(threshold, model.alpha, model.desired.rate(), mv, needed);

  // Laplace transform of the conditional interference load: exp(-a (G(s) - 1))
  // with a = pi * density * r^2.  Expand the exponent, then exponentiate the
  // series; the alternating prefix of the result replaces 1/G.
  const double a = 3.14159265358979323846 * model.density * r * r;
  PowerSeries qs;
  qs.center = 1.0;
  qs.coeffs.assign(g.coeffs.size(), 0.0);
  qs.coeffs[0] = -a * (g.coeffs[0] - 1.0);
  for (std::size_t k = 1; k < g.coeffs.size(); ++k) qs.coeffs[k] = -a * g.coeffs[k];
  const PowerSeries e = specfun::series_exp(qs);

  double acc = 0.0;
  std::vector<double> prefix(e.coeffs.size());
  for (std::size_t n = 0; n < e.coeffs.size(); ++n) {
    acc += (n % 2 == 0) ? e.coeffs[n] : -e.coeffs[n];
    prefix[n] = acc;
  }

  double value = 0.0;
  for (std::size_t l = 0; l < mw.weights.size(); ++l) {
    value += mw.weights[l] * prefix[l + shape0 - 1];
  }
  if (!std::isfinite(value)) {
    throw numeric_error("conditional_coverage: series evaluation lost finiteness");
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace kmu::coverage
