#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kmu/fading.hpp"
#include "kmu/specfun.hpp"

namespace kmu::coverage {

// Single-tier Poisson downlink, interference limited: the user attaches to the
// nearest base station, every other station interferes.
struct NetworkModel {
  double density;                  // base stations per unit area
  double alpha;                    // path-loss exponent, > 2
  fading::FadingParams desired;    // serving-link power law
  fading::FadingParams interferer; // interfering-link power law

  NetworkModel(double density, double alpha, fading::FadingParams desired,
               fading::FadingParams interferer);
};

enum class Method {
  exact_integer_mu,  // alternating-derivative sum; needs integer desired mu
  rician_approx,     // Rician moment-matched expansion; needs desired mu >= 1
  automatic,         // exact when desired mu is integer, approximation otherwise
};

const char* method_name(Method m);

struct CoverageQuery {
  double threshold = 1.0;  // linear SIR threshold
  Method method = Method::automatic;
  double eps_weights = 1e-9;          // truncation residual for all mixture weights
  std::size_t max_series_order = 64;  // cap on the derivative order of the series engine
};

struct CoverageResult {
  double value = 0.0;
  Method method_used = Method::automatic;
  std::size_t l_terms = 0;             // desired-link mixture terms used
  std::size_t q_terms = 0;             // interferer mixture terms used
  std::size_t max_derivative_order = 0;
  double residual_estimate = 0.0;      // truncated probability mass (upper bound on bias)
};

// Moment-matched Rician expansion of one Gamma component of the desired link:
// Gamma(l + mu0, 1/c0) is matched in first and second moments by a Rician
// power law with factor k_factor and mean omega_mean, itself an Erlang mixture
// with Poisson weights and common rate erlang_rate.
struct RicianApproxTerm {
  double k_factor;
  double omega_mean;
  double erlang_rate;
  std::vector<double> poisson_weights;
  double poisson_residual;
};

struct RicianApproxTerms {
  double mu0;
  double c0;
  std::vector<RicianApproxTerm> terms;  // index l = 0 .. l_max
};

RicianApproxTerms rician_terms(double mu0, double c0, std::size_t l_max, double eps);

// Interference response
//   G(s) = 1 + sum_q v_q (2F1(q + mu_i, -2/alpha; 1 - 2/alpha; -s T c0/c_i) - 1)
// evaluated at s > 0.  The network density cancels out of this quantity.
double g_function(double s, double threshold, const NetworkModel& model,
                  const fading::GammaMixture& interferer_mix);

// Taylor coefficients of G about s = 1 up to the requested order, computed
// from the hypergeometric derivative ladder in the log domain.
specfun::PowerSeries g_taylor(double threshold, const NetworkModel& model,
                              const fading::GammaMixture& interferer_mix, std::size_t order);

// Coverage probability P(SIR > threshold), exact for integer desired mu.
CoverageResult coverage_exact(const NetworkModel& model, const CoverageQuery& query);

// Coverage probability through the Rician moment-matched expansion
// (desired mu >= 1, not necessarily integer).
CoverageResult coverage_approx(const NetworkModel& model, const CoverageQuery& query);

// Dispatches on query.method.
CoverageResult compute_coverage(const NetworkModel& model, const CoverageQuery& query);

// P(SIR > threshold | serving distance r).  Integrating this against the
// nearest-station distance density reproduces coverage_exact.
double conditional_coverage(const NetworkModel& model, double threshold, double r,
                            double eps_weights = 1e-9, std::size_t max_series_order = 64);

}  // namespace kmu::coverage
