#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kmu {

// Thrown when a series or iteration fails to converge within its cap, or a
// truncation cannot reach the requested residual.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kmu

namespace kmu::specfun {

// Truncated Taylor series about a real center: f(s) ~ sum_k coeffs[k] (s - center)^k.
// The k-th derivative at the center equals k! * coeffs[k].
struct PowerSeries {
  double center = 1.0;
  std::vector<double> coeffs;

  std::size_t order() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }

  // Constructs and rejects non-finite coefficients.
  static PowerSeries validated(double center, std::vector<double> coeffs);
};

// ln Gamma(x) for x > 0.
double log_gamma(double x);

// ln |Gamma(x)| with the sign of Gamma(x) in `sign`; poles rejected.
double lgamma_signed(double x, int& sign);

// Rising factorial (a)_k = a (a+1) ... (a+k-1); (a)_0 = 1.
double pochhammer(double a, std::size_t k);

// Regularized upper incomplete gamma Q(q, y) = Gamma(q, y) / Gamma(q),
// q > 0, y >= 0.  Series for y < q+1, continued fraction otherwise.
double reg_upper_gamma(double q, double y);

// Kummer confluent hypergeometric 1F1(a; b; z).  Negative z handled through
// the Kummer transformation to keep the series terms single-signed.
double hyp1f1(double a, double b, double z);

// Gauss hypergeometric 2F1(a, b; c; z) for z <= 0.  Pfaff transformation onto
// [0,1) is the main path; very negative z switches to the inverse-argument
// linear transformation when a-b is not near an integer.
double hyp2f1(double a, double b, double c, double z);

// Partial (incomplete) exponential Bell polynomial B_{n,k}(x_1, ..., x_{n-k+1}).
double bell_partial(std::size_t n, std::size_t k, std::span<const double> x);

// Taylor coefficients of 1/g from those of g (g.coeffs[0] != 0 required).
PowerSeries series_reciprocal(const PowerSeries& g);

// Taylor coefficients of exp(q(s)) from those of q.
PowerSeries series_exp(const PowerSeries& q);

namespace detail {

// Direct defining series; converges for |z| < 1, used as a cross-check path
// and for terminating (polynomial) cases.
double hyp2f1_direct_series(double a, double b, double c, double z);

// Pfaff-transformed series for z <= 0.
double hyp2f1_pfaff(double a, double b, double c, double z);

// log 2F1(a, c-1; c; z) for z <= 0, a > 0, c > 0.  This is the parameter
// family of the interference response and its derivative ladder; the value is
// positive, so it is computed fully in the log domain (no overflow for large
// ladder orders where the linear-scale value underflows).
double log_hyp2f1_neg(double a, double c, double z);

// log 1F1(a; b; z) for a, b > 0, z >= 0 (single-signed series, scaled).
double log_hyp1f1_pos(double a, double b, double z);

}  // namespace detail

}  // namespace kmu::specfun
