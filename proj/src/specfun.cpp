#include "kmu/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kmu::specfun {

namespace {

constexpr int kSeriesCap = 10000;      // hard iteration cap for all series
constexpr double kTermEps = 1e-16;     // relative size at which a term counts as negligible
constexpr double kRescaleAt = 1e280;   // linear-scale accumulators rescale above this
const double kLogRescale = std::log(kRescaleAt);

// A series is considered settled after three consecutive negligible terms.
struct TailRule {
  int run = 0;
  bool settled(double term, double sum) {
    if (std::fabs(term) <= kTermEps * std::fabs(sum)) return ++run >= 3;
    run = 0;
    return false;
  }
};

bool near_integer(double v, double tol) { return std::fabs(v - std::round(v)) < tol; }

bool nonpositive_integer(double v) { return v <= 0.0 && near_integer(v, 1e-12); }

[[noreturn]] void fail_converge(const char* fn) {
  throw numeric_error(std::string(fn) + ": series did not converge within iteration cap");
}

}  // namespace

PowerSeries PowerSeries::validated(double center, std::vector<double> coeffs) {
  if (!std::isfinite(center)) throw std::domain_error("PowerSeries: non-finite center");
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw std::domain_error("PowerSeries: non-finite coefficient");
  }
  return PowerSeries{center, std::move(coeffs)};
}

double log_gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0) throw std::domain_error("log_gamma: requires finite x > 0");
  return std::lgamma(x);
}

double lgamma_signed(double x, int& sign) {
  if (!std::isfinite(x)) throw std::domain_error("lgamma_signed: non-finite argument");
  if (x > 0.0) {
    sign = 1;
    return std::lgamma(x);
  }
  if (near_integer(x, 1e-14)) throw std::domain_error("lgamma_signed: pole at non-positive integer");
  // Gamma alternates sign over the intervals (-k-1, -k), negative on (-1, 0).
  const long k = static_cast<long>(std::floor(-x));
  sign = (k % 2 == 0) ? -1 : 1;
  return std::lgamma(x);
}

double pochhammer(double a, std::size_t k) {
  if (!std::isfinite(a)) throw std::domain_error("pochhammer: non-finite base");
  double p = 1.0;
  for (std::size_t i = 0; i < k; ++i) p *= a + static_cast<double>(i);
  return p;
}

/*
 * Regularized incomplete gamma.  Lower series when y < q + 1, Lentz continued
 * fraction for the upper tail otherwise; both carried in the log domain so the
 * prefactor exp(-y + q ln y - lnGamma(q)) cannot overflow intermediate terms.
 */
double reg_upper_gamma(double q, double y) {
  if (!std::isfinite(q) || q <= 0.0) throw std::domain_error("reg_upper_gamma: requires q > 0");
  if (!std::isfinite(y) || y < 0.0) throw std::domain_error("reg_upper_gamma: requires y >= 0");
  if (y == 0.0) return 1.0;

  if (y < q + 1.0) {
    double ap = q;
    double sum = 1.0 / q;
    double del = sum;
    for (int i = 0; i < kSeriesCap; ++i) {
      ap += 1.0;
      del *= y / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * kTermEps) {
        const double lower = sum * std::exp(-y + q * std::log(y) - std::lgamma(q));
        return std::clamp(1.0 - lower, 0.0, 1.0);
      }
    }
    fail_converge("reg_upper_gamma");
  }

  constexpr double tiny = 1e-300;
  double b = y + 1.0 - q;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kSeriesCap; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - q);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kTermEps) {
      return std::clamp(h * std::exp(-y + q * std::log(y) - std::lgamma(q)), 0.0, 1.0);
    }
  }
  fail_converge("reg_upper_gamma");
}

double hyp1f1(double a, double b, double z) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z)) {
    throw std::domain_error("hyp1f1: non-finite argument");
  }
  if (nonpositive_integer(b)) throw std::domain_error("hyp1f1: b must not be a non-positive integer");
  if (z == 0.0) return 1.0;
  if (z < 0.0) {
    // Kummer transformation keeps all series terms of one sign.
    return std::exp(z) * hyp1f1(b - a, b, -z);
  }
  double term = 1.0, sum = 1.0;
  TailRule tail;
  for (int l = 0; l < kSeriesCap; ++l) {
    term *= (a + l) / (b + l) * z / (l + 1.0);
    sum += term;
    if (!std::isfinite(sum)) throw numeric_error("hyp1f1: sum overflow; use a scaled variant");
    if (term == 0.0 || tail.settled(term, sum)) return sum;
  }
  fail_converge("hyp1f1");
}

namespace detail {

double log_hyp1f1_pos(double a, double b, double z) {
  if (a <= 0.0 || b <= 0.0 || z < 0.0) throw std::domain_error("log_hyp1f1_pos: requires a,b > 0, z >= 0");
  double term = 1.0, sum = 1.0, offset = 0.0;
  TailRule tail;
  for (int l = 0; l < kSeriesCap; ++l) {
    term *= (a + l) / (b + l) * z / (l + 1.0);
    sum += term;
    if (sum > kRescaleAt) {
      sum /= kRescaleAt;
      term /= kRescaleAt;
      offset += kLogRescale;
    }
    if (tail.settled(term, sum)) return offset + std::log(sum);
  }
  fail_converge("log_hyp1f1_pos");
}

double hyp2f1_direct_series(double a, double b, double c, double z) {
  double term = 1.0, sum = 1.0;
  TailRule tail;
  for (int j = 0; j < kSeriesCap; ++j) {
    term *= (a + j) * (b + j) / (c + j) * z / (j + 1.0);
    sum += term;
    if (term == 0.0 || tail.settled(term, sum)) return sum;
  }
  fail_converge("hyp2f1_direct_series");
}

double hyp2f1_pfaff(double a, double b, double c, double z) {
  // 2F1(a,b;c;z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1)); pivot on the larger of
  // a,b so the prefactor exponent stays negative for z < 0.
  const double p = std::max(a, b);
  const double q = std::min(a, b);
  const double u = z / (z - 1.0);
  const double s = hyp2f1_direct_series(p, c - q, c, u);
  return std::exp(-p * std::log1p(-z)) * s;
}

namespace {

// Two-term inverse-argument linear transformation, valid for z < 0 when a - b
// is not an integer.  Returns the two addends' magnitudes and signs in the log
// domain so callers can combine them safely.
double hyp2f1_inverse_argument(double a, double b, double c, double z) {
  const double x = -z;
  const double w = 1.0 / z;
  const double lx = std::log(x);

  int sga, sgb, sgc1, sgc2;
  const double lc = lgamma_signed(c, sga);
  const int sign_c = sga;

  // term 1: G(c) G(b-a) / (G(b) G(c-a)) x^(-a) 2F1(a, a-c+1; a-b+1; 1/z)
  const double lg_ba = lgamma_signed(b - a, sgb);
  const double lg_b = lgamma_signed(b, sgc1);
  const double lg_ca = lgamma_signed(c - a, sgc2);
  const double s1 = hyp2f1_direct_series(a, a - c + 1.0, a - b + 1.0, w);
  int sign1 = sign_c * sgb * sgc1 * sgc2 * (s1 < 0 ? -1 : 1);
  const double l1 = lc + lg_ba - lg_b - lg_ca - a * lx + std::log(std::fabs(s1));

  // term 2: same with a and b exchanged
  const double lg_ab = lgamma_signed(a - b, sgb);
  const double lg_a = lgamma_signed(a, sgc1);
  const double lg_cb = lgamma_signed(c - b, sgc2);
  const double s2 = hyp2f1_direct_series(b, b - c + 1.0, b - a + 1.0, w);
  int sign2 = sign_c * sgb * sgc1 * sgc2 * (s2 < 0 ? -1 : 1);
  const double l2 = lc + lg_ab - lg_a - lg_cb - b * lx + std::log(std::fabs(s2));

  const double lmax = std::max(l1, l2);
  if (lmax > 700.0) throw numeric_error("hyp2f1: inverse-argument transform overflow");
  return sign1 * std::exp(l1) + sign2 * std::exp(l2);
}

}  // namespace

double log_hyp2f1_neg(double a, double c, double z) {
  // Computes log 2F1(a, c-1; c; z); the value of this family is positive for
  // all z <= 0 so a log-domain result is well defined.
  if (!(a > 0.0) || !(c > 0.0)) throw std::domain_error("log_hyp2f1_neg: requires a > 0, c > 0");
  if (!std::isfinite(z) || z > 0.0) throw std::domain_error("log_hyp2f1_neg: requires z <= 0");
  if (z == 0.0) return 0.0;

  const double x = -z;
  const double ab = a - c + 1.0;  // a - b for b = c - 1

  // Pfaff series with scaled accumulation: (1-z)^(-a) sum_j (a)_j/(c)_j u^j,
  // all terms positive.  Used for moderate x, and for large x when the
  // inverse-argument route is blocked by a near-integer a - b.
  const bool inverse_ok = !near_integer(ab, 1e-8) && ab > 0.0;
  if (x <= 40.0 || !inverse_ok) {
    const double u = x / (1.0 + x);
    double term = 1.0, sum = 1.0, offset = 0.0;
    TailRule tail;
    for (int j = 0; j < kSeriesCap; ++j) {
      term *= (a + j) / (c + j) * u;
      sum += term;
      if (sum > kRescaleAt) {
        sum /= kRescaleAt;
        term /= kRescaleAt;
        offset += kLogRescale;
      }
      if (tail.settled(term, sum)) return -a * std::log1p(x) + offset + std::log(sum);
    }
    fail_converge("log_hyp2f1_neg");
  }

  /*
   * Inverse-argument route for large x.  With b = c - 1 the second term of
   * the linear transformation collapses: its inner series is 2F1(b, 0; .; .)
   * = 1 and Gamma(c-b) = 1, leaving the closed form
   *     G2 = Gamma(c) Gamma(a-b) / Gamma(a) x^(-b).
   * The first term is smaller by a factor ~ x^(b-a) and is folded in through
   * log1p.
   */
  const double lx = std::log(x);
  const double log_g2 = std::lgamma(c) + std::lgamma(ab) - std::lgamma(a) - (c - 1.0) * lx;

  const double s1 = hyp2f1_direct_series(a, ab, ab + 1.0, 1.0 / z);
  int sg_ba, sg_b, sg_ca;
  const double lg_ba = lgamma_signed(-ab, sg_ba);
  const double lg_b = lgamma_signed(c - 1.0, sg_b);
  const double lg_ca = lgamma_signed(c - a, sg_ca);
  const int sign1 = sg_ba * sg_b * sg_ca * (s1 < 0 ? -1 : 1);
  const double log_g1 =
      std::lgamma(c) + lg_ba - lg_b - lg_ca - a * lx + std::log(std::fabs(s1));

  const double ratio = sign1 * std::exp(log_g1 - log_g2);
  if (ratio <= -1.0) throw numeric_error("log_hyp2f1_neg: cancellation in inverse-argument transform");
  return log_g2 + std::log1p(ratio);
}

}  // namespace detail

double hyp2f1(double a, double b, double c, double z) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(z)) {
    throw std::domain_error("hyp2f1: non-finite argument");
  }
  if (nonpositive_integer(c)) throw std::domain_error("hyp2f1: c must not be a non-positive integer");
  if (z > 0.0) throw std::domain_error("hyp2f1: requires z <= 0");
  if (z == 0.0) return 1.0;

  // Terminating cases are exact sums regardless of z.
  if (nonpositive_integer(a) || nonpositive_integer(b)) {
    return detail::hyp2f1_direct_series(a, b, c, z);
  }
  if (z >= -40.0) return detail::hyp2f1_pfaff(a, b, c, z);
  if (!near_integer(a - b, 1e-8)) return detail::hyp2f1_inverse_argument(a, b, c, z);
  // Near-integer a-b at very negative z: the Pfaff series is the only route
  // left; it converges slowly and may hit the cap, which raises numeric_error.
  return detail::hyp2f1_pfaff(a, b, c, z);
}

double bell_partial(std::size_t n, std::size_t k, std::span<const double> x) {
  if (k < 1 || k > n) throw std::domain_error("bell_partial: requires 1 <= k <= n");
  if (x.size() < n - k + 1) throw std::domain_error("bell_partial: needs x_1 .. x_{n-k+1}");
  if (n > 300) throw std::domain_error("bell_partial: order too large");

  // Pascal triangle up to n-1
  std::vector<std::vector<double>> binom(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    binom[i][0] = 1.0;
    for (std::size_t j = 1; j <= i; ++j) {
      binom[i][j] = binom[i - 1][j - 1] + (j <= i - 1 ? binom[i - 1][j] : 0.0);
    }
  }

  // B(i,j) = sum_{t=1}^{i-j+1} C(i-1, t-1) x_t B(i-t, j-1)
  std::vector<std::vector<double>> bell(n + 1, std::vector<double>(k + 1, 0.0));
  bell[0][0] = 1.0;
  for (std::size_t j = 1; j <= k; ++j) {
    for (std::size_t i = j; i <= n; ++i) {
      double acc = 0.0;
      for (std::size_t t = 1; t + j - 1 <= i && t <= i - j + 1; ++t) {
        acc += binom[i - 1][t - 1] * x[t - 1] * bell[i - t][j - 1];
      }
      bell[i][j] = acc;
    }
  }
  return bell[n][k];
}

PowerSeries series_reciprocal(const PowerSeries& g) {
  if (g.coeffs.empty()) throw std::domain_error("series_reciprocal: empty series");
  const double g0 = g.coeffs[0];
  if (g0 == 0.0 || !std::isfinite(g0)) {
    throw std::domain_error("series_reciprocal: constant term must be nonzero and finite");
  }
  std::vector<double> h(g.coeffs.size());
  h[0] = 1.0 / g0;
  for (std::size_t n = 1; n < h.size(); ++n) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= n; ++j) acc += g.coeffs[j] * h[n - j];
    h[n] = -acc / g0;
  }
  return PowerSeries::validated(g.center, std::move(h));
}

PowerSeries series_exp(const PowerSeries& q) {
  if (q.coeffs.empty()) throw std::domain_error("series_exp: empty series");
  std::vector<double> e(q.coeffs.size());
  e[0] = std::exp(q.coeffs[0]);
  for (std::size_t n = 1; n < e.size(); ++n) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= n; ++k) acc += static_cast<double>(k) * q.coeffs[k] * e[n - k];
    e[n] = acc / static_cast<double>(n);
  }
  return PowerSeries::validated(q.center, std::move(e));
}

}  // namespace kmu::specfun
