#include "ptc/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ptc/errors.hpp"

namespace ptc {

void validate(const GammaParams& params) {
  if (!(params.shape > 0.0) || !std::isfinite(params.shape)) {
    throw DomainError("gamma shape must be positive and finite, got " + std::to_string(params.shape));
  }
  if (!(params.rate > 0.0) || !std::isfinite(params.rate)) {
    throw DomainError("gamma rate must be positive and finite, got " + std::to_string(params.rate));
  }
}

namespace specfun {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIncompleteGammaIter = 2000;
constexpr double kInvE = 0.36787944117144233;

void require_positive(double x, const char* fn) {
  if (!(x > 0.0)) {
    throw DomainError(std::string(fn) + ": argument must be positive, got " + std::to_string(x));
  }
}

// Series for P(a, x); converges quickly for x < a + 1.
double series_p(double a, double x, double lga) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIncompleteGammaIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - lga);
    }
  }
  throw ConvergenceError("incomplete gamma series", std::fabs(term / sum));
}

// Continued fraction for Q(a, x) (modified Lentz); used for x >= a + 1.
double continued_fraction_q(double a, double x, double lga) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIncompleteGammaIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - lga) * h;
    }
  }
  throw ConvergenceError("incomplete gamma continued fraction", 0.0);
}

void check_incomplete_args(double a, double x, const char* fn) {
  require_positive(a, fn);
  if (!(x >= 0.0)) {
    throw DomainError(std::string(fn) + ": x must be nonnegative, got " + std::to_string(x));
  }
}

// W(s) near the branch point s = -1/e in terms of p = +-sqrt(2(e s + 1)).
double branch_point_series(double p) {
  return -1.0 +
         p * (1.0 + p * (-1.0 / 3.0 +
                         p * (11.0 / 72.0 +
                              p * (-43.0 / 540.0 +
                                   p * (769.0 / 17280.0 +
                                        p * (-221.0 / 8505.0 + p * (680863.0 / 43545600.0)))))));
}

double halley(double w, double s) {
  for (int i = 0; i < 50; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - s;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    if (denom == 0.0) break;
    const double dw = f / denom;
    w -= dw;
    if (std::fabs(dw) <= 1e-14 * std::fmax(1.0, std::fabs(w))) break;
  }
  return w;
}

// Solves w + log(w) = L (w > 0) or w + log(-w) = L (w < 0) by Halley steps.
double halley_log_form(double w, double L) {
  for (int i = 0; i < 50; ++i) {
    const double g = w + std::log(std::fabs(w)) - L;
    const double g1 = 1.0 + 1.0 / w;
    const double g2 = -1.0 / (w * w);
    const double dw = g / (g1 - 0.5 * g * g2 / g1);
    w -= dw;
    if (std::fabs(dw) <= 1e-15 * std::fmax(1.0, std::fabs(w))) break;
  }
  return w;
}

}  // namespace

double ln_gamma(double x) {
  require_positive(x, "ln_gamma");
  if (std::isinf(x)) return x;
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double gamma_p(double a, double x) {
  check_incomplete_args(a, x, "gamma_p");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double lga = ln_gamma(a);
  if (x < a + 1.0) return series_p(a, x, lga);
  return 1.0 - continued_fraction_q(a, x, lga);
}

double gamma_q(double a, double x, double ln_gamma_a) {
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - series_p(a, x, ln_gamma_a);
  return continued_fraction_q(a, x, ln_gamma_a);
}

double gamma_q(double a, double x) {
  check_incomplete_args(a, x, "gamma_q");
  return gamma_q(a, x, ln_gamma(a));
}

double upper_incomplete_gamma(double a, double x) {
  check_incomplete_args(a, x, "upper_incomplete_gamma");
  const double lga = ln_gamma(a);
  if (x == 0.0) return std::exp(lga);
  if (x < a + 1.0) return std::exp(lga) * (1.0 - series_p(a, x, lga));
  if (std::isinf(x)) return 0.0;
  // Q * Gamma(a) folds into the continued-fraction prefactor directly.
  return continued_fraction_q(a, x, 0.0);
}

double gamma_cdf(double x, const GammaParams& params) {
  validate(params);
  if (!(x >= 0.0)) throw DomainError("gamma_cdf: x must be nonnegative, got " + std::to_string(x));
  return gamma_p(params.shape, params.rate * x);
}

double gamma_log_pdf(double x, const GammaParams& params) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return params.shape * std::log(params.rate) + (params.shape - 1.0) * std::log(x) -
         params.rate * x - ln_gamma(params.shape);
}

double gamma_pdf(double x, const GammaParams& params) {
  if (!(x > 0.0)) return 0.0;
  return std::exp(gamma_log_pdf(x, params));
}

double digamma(double x) {
  require_positive(x, "digamma");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  const double tail =
      f * (-1.0 / 12 +
           f * (1.0 / 120 +
                f * (-1.0 / 252 + f * (1.0 / 240 + f * (-1.0 / 132 + f * (691.0 / 32760 + f * (-1.0 / 12)))))));
  return result + std::log(x) - 0.5 / x + tail;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double ix = 1.0 / x;
  const double f = ix * ix;
  const double tail =
      ix * (1.0 + ix * (0.5 + ix * (1.0 / 6 +
                                    f * (-1.0 / 30 +
                                         f * (1.0 / 42 +
                                              f * (-1.0 / 30 + f * (5.0 / 66 + f * (-691.0 / 2730 + f * (7.0 / 6)))))))));
  return result + tail;
}

double lambert_w(LambertBranch branch, double s) {
  if (std::isnan(s)) throw DomainError("lambert_w: NaN argument");
  if (std::fabs(s + kInvE) < 1e-12) return -1.0;
  if (s < -kInvE) throw DomainError("lambert_w: argument below -1/e: " + std::to_string(s));

  const double es1 = std::fma(std::numbers::e, s, 1.0);
  const double p = std::sqrt(std::fmax(0.0, 2.0 * es1));

  if (branch == LambertBranch::principal) {
    if (s == 0.0) return 0.0;
    if (std::isinf(s)) return s;
    if (p < 1e-3) return branch_point_series(p);
    double w;
    if (s < -0.25) {
      w = branch_point_series(p);
    } else if (s < 3.0) {
      w = std::log1p(s);
    } else {
      const double L = std::log(s);
      return halley_log_form(L - std::log(L), L);
    }
    return halley(w, s);
  }

  if (!(s < 0.0)) throw DomainError("lambert_w: lower branch requires s < 0, got " + std::to_string(s));
  if (p < 1e-3) return branch_point_series(-p);
  if (s < -0.25) return halley(branch_point_series(-p), s);
  const double L1 = std::log(-s);
  const double L2 = std::log(-L1);
  return halley_log_form(L1 - L2 + L2 / L1, L1);
}

double lambert_w0_exp(double log_s) {
  if (std::isnan(log_s)) throw DomainError("lambert_w0_exp: NaN argument");
  if (log_s < -700.0) return std::exp(log_s);
  if (log_s <= 1.0) return lambert_w(LambertBranch::principal, std::exp(log_s));
  return halley_log_form(log_s - std::log(log_s), log_s);
}

double lambert_w_negexp(LambertBranch branch, double log_s) {
  if (std::isnan(log_s)) throw DomainError("lambert_w_negexp: NaN argument");
  if (log_s > -1.0) {
    if (log_s + 1.0 < 1e-12) return -1.0;
    throw DomainError("lambert_w_negexp: log argument above -1: " + std::to_string(log_s));
  }
  // e*s + 1 = 1 - exp(log_s + 1) without cancellation against -1/e.
  const double p = std::sqrt(-2.0 * std::expm1(log_s + 1.0));
  const bool lower = branch == LambertBranch::lower;
  if (p < 1e-3) return branch_point_series(lower ? -p : p);
  if (!lower) {
    if (log_s < -700.0) return -std::exp(log_s);
    return lambert_w(branch, -std::exp(log_s));
  }
  if (log_s > std::log(0.25)) return halley(branch_point_series(-p), -std::exp(log_s));
  const double L2 = std::log(-log_s);
  return halley_log_form(log_s - L2 + L2 / log_s, log_s);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

}  // namespace specfun
}  // namespace ptc
