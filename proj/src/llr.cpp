// Statistics of the per-period log-likelihood-ratio term y = a log x - b x.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ptc/analysis.hpp"
#include "ptc/errors.hpp"
#include "ptc/quadrature.hpp"
#include "ptc/random.hpp"
#include "ptc/specfun.hpp"

namespace ptc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using specfun::LambertBranch;

// One solution x > 0 of a log x - b x = y with log|dx/dy| at that point.
struct Preimage {
  double x;
  double log_x;
  double log_jacobian;
};

void require_nondegenerate(double a, double b) {
  if (a == 0.0 && b == 0.0) throw DegenerateError("log-likelihood-ratio term is identically zero");
}

std::vector<Preimage> preimages(double y, double a, double b) {
  require_nondegenerate(a, b);
  std::vector<Preimage> out;
  if (a == 0.0) {
    const double x = -y / b;
    if (x > 0.0 && std::isfinite(x)) out.push_back({x, std::log(x), -std::log(std::fabs(b))});
    return out;
  }
  if (b == 0.0) {
    const double log_x = y / a;
    const double x = std::exp(log_x);
    if (std::isfinite(x)) out.push_back({x, log_x, log_x - std::log(std::fabs(a))});
    return out;
  }
  // x = -(a/b) W(s), s = -(b/a) exp(y/a).
  const double ratio = a / b;
  const double log_abs_ratio = std::log(std::fabs(ratio));
  const double log_abs_s = -log_abs_ratio + y / a;
  const double log_abs_b = std::log(std::fabs(b));
  auto push = [&](double w) {
    const double one_plus_w = 1.0 + w;
    if (one_plus_w == 0.0) return;
    // log|w| = log|s| - w cancels badly for large |w|; use it only when w is tiny.
    const double log_abs_w = std::fabs(w) > 1e-300 ? std::log(std::fabs(w)) : log_abs_s - w;
    const double log_x = log_abs_ratio + log_abs_w;
    const double x = std::exp(log_x);
    if (!(x > 0.0) || !std::isfinite(x)) return;
    out.push_back({x, log_x, log_abs_w - log_abs_b - std::log(std::fabs(one_plus_w))});
  };
  if (ratio < 0.0) {
    push(specfun::lambert_w0_exp(log_abs_s));
  } else {
    if (log_abs_s > -1.0) return out;
    push(specfun::lambert_w_negexp(LambertBranch::principal, log_abs_s));
    push(specfun::lambert_w_negexp(LambertBranch::lower, log_abs_s));
  }
  return out;
}

double gamma_log_pdf_at(const GammaParams& p, double x, double log_x) {
  return p.shape * std::log(p.rate) - specfun::ln_gamma(p.shape) + (p.shape - 1.0) * log_x - p.rate * x;
}

// Rough location and spread of y, used only to place quadrature breakpoints.
void locate(const GammaParams& data, double a, double b, double& center, double& scale) {
  const double mean_x = data.mean();
  center = a * std::log(mean_x) - b * mean_x;
  scale = std::fabs(a) * std::sqrt(specfun::trigamma(data.shape)) + std::fabs(b) * std::sqrt(data.variance());
  if (!(scale > 0.0)) scale = 1.0;
}

// Integrates g over the support of y. A finite endpoint carries a square-root
// singularity of the density, removed by y = endpoint -+ t^2.
template <class G>
double integrate_over_support(G&& g, const LlrSupport& s, double center, double scale, double& error) {
  quad::Options opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-11;
  opt.max_subdivisions = 8000;
  const double offsets[] = {-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0};
  quad::Result r;
  if (std::isinf(s.low) && std::isinf(s.high)) {
    std::vector<double> breaks{-kInf};
    for (double k : offsets) breaks.push_back(center + k * scale);
    breaks.push_back(kInf);
    r = quad::integrate_pieces(g, breaks, opt);
  } else {
    const bool upper = std::isfinite(s.high);
    const double end = upper ? s.high : s.low;
    const double sign = upper ? -1.0 : 1.0;
    auto h = [&](double t) { return 2.0 * t * g(end + sign * t * t); };
    std::vector<double> breaks{0.0};
    for (double k : offsets) {
      const double y = center + k * scale;
      const double d = sign * (y - end);
      if (d > 0.0) breaks.push_back(std::sqrt(d));
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.push_back(kInf);
    r = quad::integrate_pieces(h, breaks, opt);
  }
  error = r.error;
  if (!r.converged && r.error > 1e-8 * std::fmax(1.0, std::fabs(r.value))) {
    throw ConvergenceError("log-likelihood-ratio moment quadrature", r.error);
  }
  return r.value;
}

LlrTermMoments moments_quadrature(const GammaParams& data, double a, double b) {
  LlrTermMoments m;
  m.method = MomentMethod::quadrature;
  if (a == 0.0) {
    m.mean = -b * data.mean();
    m.variance = b * b * data.variance();
    return m;
  }
  if (b == 0.0) {
    m.mean = a * (specfun::digamma(data.shape) - std::log(data.rate));
    m.variance = a * a * specfun::trigamma(data.shape);
    return m;
  }
  const LlrSupport s = linear_log_support(a, b);
  double center, scale, err;
  locate(data, a, b, center, scale);
  auto pdf = [&](double y) { return linear_log_pdf(y, data, a, b); };
  m.mean = integrate_over_support([&](double y) { return y * pdf(y); }, s, center, scale, err);
  m.variance = integrate_over_support(
      [&](double y) {
        const double d = y - m.mean;
        return d * d * pdf(y);
      },
      s, center, scale, err);
  return m;
}

LlrTermMoments moments_monte_carlo(const GammaParams& data, double a, double b, std::size_t draws,
                                   std::uint64_t seed) {
  if (draws < 2) throw DomainError("Monte Carlo moments need at least two draws");
  Rng rng(seed);
  // Welford with fourth central moment for the variance standard error.
  double n = 0.0, mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    double x;
    do {
      x = rng.gamma(data.shape) / data.rate;
    } while (!(x > 0.0));
    const double y = a * std::log(x) - b * x;
    const double n1 = n;
    n += 1.0;
    const double delta = y - mean;
    const double dn = delta / n;
    const double dn2 = dn * dn;
    const double t1 = delta * dn * n1;
    mean += dn;
    m4 += t1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * m2 - 4.0 * dn * m3;
    m3 += t1 * dn * (n - 2.0) - 3.0 * dn * m2;
    m2 += t1;
  }
  LlrTermMoments m;
  m.method = MomentMethod::monte_carlo;
  m.mean = mean;
  m.variance = m2 / (n - 1.0);
  m.mean_se = std::sqrt(m.variance / n);
  const double mu4 = m4 / n;
  const double var = m2 / n;
  m.variance_se = std::sqrt(std::fmax(mu4 - var * var, 0.0) / n);
  return m;
}

}  // namespace

LlrSupport linear_log_support(double a, double b) {
  require_nondegenerate(a, b);
  if (a == 0.0) return b > 0.0 ? LlrSupport{-kInf, 0.0} : LlrSupport{0.0, kInf};
  if (b == 0.0 || a / b < 0.0) return {-kInf, kInf};
  const double extremum = a * std::log(a / b) - a;
  return a > 0.0 ? LlrSupport{-kInf, extremum} : LlrSupport{extremum, kInf};
}

double linear_log_pdf(double y, const GammaParams& data, double a, double b) {
  validate(data);
  double f = 0.0;
  for (const auto& p : preimages(y, a, b)) {
    f += std::exp(gamma_log_pdf_at(data, p.x, p.log_x) + p.log_jacobian);
  }
  return f;
}

LlrTermMoments linear_log_moments(const GammaParams& data, double a, double b, MomentMethod method,
                                  std::size_t draws, std::uint64_t seed) {
  validate(data);
  require_nondegenerate(a, b);
  return method == MomentMethod::quadrature ? moments_quadrature(data, a, b)
                                            : moments_monte_carlo(data, a, b, draws, seed);
}

double llr_term_pdf(double y, const GammaParams& j, const GammaParams& k) {
  return linear_log_pdf(y, j, j.shape - k.shape, j.rate - k.rate);
}

LlrTermMoments llr_term_moments(const GammaParams& j, const GammaParams& k, MomentMethod method,
                                std::size_t draws, std::uint64_t seed) {
  validate(k);
  return linear_log_moments(j, j.shape - k.shape, j.rate - k.rate, method, draws, seed);
}

NoisyLlrVariance noisy_llr_variance_parts(const GammaParams& j, const GammaParams& k, double ts) {
  validate(j);
  validate(k);
  if (!(ts > 0.0)) throw DomainError("sampling period must be positive");
  const double a = j.shape - k.shape;
  const double b = j.rate - k.rate;
  require_nondegenerate(a, b);

  auto density = [&](double x) { return noisy_gamma_pdf(x, j, ts); };
  auto real_part = [&](double x) { return a * std::log(std::fabs(x)) - b * x; };

  // The noisy density has kinks at -ts, 0 and ts; the real part a log|x| at 0.
  std::vector<double> breaks{-ts, 0.0, ts};
  const double mean = j.mean();
  const double sd = std::sqrt(j.variance());
  for (double c : {mean, mean + 3.0 * sd, mean + 10.0 * sd}) {
    if (c > breaks.back()) breaks.push_back(c);
  }
  breaks.push_back(kInf);

  quad::Options opt;
  opt.abs_tol = 1e-12;
  opt.rel_tol = 1e-10;
  opt.max_subdivisions = 8000;
  auto check = [](const quad::Result& r, const char* what) {
    if (!r.converged && r.error > 1e-7 * std::fmax(1.0, std::fabs(r.value))) {
      throw ConvergenceError(what, r.error);
    }
    return r.value;
  };

  const double mu = check(
      quad::integrate_pieces([&](double x) { return x == 0.0 ? 0.0 : real_part(x) * density(x); }, breaks, opt),
      "noisy LLR mean quadrature");
  const double var_r = check(quad::integrate_pieces(
                                 [&](double x) {
                                   if (x == 0.0) return 0.0;
                                   const double d = real_part(x) - mu;
                                   return d * d * density(x);
                                 },
                                 breaks, opt),
                             "noisy LLR variance quadrature");
  const double p_neg =
      check(quad::integrate(density, -ts, 0.0, opt), "noisy negative-mass quadrature");
  const double p = std::fmin(1.0, std::fmax(0.0, p_neg));
  const double var_i = std::numbers::pi * std::numbers::pi * a * a * p * (1.0 - p);
  return {var_r, var_i, p};
}

double noisy_llr_variance(const GammaParams& j, const GammaParams& k, double ts) {
  return noisy_llr_variance_parts(j, k, ts).total();
}

double noisy_llr_real_pdf(double y, const GammaParams& j, const GammaParams& k, double ts) {
  validate(j);
  validate(k);
  if (!(ts > 0.0)) throw DomainError("sampling period must be positive");
  const double a = j.shape - k.shape;
  const double b = j.rate - k.rate;
  double f = 0.0;
  // x~ > 0: y = a log x~ - b x~.
  for (const auto& p : preimages(y, a, b)) {
    f += noisy_gamma_pdf(p.x, j, ts) * std::exp(p.log_jacobian);
  }
  // x~ = -u with 0 < u < ts: y = a log u + b u.
  for (const auto& p : preimages(y, a, -b)) {
    if (p.x < ts) f += noisy_gamma_pdf(-p.x, j, ts) * std::exp(p.log_jacobian);
  }
  return f;
}

}  // namespace ptc
