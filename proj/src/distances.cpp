#include "ptc/distances.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "ptc/errors.hpp"
#include "ptc/quadrature.hpp"
#include "ptc/specfun.hpp"

namespace ptc {

using specfun::digamma;
using specfun::ln_gamma;

double kl_gamma(const GammaParams& j, const GammaParams& k) {
  validate(j);
  validate(k);
  const double d = (j.shape - k.shape) * digamma(j.shape) - ln_gamma(j.shape) + ln_gamma(k.shape) +
                   k.shape * (std::log(j.rate) - std::log(k.rate)) + j.shape * (k.rate - j.rate) / j.rate;
  return d > 0.0 ? d : 0.0;
}

double sh_gamma(const GammaParams& first, const GammaParams& second) {
  validate(first);
  validate(second);
  if (first == second) return 0.0;
  // Fixed evaluation order so that the result is exactly symmetric.
  const bool swap = std::tie(first.shape, first.rate) > std::tie(second.shape, second.rate);
  const GammaParams& j = swap ? second : first;
  const GammaParams& k = swap ? first : second;
  const double half_shape = 0.5 * (j.shape + k.shape);
  const double log_c = 0.5 * (j.shape * std::log(j.rate) + k.shape * std::log(k.rate) - ln_gamma(j.shape) -
                              ln_gamma(k.shape));
  const double log_bc = log_c + ln_gamma(half_shape) - half_shape * std::log(0.5 * (j.rate + k.rate));
  const double h = -std::expm1(log_bc);
  return std::fmin(1.0, std::fmax(0.0, h));
}

bool hellinger_lower_bound_check(const GammaParams& j, const GammaParams& k) {
  return kl_gamma(j, k) >= sh_gamma(j, k) - 1e-12;
}

double alf_pdf(double x, double shape, const RatePrior& prior) {
  validate(prior);
  validate(GammaParams{shape, 1.0});
  if (!(x > 0.0)) throw DomainError("alf_pdf: x must be positive, got " + std::to_string(x));
  if (std::isinf(x)) return 0.0;
  const double width = prior.high - prior.low;
  if (width < 1e-4 * prior.low) {
    // Narrow prior: the difference of incomplete gammas loses most digits.
    auto f = [&](double beta) { return specfun::gamma_pdf(x, {shape, beta}); };
    return quad::integrate(f, prior.low, prior.high, {0.0, 1e-13, 50}).value / width;
  }
  const double a1 = shape + 1.0;
  const double lo = prior.low * x;
  const double hi = prior.high * x;
  if (hi < 1e-12) {
    // Leading term of P(a+1, z); also avoids x*x underflow.
    const double log_moment = std::log(std::pow(prior.high, a1) - std::pow(prior.low, a1));
    return std::exp((shape - 1.0) * std::log(x) + log_moment - std::log(width) - std::log(a1) - ln_gamma(shape));
  }
  const double lga1 = ln_gamma(a1);
  double diff;
  if (lo > a1) {
    diff = specfun::gamma_q(a1, lo, lga1) - specfun::gamma_q(a1, hi, lga1);
  } else {
    diff = specfun::gamma_p(a1, hi) - specfun::gamma_p(a1, lo);
  }
  const double h = shape * (diff / x) / (width * x);
  return h > 0.0 ? h : 0.0;
}

double alf_log_pdf(double x, double shape, const RatePrior& prior) {
  const double h = alf_pdf(x, shape, prior);
  return h > 0.0 ? std::fmax(std::log(h), -745.0) : -745.0;
}

double model_pdf(double x, const HypothesisModel& model) {
  if (model.has_fixed_rate()) return specfun::gamma_pdf(x, model.params());
  if (!(x > 0.0)) return 0.0;
  return alf_pdf(x, model.shape, model.prior());
}

double sh_alf(const HypothesisModel& j, const HypothesisModel& k) {
  validate(j);
  validate(k);
  if (j.has_fixed_rate() && k.has_fixed_rate()) return sh_gamma(j.params(), k.params());
  // Integrate in t = log x; the integrand decays like a power of x at both ends.
  auto integrand = [&](double t) {
    const double x = std::exp(t);
    if (x == 0.0 || std::isinf(x)) return 0.0;
    return std::sqrt(model_pdf(x, j) * model_pdf(x, k)) * x;
  };
  auto typical_rate = [](const HypothesisModel& m) {
    return m.has_fixed_rate() ? m.params().rate : m.prior().mean();
  };
  const double c = 0.5 * (std::log(j.shape / typical_rate(j)) + std::log(k.shape / typical_rate(k)));
  constexpr double inf = std::numeric_limits<double>::infinity();
  quad::Options opt;
  opt.abs_tol = 1e-10;
  opt.rel_tol = 1e-10;
  const auto r = quad::integrate_pieces(integrand, {-inf, c - 5.0, c, c + 3.0, inf}, opt);
  if (!r.converged && r.error > 1e-6) throw ConvergenceError("sh_alf quadrature", r.error);
  return std::fmin(1.0, std::fmax(0.0, 1.0 - r.value));
}

double sh_model(const HypothesisModel& j, const HypothesisModel& k) {
  if (j.has_fixed_rate() && k.has_fixed_rate()) return sh_gamma(j.params(), k.params());
  return sh_alf(j, k);
}

double min_pairwise_sh(const HypothesisSet& set, std::size_t j) {
  if (set.size() < 2) throw DomainError("min_pairwise_sh needs at least two hypotheses");
  if (j >= set.size()) throw DomainError("hypothesis index out of range");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k != j) best = std::fmin(best, sh_model(set.models[j], set.models[k]));
  }
  return best;
}

double average_sh(const HypothesisSet& set) {
  if (set.size() < 2) throw DomainError("average_sh needs at least two hypotheses");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t j = 0; j < set.size(); ++j) {
    for (std::size_t k = j + 1; k < set.size(); ++k) {
      sum += sh_model(set.models[j], set.models[k]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

}  // namespace ptc
