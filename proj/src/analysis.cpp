#include "ptc/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include "ptc/errors.hpp"
#include "ptc/random.hpp"
#include "ptc/specfun.hpp"

namespace ptc {
namespace {

using specfun::ln_gamma;

struct PairTerms {
  double log_constant;  // per-period constant of the log ratio (times n later)
  double mean;
  double variance;
};

using PairTable = std::vector<std::vector<PairTerms>>;

void require_pc_inputs(const HypothesisSet& set, double n) {
  validate(set);
  if (set.size() < 2) throw DomainError("classification accuracy needs at least two hypotheses");
  if (!set.all_fixed()) throw DomainError("analytic accuracy needs a fixed rate on every hypothesis");
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("period count must be positive");
  const auto p = set.params();
  for (std::size_t j = 0; j < p.size(); ++j) {
    for (std::size_t k = j + 1; k < p.size(); ++k) {
      if (p[j] == p[k]) {
        throw DegenerateError("hypotheses " + std::to_string(j + 1) + " and " + std::to_string(k + 1) +
                              " are identical");
      }
    }
  }
}

// Pr{correct | H_j} = prod_{k != j} Q(tau_jk), with
// tau_jk = -(log(pi_j/pi_k) + n c_jk + n mu_jk) / sqrt(n sigma2_jk).
std::vector<double> conditional_from_terms(const HypothesisSet& set, double n, const PairTable& t) {
  std::vector<double> out(set.size());
  for (std::size_t j = 0; j < set.size(); ++j) {
    double prod = 1.0;
    for (std::size_t k = 0; k < set.size(); ++k) {
      if (k == j) continue;
      const auto& e = t[j][k];
      if (!(e.variance > 0.0)) throw DegenerateError("log-likelihood-ratio term has zero variance");
      const double numer = std::log(set.priors[j] / set.priors[k]) + n * e.log_constant + n * e.mean;
      prod *= specfun::q_function(-numer / std::sqrt(n * e.variance));
    }
    out[j] = prod;
  }
  return out;
}

double pc_from_terms(const HypothesisSet& set, double n, const PairTable& t) {
  const auto given = conditional_from_terms(set, n, t);
  double total = 0.0;
  for (std::size_t j = 0; j < set.size(); ++j) total += set.priors[j] * given[j];
  return total;
}

double clean_constant(const GammaParams& j, const GammaParams& k) {
  return j.shape * std::log(j.rate) - k.shape * std::log(k.rate) + ln_gamma(k.shape) - ln_gamma(j.shape);
}

PairTable clean_terms(const HypothesisSet& set, MomentMethod method) {
  const auto p = set.params();
  const std::size_t m = p.size();
  PairTable t(m, std::vector<PairTerms>(m));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      if (j == k) continue;
      const auto mom = llr_term_moments(p[j], p[k], method, 1'000'000, derive_seed(0x5eed, j, k));
      t[j][k] = {clean_constant(p[j], p[k]), mom.mean, mom.variance};
    }
  }
  return t;
}

}  // namespace

double analytical_pc_mlc(const HypothesisSet& set, double n, MomentMethod method) {
  require_pc_inputs(set, n);
  return pc_from_terms(set, n, clean_terms(set, method));
}

std::vector<double> analytical_pc_mlc_given(const HypothesisSet& set, double n, MomentMethod method) {
  require_pc_inputs(set, n);
  return conditional_from_terms(set, n, clean_terms(set, method));
}

double analytical_pc_mlc_noisy(const HypothesisSet& set, double n, double ts) {
  require_pc_inputs(set, n);
  if (!(ts > 0.0)) throw DomainError("sampling period must be positive");
  PairTable t = clean_terms(set, MomentMethod::quadrature);
  const auto p = set.params();
  for (std::size_t j = 0; j < p.size(); ++j) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (j != k) t[j][k].variance = noisy_llr_variance(p[j], p[k], ts);
    }
  }
  return pc_from_terms(set, n, t);
}

double analytical_pc_etc(const HypothesisSet& set, double n) {
  require_pc_inputs(set, n);
  const auto p = set.params();
  const std::size_t m = p.size();
  PairTable t(m, std::vector<PairTerms>(m));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      if (j == k) continue;
      const double aj = p[j].shape, ak = p[k].shape, bj = p[j].rate;
      if (aj == ak) {
        throw DegenerateError("estimate-then-classify accuracy is undefined for hypotheses " +
                              std::to_string(j + 1) + " and " + std::to_string(k + 1) + " with equal shapes");
      }
      // Rate of H_k replaced by the limit of its estimate under H_j, ak * bj / aj.
      const double a = aj - ak;
      const double b = (aj - ak) / aj * bj;
      const auto mom = linear_log_moments(p[j], a, b);
      const double c = ak * std::log(aj) + (aj - ak) * std::log(bj) - ak * std::log(ak) + ln_gamma(ak) - ln_gamma(aj);
      t[j][k] = {c, mom.mean, mom.variance};
    }
  }
  return pc_from_terms(set, n, t);
}

SeriesSum expected_samples_series(const GammaParams& params, double ts, double tail_tolerance) {
  validate(params);
  if (!(ts > 0.0)) throw DomainError("sampling period must be positive");
  if (!(tail_tolerance > 0.0)) throw DomainError("tail tolerance must be positive");
  const double a = params.shape;
  const double step = params.rate * ts;
  const double lga = ln_gamma(a);
  const double lga1 = lga + std::log(a);
  // sum_{k>K} Q(a, k step) <= int_K^inf Q(a, t step) dt = (a Q(a+1, z) - z Q(a, z)) / step, z = K step.
  auto tail = [&](double z) {
    return std::fmax(0.0, a * specfun::gamma_q(a + 1.0, z, lga1) - z * specfun::gamma_q(a, z, lga)) / step;
  };
  constexpr std::size_t kMaxTerms = 2'000'000'000;
  double sum = 1.0;
  for (std::size_t k = 1; k <= kMaxTerms; ++k) {
    const double z = static_cast<double>(k) * step;
    sum += specfun::gamma_q(a, z, lga);
    const double bound = tail(z);
    if (bound < tail_tolerance) return {sum, k, bound};
  }
  throw ConvergenceError("expected sample count series", tail(static_cast<double>(kMaxTerms) * step));
}

double expected_samples_given(const GammaParams& params, double ts) {
  return expected_samples_series(params, ts).value;
}

double expected_samples_per_period(const HypothesisSet& set, double ts) {
  validate(set);
  double total = 0.0;
  const auto p = set.params();
  for (std::size_t j = 0; j < p.size(); ++j) total += set.priors[j] * expected_samples_given(p[j], ts);
  return total;
}

double expected_samples_exponential(double lambda, double ts) {
  if (!(lambda > 0.0) || !(ts > 0.0)) throw DomainError("rate and sampling period must be positive");
  return 1.0 / -std::expm1(-lambda * ts);
}

double expected_samples_erlang2(double lambda, double ts) {
  if (!(lambda > 0.0) || !(ts > 0.0)) throw DomainError("rate and sampling period must be positive");
  const double x = lambda * ts;
  const double q = std::exp(-x);
  const double one_minus_q = -std::expm1(-x);
  return (one_minus_q + x * q) / (one_minus_q * one_minus_q);
}

double misdetection_rate(const GammaParams& params, double ts) {
  if (!(ts >= 0.0)) throw DomainError("sampling period must be nonnegative");
  return specfun::gamma_cdf(ts, params);
}

double expected_periods_given(const GammaParams& params, double window, double ts) {
  if (!(window > 0.0)) throw DomainError("observation window must be positive");
  return window / params.mean() * (1.0 - misdetection_rate(params, ts));
}

double expected_periods(const HypothesisSet& set, double window, double ts) {
  validate(set);
  double total = 0.0;
  const auto p = set.params();
  for (std::size_t j = 0; j < p.size(); ++j) total += set.priors[j] * expected_periods_given(p[j], window, ts);
  return total;
}

double sampling_period_for(double window, std::size_t samples) {
  if (samples < 2) throw DomainError("at least two samples are needed for a finite sampling period");
  if (!(window > 0.0)) throw DomainError("observation window must be positive");
  return window / static_cast<double>(samples - 1);
}

PcEvaluator analytic_pc_evaluator(const HypothesisSet& set) {
  require_pc_inputs(set, 1.0);
  return [set](double window, std::size_t samples) {
    const double ts = sampling_period_for(window, samples);
    const double k = expected_periods(set, window, ts);
    if (!(k > 0.0)) return *std::max_element(set.priors.begin(), set.priors.end());
    return analytical_pc_mlc_noisy(set, k, ts);
  };
}

namespace {

// Least-squares parabola through (u_i, v_i); returns false unless it opens downwards.
bool fit_parabola(const std::vector<double>& u, const std::vector<double>& v, double& vertex) {
  std::array<double, 5> s{};  // sums of u^0..u^4
  std::array<double, 3> r{};  // sums of v u^0..u^2
  for (std::size_t i = 0; i < u.size(); ++i) {
    double p = 1.0;
    for (int d = 0; d < 5; ++d) {
      s[d] += p;
      if (d < 3) r[d] += v[i] * p;
      p *= u[i];
    }
  }
  // Normal equations [s0 s1 s2; s1 s2 s3; s2 s3 s4] c = r by Cramer's rule.
  auto det3 = [](double a, double b, double c, double d, double e, double f, double g, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  };
  const double d = det3(s[0], s[1], s[2], s[1], s[2], s[3], s[2], s[3], s[4]);
  if (d == 0.0) return false;
  const double c1 = det3(s[0], r[0], s[2], s[1], r[1], s[3], s[2], r[2], s[4]) / d;
  const double c2 = det3(s[0], s[1], r[0], s[1], s[2], r[1], s[2], s[3], r[2]) / d;
  if (!(c2 < 0.0)) return false;
  vertex = -c1 / (2.0 * c2);
  return true;
}

}  // namespace

GuidelineResult guideline_solve(const HypothesisSet& set, const GuidelineConstraint& c,
                                const PcEvaluator& evaluator, const GuidelineOptions& opt) {
  validate(set);
  if (!(c.epsilon >= 0.0 && c.epsilon < 1.0)) throw DomainError("epsilon must lie in [0, 1)");
  if (!(c.fixed_value > 0.0)) throw DomainError("fixed value must be positive");
  GuidelineResult res;

  if (c.mode == GuidelineMode::fix_time_min_samples) {
    const double window = c.fixed_value;
    std::map<std::size_t, double> cache;
    auto pc = [&](std::size_t n) {
      auto it = cache.find(n);
      if (it != cache.end()) return it->second;
      ++res.evaluations;
      return cache[n] = evaluator(window, n);
    };
    auto finish = [&](std::size_t n, bool feasible) {
      res.window = window;
      res.samples = n;
      res.sampling_period = sampling_period_for(window, n);
      res.achieved_pc = pc(n);
      res.feasible = feasible;
      return res;
    };
    if (pc(2) >= c.epsilon) return finish(2, true);
    std::size_t lo = 2, hi = 4;
    while (pc(hi) < c.epsilon) {
      lo = hi;
      if (hi >= opt.max_samples) {
        std::size_t best = 2;
        for (const auto& [n, v] : cache) {
          if (v > cache[best]) best = n;
        }
        return finish(best, false);
      }
      hi = std::min(2 * hi, opt.max_samples);
    }
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      (pc(mid) >= c.epsilon ? hi : lo) = mid;
    }
    return finish(hi, true);
  }

  const double nf = std::round(c.fixed_value);
  if (nf < 2.0) throw DomainError("fix-samples mode needs N >= 2");
  const auto samples = static_cast<std::size_t>(nf);
  if (!(opt.window_min > 0.0) || !(opt.window_max > opt.window_min) || opt.grid_points < 3) {
    throw DomainError("invalid observation window grid");
  }
  res.samples = samples;
  const std::size_t g = opt.grid_points;
  std::vector<double> u(g), v(g);
  const double lmin = std::log(opt.window_min), lmax = std::log(opt.window_max);
  for (std::size_t i = 0; i < g; ++i) {
    u[i] = lmin + (lmax - lmin) * static_cast<double>(i) / static_cast<double>(g - 1);
    v[i] = evaluator(std::exp(u[i]), samples);
    ++res.evaluations;
  }
  const std::size_t best = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  res.peak_window = std::exp(u[best]);
  res.peak_pc = v[best];
  const std::size_t from = best >= opt.fit_halfwidth ? best - opt.fit_halfwidth : 0;
  const std::size_t to = std::min(g - 1, best + opt.fit_halfwidth);
  std::vector<double> fu, fv;
  for (std::size_t i = from; i <= to; ++i) {
    fu.push_back(u[i] - u[best]);
    fv.push_back(v[i]);
  }
  double vertex;
  if (fu.size() >= 3 && fit_parabola(fu, fv, vertex)) {
    vertex = std::clamp(vertex, fu.front(), fu.back());
    const double w = std::exp(u[best] + vertex);
    const double pv = evaluator(w, samples);
    ++res.evaluations;
    res.peak_window = w;
    res.peak_pc = pv;
  }

  // Smallest T meeting epsilon: first grid crossing refined by bisection in log T.
  std::size_t first = g;
  for (std::size_t i = 0; i < g; ++i) {
    if (v[i] >= c.epsilon) {
      first = i;
      break;
    }
  }
  if (first == g) {
    res.window = res.peak_window;
    res.achieved_pc = res.peak_pc;
    res.feasible = res.peak_pc >= c.epsilon;
  } else if (first == 0) {
    res.window = std::exp(u[0]);
    res.achieved_pc = v[0];
    res.feasible = true;
  } else {
    double lo = u[first - 1], hi = u[first], hi_pc = v[first];
    for (int it = 0; it < 12; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double pm = evaluator(std::exp(mid), samples);
      ++res.evaluations;
      if (pm >= c.epsilon) {
        hi = mid;
        hi_pc = pm;
      } else {
        lo = mid;
      }
    }
    res.window = std::exp(hi);
    res.achieved_pc = hi_pc;
    res.feasible = true;
  }
  res.sampling_period = sampling_period_for(res.window, samples);
  return res;
}

double normalized_loss(double pc_clean, double pc_noisy) {
  if (!(pc_clean > 0.0)) throw DomainError("normalized loss needs a positive clean accuracy");
  return (pc_clean - pc_noisy) / pc_clean;
}

}  // namespace ptc
