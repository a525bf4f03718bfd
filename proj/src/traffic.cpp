#include "ptc/traffic.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ptc/errors.hpp"
#include "ptc/quadrature.hpp"
#include "ptc/specfun.hpp"

namespace ptc {

void validate(const RatePrior& prior) {
  if (!(prior.low > 0.0) || !(prior.high > prior.low) || !std::isfinite(prior.high)) {
    throw DomainError("rate prior requires 0 < low < high, got (" + std::to_string(prior.low) +
                      ", " + std::to_string(prior.high) + ")");
  }
}

HypothesisModel HypothesisModel::fixed(double shape, double rate, std::string label) {
  return {shape, FixedRate{rate}, std::move(label)};
}

HypothesisModel HypothesisModel::uniform(double shape, double low, double high, std::string label) {
  return {shape, RatePrior{low, high}, std::move(label)};
}

GammaParams HypothesisModel::params() const {
  if (const auto* f = std::get_if<FixedRate>(&rate_spec)) return {shape, f->rate};
  throw DomainError("hypothesis '" + label + "' has a rate prior, not a fixed rate");
}

const RatePrior& HypothesisModel::prior() const {
  if (const auto* p = std::get_if<RatePrior>(&rate_spec)) return *p;
  throw DomainError("hypothesis '" + label + "' has a fixed rate, not a rate prior");
}

void validate(const HypothesisModel& model) {
  if (model.has_fixed_rate()) {
    validate(model.params());
  } else {
    validate(GammaParams{model.shape, 1.0});
    validate(model.prior());
  }
}

HypothesisSet HypothesisSet::equiprobable(std::vector<HypothesisModel> models) {
  const std::size_t m = models.size();
  return {std::move(models), std::vector<double>(m, m ? 1.0 / static_cast<double>(m) : 0.0)};
}

bool HypothesisSet::all_fixed() const noexcept {
  for (const auto& m : models) {
    if (!m.has_fixed_rate()) return false;
  }
  return true;
}

bool HypothesisSet::all_uniform() const noexcept {
  for (const auto& m : models) {
    if (m.has_fixed_rate()) return false;
  }
  return true;
}

std::vector<GammaParams> HypothesisSet::params() const {
  std::vector<GammaParams> out;
  out.reserve(models.size());
  for (const auto& m : models) out.push_back(m.params());
  return out;
}

void validate(const HypothesisSet& set) {
  if (set.models.empty()) throw DomainError("hypothesis set is empty");
  if (set.models.size() != set.priors.size()) {
    throw DomainError("hypothesis set has " + std::to_string(set.models.size()) + " models but " +
                      std::to_string(set.priors.size()) + " priors");
  }
  for (const auto& m : set.models) validate(m);
  double sum = 0.0;
  for (double p : set.priors) {
    if (!(p > 0.0)) throw DomainError("prior probabilities must be positive");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw DomainError("prior probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
}

PeriodSample generate_periods(const GammaParams& params, std::size_t n, Rng& rng, PeriodKind kind) {
  validate(params);
  PeriodSample out{std::vector<double>(n), kind};
  for (auto& v : out.values) {
    double g;
    // A shape well below one can underflow to exactly zero; periods must stay positive.
    do {
      g = rng.gamma(params.shape) / params.rate;
    } while (!(g > 0.0));
    v = g;
  }
  return out;
}

PeriodSample generate_periods(const HypothesisModel& model, std::size_t n, Rng& rng) {
  return generate_periods(model.params(), n, rng);
}

double draw_rate(const RatePrior& prior, Rng& rng) {
  validate(prior);
  return rng.uniform(prior.low, prior.high);
}

NoisyPeriods inject_sampling_noise(const PeriodSample& x, double sampling_period, Rng& rng) {
  if (!(sampling_period > 0.0)) throw DomainError("sampling period must be positive");
  NoisyPeriods out{x.values, sampling_period};
  for (auto& v : out.values) {
    const double a = rng.uniform(0.0, sampling_period);
    const double b = rng.uniform(0.0, sampling_period);
    v += a - b;
  }
  return out;
}

double mve_estimate(double outer, double inner) { return 0.5 * (outer + inner); }

double weighted_estimate(double outer, double inner, double w) { return w * outer + (1.0 - w) * inner; }

SampledTrace sample_binary_trace(const PeriodSample& on, const PeriodSample& off,
                                 double sampling_period, Rng& rng) {
  if (!(sampling_period > 0.0)) throw DomainError("sampling period must be positive");
  if (off.values.size() < on.values.size() + 1) {
    throw DomainError("trace needs at least one more OFF period than ON periods");
  }
  const double ts = sampling_period;
  const double phase = rng.uniform(0.0, ts);
  // Sample m sits at phase + m * ts.
  auto first_at_or_after = [&](double t) { return std::ceil((t - phase) / ts); };
  auto last_at_or_before = [&](double t) { return std::floor((t - phase) / ts); };

  SampledTrace out;
  out.total = on.values.size();
  const double trace_end = std::accumulate(on.values.begin(), on.values.end(), 0.0) +
                           std::accumulate(off.values.begin(), off.values.begin() + static_cast<std::ptrdiff_t>(on.values.size()) + 1, 0.0);
  double t = 0.0;
  for (std::size_t i = 0; i < on.values.size(); ++i) {
    const double t0 = t;
    const double t1 = t0 + off.values[i];
    const double t2 = t1 + on.values[i];
    const double t3 = t2 + off.values[i + 1];
    t = t2;
    if (on.values[i] < ts) {
      ++out.missed;
      continue;
    }
    const double m2 = first_at_or_after(t1);
    const double m3 = last_at_or_before(t2);
    const double z2 = phase + m2 * ts;
    const double z3 = phase + m3 * ts;
    const double z1 = z2 - ts;
    const double z4 = z3 + ts;
    if (z1 < 0.0 || z4 > trace_end) {
      ++out.boundary;
      continue;
    }
    const bool distorted = z1 < t0 || z4 > t3;
    if (distorted) ++out.distorted;
    out.pairs.push_back({z4 - z1, z3 - z2, on.values[i], distorted});
  }
  return out;
}

double triangular_noise_pdf(double phi, double sampling_period) {
  if (!(sampling_period > 0.0)) throw DomainError("sampling period must be positive");
  const double a = std::fabs(phi);
  if (a >= sampling_period) return 0.0;
  return (sampling_period - a) / (sampling_period * sampling_period);
}

namespace {

// Direct convolution of the gamma density with the triangular noise density.
double convolve_noisy_pdf(double x, const GammaParams& p, double ts) {
  auto integrand = [&](double phi) {
    return specfun::gamma_pdf(x - phi, p) * (ts - std::fabs(phi)) / (ts * ts);
  };
  // The gamma density vanishes for phi >= x.
  const double upper = std::min(ts, x);
  if (upper <= -ts) return 0.0;
  std::vector<double> pieces{-ts};
  if (upper > 0.0) pieces.push_back(0.0);
  pieces.push_back(upper);
  quad::Options opt;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 1e-12;
  return quad::integrate_pieces(integrand, pieces, opt).value;
}

}  // namespace

double noisy_gamma_pdf(double x, const GammaParams& p, double ts) {
  validate(p);
  if (!(ts > 0.0)) throw DomainError("sampling period must be positive");
  if (x < -ts || std::isnan(x)) return 0.0;
  if (std::isinf(x)) return 0.0;

  // f = [H(x + ts) - 2 H(x) + H(x - ts)] / ts^2, with H'' the gamma density and
  // H(u) = u - a/b - u Q(a, bu) + (a/b) Q(a + 1, bu) for u > 0, 0 otherwise.
  const double a = p.shape;
  const double b = p.rate;
  const double mean = a / b;

  // The Q form cancels badly once the tail terms dwarf ts^2 f.
  if (x >= ts && (mean + x) / (b * ts * ts) > 1e8) return convolve_noisy_pdf(x, p, ts);
  if (x < ts && x > -ts && mean / (b * ts * ts) > 1e8) return convolve_noisy_pdf(x, p, ts);

  const double lga = specfun::ln_gamma(a);
  const double lga1 = lga + std::log(a);
  const double us[3] = {x + ts, x, x - ts};
  const double cs[3] = {1.0, -2.0, 1.0};
  double linear = 0.0;
  double tail = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double u = us[i];
    if (u <= 0.0) continue;
    linear += cs[i] * (u - mean);
    tail += cs[i] * (mean * specfun::gamma_q(a + 1.0, b * u, lga1) - u * specfun::gamma_q(a, b * u, lga));
  }
  // Linear parts cancel exactly when all three arguments are positive.
  if (x - ts > 0.0) linear = 0.0;
  const double f = (linear + tail) / (ts * ts);
  return f > 0.0 ? f : 0.0;
}

}  // namespace ptc
