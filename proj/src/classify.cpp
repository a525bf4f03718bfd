#include "ptc/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "ptc/distances.hpp"
#include "ptc/errors.hpp"
#include "ptc/parallel.hpp"
#include "ptc/specfun.hpp"

namespace ptc {
namespace {

void require_positive_values(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("period sample is empty");
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("period values must be positive and finite, got " + std::to_string(v));
    }
  }
}

std::vector<double> log_priors(const HypothesisSet& set) {
  std::vector<double> out;
  out.reserve(set.priors.size());
  for (double p : set.priors) out.push_back(std::log(p));
  return out;
}

std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Running per-hypothesis log scores for a growing sample.
class Accumulator {
 public:
  virtual ~Accumulator() = default;
  virtual void push(double x) = 0;
  virtual std::vector<double> scores() const = 0;
};

// Scores that add one log density term per period.
class AdditiveAccumulator : public Accumulator {
 public:
  using LogDensity = std::function<double(std::size_t, double)>;

  AdditiveAccumulator(const HypothesisSet& set, LogDensity log_density)
      : scores_(log_priors(set)), log_density_(std::move(log_density)) {}

  void push(double x) override {
    for (std::size_t j = 0; j < scores_.size(); ++j) {
      scores_[j] += log_density_(j, x);
    }
  }
  std::vector<double> scores() const override { return scores_; }

 private:
  std::vector<double> scores_;
  LogDensity log_density_;
};

// Log likelihood with each rate replaced by its ML estimate from all periods so far.
class EtcAccumulator : public Accumulator {
 public:
  explicit EtcAccumulator(const HypothesisSet& set) : log_priors_(log_priors(set)) {
    for (const auto& m : set.models) {
      shapes_.push_back(m.shape);
      lgamma_.push_back(specfun::ln_gamma(m.shape));
    }
  }

  void push(double x) override {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw DomainError("period values must be positive and finite, got " + std::to_string(x));
    }
    ++n_;
    sum_ += x;
    sum_log_ += std::log(x);
  }

  std::vector<double> scores() const override {
    std::vector<double> out(shapes_.size());
    const double n = static_cast<double>(n_);
    for (std::size_t j = 0; j < shapes_.size(); ++j) {
      const double a = shapes_[j];
      const double rate = a * n / sum_;
      // beta_hat * sum(x) = a * n
      out[j] = log_priors_[j] + n * (a * std::log(rate) - lgamma_[j]) + (a - 1.0) * sum_log_ - a * n;
    }
    return out;
  }

 private:
  std::vector<double> log_priors_, shapes_, lgamma_;
  std::size_t n_ = 0;
  double sum_ = 0.0;
  double sum_log_ = 0.0;
};

Decision make_decision(const std::vector<double>& scores, std::size_t n, bool stopped) {
  Decision d;
  d.log_scores = scores;
  d.posteriors = normalize_log_scores(scores);
  d.chosen = argmax(scores);
  d.periods_used = n;
  d.stopped = stopped;
  return d;
}

Decision run_fixed(Accumulator& acc, const std::vector<double>& values) {
  for (double x : values) acc.push(x);
  return make_decision(acc.scores(), values.size(), true);
}

Decision run_sequential(Accumulator& acc, const PeriodSource& source, const MsprtConfig& cfg) {
  validate(cfg);
  // p > 1/(1 + gamma)  <=>  log p > -log(1 + gamma)
  const double threshold = -std::log1p(cfg.gamma_threshold);
  std::vector<double> scores;
  for (std::size_t n = 1; n <= cfg.max_periods; ++n) {
    const auto x = source();
    if (!x) {
      throw DomainError("period source exhausted after " + std::to_string(n - 1) +
                        " periods without a decision");
    }
    acc.push(*x);
    scores = acc.scores();
    const double lse = log_sum_exp(scores);
    const double best = scores[argmax(scores)] - lse;
    if (best > threshold) return make_decision(scores, n, true);
  }
  return make_decision(scores, cfg.max_periods, false);
}

std::unique_ptr<Accumulator> gamma_accumulator(const HypothesisSet& set) {
  validate(set);
  struct Coeffs {
    double shape, rate, constant;
  };
  std::vector<Coeffs> c;
  for (const auto& p : set.params()) {
    c.push_back({p.shape, p.rate, p.shape * std::log(p.rate) - specfun::ln_gamma(p.shape)});
  }
  return std::make_unique<AdditiveAccumulator>(set, [c](std::size_t j, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw DomainError("period values must be positive and finite, got " + std::to_string(x));
    }
    return c[j].constant + (c[j].shape - 1.0) * std::log(x) - c[j].rate * x;
  });
}

std::unique_ptr<Accumulator> noisy_accumulator(const HypothesisSet& set, double ts) {
  validate(set);
  if (!(ts > 0.0)) throw DomainError("sampling period must be positive");
  return std::make_unique<AdditiveAccumulator>(set, [params = set.params(), ts](std::size_t j, double x) {
    if (!(x > -ts) || !std::isfinite(x)) {
      throw DomainError("noisy period " + std::to_string(x) + " is outside (-T_s, inf)");
    }
    const double f = noisy_gamma_pdf(x, params[j], ts);
    return f > 0.0 ? std::log(f) : kLogDensityFloor;
  });
}

std::unique_ptr<Accumulator> alf_accumulator(const HypothesisSet& set) {
  validate(set);
  if (!set.all_uniform()) throw DomainError("ALF classification needs a rate prior on every hypothesis");
  return std::make_unique<AdditiveAccumulator>(set, [&set](std::size_t j, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw DomainError("period values must be positive and finite, got " + std::to_string(x));
    }
    return alf_log_pdf(x, set.models[j].shape, set.models[j].prior());  // floored
  });
}

}  // namespace

void validate(const MsprtConfig& cfg) {
  if (!(cfg.gamma_threshold >= 0.0)) throw DomainError("gamma threshold must be nonnegative");
  if (cfg.max_periods < 1) throw DomainError("max_periods must be at least 1");
  if (!(cfg.sweep_step > 0.0)) throw DomainError("sweep step must be positive");
}

PeriodSource vector_source(const std::vector<double>& values) {
  auto index = std::make_shared<std::size_t>(0);
  return [&values, index]() -> std::optional<double> {
    if (*index >= values.size()) return std::nullopt;
    return values[(*index)++];
  };
}

std::vector<double> normalize_log_scores(const std::vector<double>& log_scores) {
  const double lse = log_sum_exp(log_scores);
  std::vector<double> out(log_scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(log_scores[i] - lse);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

Decision mlc(const PeriodSample& x, const HypothesisSet& set) {
  require_positive_values(x.values);
  return run_fixed(*gamma_accumulator(set), x.values);
}

Decision msprt(const PeriodSource& source, const HypothesisSet& set, const MsprtConfig& cfg) {
  return run_sequential(*gamma_accumulator(set), source, cfg);
}

Decision mlc_noisy(const NoisyPeriods& x, const HypothesisSet& set) {
  if (x.values.empty()) throw DomainError("period sample is empty");
  return run_fixed(*noisy_accumulator(set, x.sampling_period), x.values);
}

Decision msprt_noisy(const PeriodSource& source, double sampling_period, const HypothesisSet& set,
                     const MsprtConfig& cfg) {
  return run_sequential(*noisy_accumulator(set, sampling_period), source, cfg);
}

double mle_rate(const PeriodSample& x, double shape) {
  require_positive_values(x.values);
  if (!(shape > 0.0)) throw DomainError("shape must be positive");
  double sum = 0.0;
  for (double v : x.values) sum += v;
  return shape * static_cast<double>(x.values.size()) / sum;
}

Decision etc_mlc(const PeriodSample& x, const HypothesisSet& set) {
  validate(set);
  require_positive_values(x.values);
  EtcAccumulator acc(set);
  return run_fixed(acc, x.values);
}

Decision etc_msprt(const PeriodSource& source, const HypothesisSet& set, const MsprtConfig& cfg) {
  validate(set);
  EtcAccumulator acc(set);
  return run_sequential(acc, source, cfg);
}

Decision alf_mlc(const PeriodSample& x, const HypothesisSet& set) {
  require_positive_values(x.values);
  return run_fixed(*alf_accumulator(set), x.values);
}

Decision alf_msprt(const PeriodSource& source, const HypothesisSet& set, const MsprtConfig& cfg) {
  return run_sequential(*alf_accumulator(set), source, cfg);
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::mlc: return "mlc";
    case Method::msprt: return "msprt";
    case Method::mlc_noisy: return "mlc-noisy";
    case Method::msprt_noisy: return "msprt-noisy";
    case Method::etc_mlc: return "etc-mlc";
    case Method::etc_msprt: return "etc-msprt";
    case Method::alf_mlc: return "alf-mlc";
    case Method::alf_msprt: return "alf-msprt";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  for (Method m : {Method::mlc, Method::msprt, Method::mlc_noisy, Method::msprt_noisy, Method::etc_mlc,
                   Method::etc_msprt, Method::alf_mlc, Method::alf_msprt}) {
    if (to_string(m) == name) return m;
  }
  throw DomainError("unknown method '" + std::string(name) + "'");
}

bool is_sequential(Method m) {
  return m == Method::msprt || m == Method::msprt_noisy || m == Method::etc_msprt || m == Method::alf_msprt;
}

bool is_noisy(Method m) { return m == Method::mlc_noisy || m == Method::msprt_noisy; }

void check_compatible(Method m, const HypothesisSet& set, const TrialSetup& setup) {
  validate(set);
  const std::string name(to_string(m));
  if ((m == Method::alf_mlc || m == Method::alf_msprt) && !set.all_uniform()) {
    throw DomainError(name + " needs a rate prior on every hypothesis");
  }
  if ((m == Method::mlc || m == Method::msprt || is_noisy(m)) && !set.all_fixed()) {
    throw DomainError(name + " needs a fixed rate on every hypothesis");
  }
  if (is_noisy(m) && !(setup.sampling_period > 0.0)) {
    throw DomainError(name + " needs a positive sampling period");
  }
  if (is_sequential(m)) {
    validate(setup.msprt);
  } else if (setup.n_periods < 1) {
    throw DomainError(name + " needs at least one period");
  }
}

TrialOutcome simulate_trial(Method m, const HypothesisSet& set, const TrialSetup& setup, Rng& rng) {
  const std::size_t truth = rng.categorical(set.priors);
  const HypothesisModel& model = set.models[truth];
  const double shape = model.shape;
  const double fixed_rate = model.has_fixed_rate() ? model.params().rate : draw_rate(model.prior(), rng);
  const bool noisy = is_noisy(m);
  const double ts = setup.sampling_period;

  auto next_period = [&]() {
    const double rate =
        (!model.has_fixed_rate() && setup.redraw_rate_per_period) ? draw_rate(model.prior(), rng) : fixed_rate;
    double x;
    do {
      x = rng.gamma(shape) / rate;
    } while (!(x > 0.0));
    if (noisy) {
      const double a = rng.uniform(0.0, ts);
      const double b = rng.uniform(0.0, ts);
      x += a - b;
    }
    return x;
  };

  if (is_sequential(m)) {
    PeriodSource source = [&]() -> std::optional<double> { return next_period(); };
    switch (m) {
      case Method::msprt: return {truth, msprt(source, set, setup.msprt)};
      case Method::msprt_noisy: return {truth, msprt_noisy(source, ts, set, setup.msprt)};
      case Method::etc_msprt: return {truth, etc_msprt(source, set, setup.msprt)};
      default: return {truth, alf_msprt(source, set, setup.msprt)};
    }
  }

  std::vector<double> values(setup.n_periods);
  for (auto& v : values) v = next_period();
  switch (m) {
    case Method::mlc: return {truth, mlc({values, PeriodKind::on}, set)};
    case Method::mlc_noisy: return {truth, mlc_noisy({values, ts}, set)};
    case Method::etc_mlc: return {truth, etc_mlc({values, PeriodKind::on}, set)};
    default: return {truth, alf_mlc({values, PeriodKind::on}, set)};
  }
}

Decision classify_values(Method m, const std::vector<double>& values, const HypothesisSet& set,
                         const TrialSetup& setup) {
  TrialSetup checked = setup;
  checked.n_periods = values.size();
  check_compatible(m, set, checked);
  const double ts = setup.sampling_period;
  if (is_sequential(m)) {
    const PeriodSource source = vector_source(values);
    switch (m) {
      case Method::msprt: return msprt(source, set, setup.msprt);
      case Method::msprt_noisy: return msprt_noisy(source, ts, set, setup.msprt);
      case Method::etc_msprt: return etc_msprt(source, set, setup.msprt);
      default: return alf_msprt(source, set, setup.msprt);
    }
  }
  switch (m) {
    case Method::mlc: return mlc({values, PeriodKind::on}, set);
    case Method::mlc_noisy: return mlc_noisy({values, ts}, set);
    case Method::etc_mlc: return etc_mlc({values, PeriodKind::on}, set);
    default: return alf_mlc({values, PeriodKind::on}, set);
  }
}

SweepResult sweep_gamma(const HypothesisSet& set, double target_pc, const MsprtConfig& cfg,
                        const SweepOptions& opt) {
  validate(cfg);
  if (!(target_pc > 0.0 && target_pc < 1.0)) throw DomainError("target accuracy must lie in (0, 1)");
  if (!is_sequential(opt.method)) throw DomainError("sweep_gamma needs a sequential method");
  if (opt.trials < 1) throw DomainError("sweep_gamma needs at least one trial");
  if (!(opt.gamma_start > 0.0) || !(opt.gamma_floor > 0.0) || opt.gamma_floor > opt.gamma_start) {
    throw DomainError("gamma sweep range must satisfy 0 < floor <= start");
  }
  TrialSetup setup;
  setup.sampling_period = opt.sampling_period;
  setup.msprt = cfg;
  check_compatible(opt.method, set, setup);

  SweepResult best;
  best.achieved_pc = -1.0;
  double gamma = opt.gamma_start;
  std::vector<char> correct(opt.trials);
  std::vector<std::size_t> used(opt.trials);
  std::vector<char> capped(opt.trials);
  for (std::size_t step = 1;; ++step) {
    setup.msprt.gamma_threshold = gamma;
    parallel_for(
        opt.trials,
        [&](std::size_t t) {
          Rng rng(derive_seed(opt.seed, t));
          const auto out = simulate_trial(opt.method, set, setup, rng);
          correct[t] = out.correct();
          used[t] = out.decision.periods_used;
          capped[t] = !out.decision.stopped;
        },
        opt.threads);
    double hits = 0.0, periods = 0.0;
    bool all_capped = true;
    for (std::size_t t = 0; t < opt.trials; ++t) {
      hits += correct[t];
      periods += static_cast<double>(used[t]);
      all_capped = all_capped && capped[t];
    }
    const double n = static_cast<double>(opt.trials);
    SweepResult cur;
    cur.gamma = gamma;
    cur.achieved_pc = hits / n;
    cur.ci_halfwidth = 1.96 * std::sqrt(cur.achieved_pc * (1.0 - cur.achieved_pc) / n);
    cur.mean_periods = periods / n;
    cur.steps = step;
    if (cur.achieved_pc >= target_pc) {
      cur.reachable = true;
      return cur;
    }
    if (cur.achieved_pc > best.achieved_pc) best = cur;
    if (all_capped || gamma <= opt.gamma_floor) {
      best.reachable = false;
      best.steps = step;
      return best;
    }
    gamma = std::fmax(opt.gamma_floor, gamma / (1.0 + cfg.sweep_step));
  }
}

}  // namespace ptc
