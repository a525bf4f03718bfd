#include "ptc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "ptc/errors.hpp"
#include "ptc/parallel.hpp"

namespace ptc {

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::n_periods: return "n_periods";
    case SweepVariable::sampling_period: return "T_s";
    case SweepVariable::samples: return "N_samples";
    case SweepVariable::window: return "T_time";
    case SweepVariable::gamma: return "gamma";
  }
  return "?";
}

SweepVariable sweep_variable_from_string(std::string_view name) {
  for (auto v : {SweepVariable::n_periods, SweepVariable::sampling_period, SweepVariable::samples,
                 SweepVariable::window, SweepVariable::gamma}) {
    if (to_string(v) == name) return v;
  }
  throw DomainError("unknown sweep variable '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.scenario);
  if (cfg.runs < 1) throw DomainError("runs must be at least 1");
  if (cfg.realizations < 1) throw DomainError("realizations must be at least 1");
  if (cfg.grid.empty()) throw DomainError("sweep grid is empty");
  const std::string name(to_string(cfg.classifier));
  const bool seq = is_sequential(cfg.classifier);
  for (double g : cfg.grid) {
    if (!std::isfinite(g)) throw DomainError("sweep grid values must be finite");
  }
  switch (cfg.sweep) {
    case SweepVariable::n_periods:
      if (seq) throw DomainError(name + " is sequential; sweep gamma instead of n_periods");
      for (double g : cfg.grid) {
        if (!(g >= 1.0) || g != std::floor(g)) throw DomainError("n_periods grid needs integers >= 1");
      }
      break;
    case SweepVariable::sampling_period:
      if (!is_noisy(cfg.classifier)) throw DomainError("sweeping T_s needs a noisy method");
      for (double g : cfg.grid) {
        if (!(g > 0.0)) throw DomainError("T_s grid needs positive values");
      }
      break;
    case SweepVariable::samples:
    case SweepVariable::window:
      if (!is_noisy(cfg.classifier)) throw DomainError("sampled-window sweeps need a noisy method");
      if (!cfg.scenario.all_fixed()) throw DomainError("sampled-window sweeps need fixed rates");
      for (double g : cfg.grid) {
        if (cfg.sweep == SweepVariable::samples && (!(g >= 2.0) || g != std::floor(g))) {
          throw DomainError("N_samples grid needs integers >= 2");
        }
        if (!(g > 0.0)) throw DomainError("grid values must be positive");
      }
      if (cfg.sweep == SweepVariable::samples && !(cfg.window > 0.0)) throw DomainError("window must be positive");
      if (cfg.sweep == SweepVariable::window && cfg.samples < 2) throw DomainError("samples must be at least 2");
      break;
    case SweepVariable::gamma:
      if (!seq) throw DomainError("sweeping gamma needs a sequential method");
      for (double g : cfg.grid) {
        if (!(g >= 0.0)) throw DomainError("gamma grid needs nonnegative values");
      }
      break;
  }
  TrialSetup setup;
  setup.n_periods = cfg.n_periods;
  setup.sampling_period = cfg.sweep == SweepVariable::sampling_period ? cfg.grid.front() : cfg.sampling_period;
  if (cfg.sweep == SweepVariable::samples || cfg.sweep == SweepVariable::window) setup.sampling_period = 1.0;
  setup.msprt = cfg.msprt;
  check_compatible(cfg.classifier, cfg.scenario, setup);
}

double batch_means_halfwidth(const std::vector<double>& values) {
  const std::size_t r = values.size();
  if (r < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(r);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(r - 1));
  const boost::math::students_t dist(static_cast<double>(r - 1));
  const double t = boost::math::quantile(dist, 0.975);
  return t * sd / std::sqrt(static_cast<double>(r));
}

TrialOutcome simulate_window_trial(Method m, const HypothesisSet& set, double window, std::size_t samples,
                                   const MsprtConfig& msprt, Rng& rng) {
  const double ts = sampling_period_for(window, samples);
  const std::size_t truth = rng.categorical(set.priors);
  const GammaParams p = set.models[truth].params();
  const double expected = expected_periods_given(p, window, ts);
  const double whole = std::floor(expected);
  const bool extra = rng.bernoulli(expected - whole);
  const auto k = static_cast<std::size_t>(whole) + (extra ? 1 : 0);
  if (k == 0) {
    Decision d;
    d.log_scores.resize(set.size());
    for (std::size_t j = 0; j < set.size(); ++j) d.log_scores[j] = std::log(set.priors[j]);
    d.posteriors = set.priors;
    d.chosen = static_cast<std::size_t>(std::max_element(set.priors.begin(), set.priors.end()) -
                                        set.priors.begin());
    d.periods_used = 0;
    return {truth, d};
  }
  auto next = [&]() {
    double x;
    do {
      x = rng.gamma(p.shape) / p.rate;
    } while (!(x > 0.0));
    const double a = rng.uniform(0.0, ts);
    const double b = rng.uniform(0.0, ts);
    return x + a - b;
  };
  if (is_sequential(m)) {
    MsprtConfig cfg = msprt;
    cfg.max_periods = std::min(cfg.max_periods, k);
    PeriodSource source = [&]() -> std::optional<double> { return next(); };
    return {truth, msprt_noisy(source, ts, set, cfg)};
  }
  std::vector<double> values(k);
  for (auto& v : values) v = next();
  return {truth, mlc_noisy({values, ts}, set)};
}

namespace {

struct Tally {
  char correct;
  std::size_t periods;
};

CurvePoint aggregate(double x, const std::vector<Tally>& tallies, std::size_t runs, std::size_t realizations) {
  std::vector<double> run_means(runs);
  double periods = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < realizations; ++i) {
      const auto& t = tallies[r * realizations + i];
      hits += static_cast<std::size_t>(t.correct);
      periods += static_cast<double>(t.periods);
    }
    run_means[r] = static_cast<double>(hits) / static_cast<double>(realizations);
  }
  CurvePoint p;
  p.x = x;
  double sum = 0.0;
  for (double v : run_means) sum += v;
  p.mean = sum / static_cast<double>(runs);
  p.ci_halfwidth = batch_means_halfwidth(run_means);
  p.n_effective = runs * realizations;
  p.mean_periods = periods / static_cast<double>(p.n_effective);
  return p;
}

}  // namespace

std::vector<CurvePoint> run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<CurvePoint> out;
  const std::size_t total = cfg.runs * cfg.realizations;
  std::vector<Tally> tallies(total);
  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    const double x = cfg.grid[gi];
    TrialSetup setup;
    setup.n_periods = cfg.n_periods;
    setup.sampling_period = cfg.sampling_period;
    setup.msprt = cfg.msprt;
    setup.redraw_rate_per_period = cfg.redraw_rate_per_period;
    double window = cfg.window;
    std::size_t samples = cfg.samples;
    switch (cfg.sweep) {
      case SweepVariable::n_periods: setup.n_periods = static_cast<std::size_t>(x); break;
      case SweepVariable::sampling_period: setup.sampling_period = x; break;
      case SweepVariable::samples: samples = static_cast<std::size_t>(x); break;
      case SweepVariable::window: window = x; break;
      case SweepVariable::gamma: setup.msprt.gamma_threshold = x; break;
    }
    const bool sampled_window = cfg.sweep == SweepVariable::samples || cfg.sweep == SweepVariable::window;
    parallel_for(
        total,
        [&](std::size_t task) {
          const std::size_t run = task / cfg.realizations;
          const std::size_t rep = task % cfg.realizations;
          Rng rng(derive_seed(cfg.master_seed, gi, run, rep));
          const TrialOutcome o = sampled_window
                                     ? simulate_window_trial(cfg.classifier, cfg.scenario, window, samples,
                                                             setup.msprt, rng)
                                     : simulate_trial(cfg.classifier, cfg.scenario, setup, rng);
          tallies[task] = {static_cast<char>(o.correct()), o.decision.periods_used};
        },
        cfg.threads);
    out.push_back(aggregate(x, tallies, cfg.runs, cfg.realizations));
  }
  return out;
}

std::vector<ComparisonRow> compare(const ExperimentConfig& a, const ExperimentConfig& b) {
  if (a.grid != b.grid) throw DomainError("compared experiments must share the sweep grid");
  const auto pa = run_experiment(a);
  const auto pb = run_experiment(b);
  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    rows.push_back({pa[i].x, pa[i], pb[i], pa[i].mean - pb[i].mean,
                    std::hypot(pa[i].ci_halfwidth, pb[i].ci_halfwidth)});
  }
  return rows;
}

PcEvaluator simulated_pc_evaluator(const HypothesisSet& set, std::size_t runs, std::size_t realizations,
                                   std::uint64_t seed, std::size_t threads) {
  validate(set);
  if (!set.all_fixed()) throw DomainError("simulated evaluator needs fixed rates");
  if (runs < 1 || realizations < 1) throw DomainError("runs and realizations must be at least 1");
  return [set, runs, realizations, seed, threads](double window, std::size_t samples) {
    const std::size_t total = runs * realizations;
    std::vector<char> hits(total);
    MsprtConfig unused;
    parallel_for(
        total,
        [&](std::size_t task) {
          Rng rng(derive_seed(seed, 0, task / realizations, task % realizations));
          hits[task] = simulate_window_trial(Method::mlc_noisy, set, window, samples, unused, rng).correct();
        },
        threads);
    std::size_t sum = 0;
    for (char h : hits) sum += static_cast<std::size_t>(h);
    return static_cast<double>(sum) / static_cast<double>(total);
  };
}

void write_csv(std::ostream& out, const std::vector<CurvePoint>& points) {
  out << "sweep_x,mean,ci_halfwidth,n_effective,mean_periods\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(10);
  for (const auto& p : points) {
    out << p.x << ',' << p.mean << ',' << p.ci_halfwidth << ',' << p.n_effective << ',' << p.mean_periods << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

nlohmann::json to_json(const HypothesisSet& set) {
  nlohmann::json models = nlohmann::json::array();
  for (std::size_t j = 0; j < set.size(); ++j) {
    const auto& m = set.models[j];
    nlohmann::json e{{"label", m.label}, {"shape", m.shape}, {"prior", set.priors[j]}};
    if (m.has_fixed_rate()) {
      e["rate"] = m.params().rate;
    } else {
      e["rate_low"] = m.prior().low;
      e["rate_high"] = m.prior().high;
    }
    models.push_back(e);
  }
  return models;
}

nlohmann::json manifest(const ExperimentConfig& cfg) {
  return {
      {"hypotheses", to_json(cfg.scenario)},
      {"classifier", std::string(to_string(cfg.classifier))},
      {"sweep", std::string(to_string(cfg.sweep))},
      {"grid", cfg.grid},
      {"runs", cfg.runs},
      {"realizations", cfg.realizations},
      {"master_seed", cfg.master_seed},
      {"n_periods", cfg.n_periods},
      {"sampling_period", cfg.sampling_period},
      {"window", cfg.window},
      {"samples", cfg.samples},
      {"gamma", cfg.msprt.gamma_threshold},
      {"max_periods", cfg.msprt.max_periods},
      {"redraw_rate_per_period", cfg.redraw_rate_per_period},
      {"ci", "two-sided 95% Student-t over run means"},
  };
}

}  // namespace ptc
