// ptclass: command-line front end.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numeric
// non-convergence or an unreachable target.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ptc/analysis.hpp"
#include "ptc/classify.hpp"
#include "ptc/distances.hpp"
#include "ptc/errors.hpp"
#include "ptc/montecarlo.hpp"
#include "ptc/scenario.hpp"

namespace {

using nlohmann::json;
using namespace ptc;

constexpr int kUsage = 1;
constexpr int kNumeric = 2;

struct Unreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "a:b:step" (inclusive) or a comma list.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw DomainError("bad grid value '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw DomainError("grid range must be a:b:step");
    const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || b < a) throw DomainError("grid range needs step > 0 and b >= a");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    if (count > 100000) throw DomainError("grid has too many points");
    for (std::size_t i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  if (out.empty()) throw DomainError("empty grid");
  return out;
}

std::vector<double> read_periods(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open period file");
  std::vector<double> values;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r,");
    const std::string field = line.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != field.size() || !std::isfinite(v)) throw ConfigError(path, n, "expected one duration per line");
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError(path, 0, "no periods found");
  return values;
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ConfigError(path, 0, "cannot open output file");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json decision_json(const Decision& d, const HypothesisSet& set, Method m) {
  return {{"method", std::string(to_string(m))},
          {"chosen", d.chosen + 1},
          {"label", set.models[d.chosen].label},
          {"periods_used", d.periods_used},
          {"stopped", d.stopped},
          {"posteriors", d.posteriors},
          {"log_scores", d.log_scores}};
}

struct Common {
  std::string scenario;
  std::string out;
  Scenario loaded;
  const HypothesisSet& set() const { return loaded.set; }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "Hypothesis set file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output path (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gamma-traffic classification toolkit"};
  app.require_subcommand(1);

  Common common;
  std::string method_name = "mlc";
  std::optional<double> ts;
  std::optional<double> gamma;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_periods;
  std::size_t threads = 0;

  // classify
  auto* classify = app.add_subcommand("classify", "Classify a recorded list of periods; prints JSON");
  std::string periods_path;
  add_common(classify, common);
  classify->add_option("--periods", periods_path, "One duration per line, seconds")->required();
  classify->add_option("--method", method_name, "Classifier");
  classify->add_option("--ts", ts, "Sampling period for noisy methods");
  classify->add_option("--gamma", gamma, "MSPRT threshold");
  classify->add_option("--max-periods", max_periods, "MSPRT period cap");

  // distances
  auto* distances = app.add_subcommand("distances", "Pairwise KL and squared Hellinger distances as CSV");
  add_common(distances, common);

  // predict-pc
  auto* predict = app.add_subcommand("predict-pc", "Analytic accuracy curves as CSV");
  std::string grid_text = "1:20:1";
  add_common(predict, common);
  predict->add_option("--grid", grid_text, "Period counts, a:b:step or a,b,c");
  predict->add_option("--ts", ts, "Adds the noisy prediction at this sampling period");

  // samples
  auto* samples = app.add_subcommand("samples", "E{N}, R and E{K} per hypothesis as CSV");
  double window = 60.0;
  add_common(samples, common);
  samples->add_option("--grid", grid_text, "Sampling periods, a:b:step or a,b,c")->required();
  samples->add_option("--window", window, "Observation window T for E{K}");

  // guideline
  auto* guideline = app.add_subcommand("guideline", "Solve for the sensing budget; prints JSON");
  std::string mode_name = "fix-time";
  double fixed_value = 60.0;
  double epsilon = 0.9;
  std::string evaluator_name = "simulated";
  std::size_t runs = 10, realizations = 2000;
  GuidelineOptions gopt;
  add_common(guideline, common);
  guideline->add_option("--mode", mode_name, "fix-time (minimal N) or fix-samples (minimal T)")
      ->check(CLI::IsMember({"fix-time", "fix-samples"}));
  guideline->add_option("--value", fixed_value, "Fixed T in seconds or fixed N");
  guideline->add_option("--epsilon", epsilon, "Target accuracy");
  guideline->add_option("--evaluator", evaluator_name, "analytic or simulated")
      ->check(CLI::IsMember({"analytic", "simulated"}));
  guideline->add_option("--runs", runs, "Simulated evaluator runs");
  guideline->add_option("--realizations", realizations, "Simulated evaluator realizations per run");
  guideline->add_option("--seed", seed, "Simulated evaluator seed");
  guideline->add_option("--window-min", gopt.window_min, "Fix-samples scan lower end");
  guideline->add_option("--window-max", gopt.window_max, "Fix-samples scan upper end");
  guideline->add_option("--threads", threads, "Worker threads (0: PTC_THREADS or all cores)");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Monte Carlo accuracy curve as CSV plus JSON manifest");
  std::string sweep_name = "n_periods";
  std::string against;
  std::optional<std::size_t> exp_runs, exp_realizations;
  ExperimentConfig ecfg;
  add_common(experiment, common);
  experiment->add_option("--method", method_name, "Classifier");
  experiment->add_option("--sweep", sweep_name, "n_periods, T_s, N_samples, T_time or gamma")
      ->check(CLI::IsMember({"n_periods", "T_s", "N_samples", "T_time", "gamma"}));
  experiment->add_option("--grid", grid_text, "Sweep values, a:b:step or a,b,c")->required();
  experiment->add_option("--runs", exp_runs, "Independent runs (batches)");
  experiment->add_option("--realizations", exp_realizations, "Realizations per run");
  experiment->add_option("--seed", seed, "Master seed");
  experiment->add_option("--ts", ts, "Sampling period when not swept");
  experiment->add_option("--gamma", gamma, "MSPRT threshold when not swept");
  experiment->add_option("--max-periods", max_periods, "MSPRT period cap");
  experiment->add_option("--n-periods", ecfg.n_periods, "Periods per classification when not swept");
  experiment->add_option("--window", ecfg.window, "Window T when sweeping N_samples");
  experiment->add_option("--samples", ecfg.samples, "Samples N when sweeping T_time");
  experiment->add_flag("--redraw-per-period", ecfg.redraw_rate_per_period,
                       "Fluctuating rates: redraw the rate for every period");
  experiment->add_option("--against", against, "Second method; prints a paired comparison instead");
  experiment->add_option("--threads", threads, "Worker threads (0: PTC_THREADS or all cores)");

  // sweep-gamma
  auto* sweep = app.add_subcommand("sweep-gamma", "Lower gamma until a target accuracy is met; prints JSON");
  double target = 0.9;
  SweepOptions sopt;
  add_common(sweep, common);
  std::string sweep_method = "msprt";
  sweep->add_option("--method", sweep_method, "Sequential classifier (default msprt)");
  sweep->add_option("--target", target, "Target accuracy");
  sweep->add_option("--trials", sopt.trials, "Trials per gamma");
  sweep->add_option("--seed", seed, "Seed");
  sweep->add_option("--ts", ts, "Sampling period for msprt-noisy");
  sweep->add_option("--gamma", gamma, "Starting gamma");
  sweep->add_option("--max-periods", max_periods, "MSPRT period cap");
  sweep->add_option("--threads", threads, "Worker threads (0: PTC_THREADS or all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    common.loaded = load_scenario(common.scenario);
    const auto& defaults = common.loaded.defaults;
    const HypothesisSet& set = common.set();
    Output output(common.out);
    std::ostream& out = output.stream();

    MsprtConfig msprt;
    if (defaults.gamma) msprt.gamma_threshold = *defaults.gamma;
    if (gamma) msprt.gamma_threshold = *gamma;
    if (defaults.max_periods) msprt.max_periods = *defaults.max_periods;
    if (max_periods) msprt.max_periods = *max_periods;
    const double sampling_period = ts ? *ts : defaults.sampling_period.value_or(0.0);
    const std::uint64_t master_seed = seed ? *seed : defaults.seed.value_or(1);

    if (*classify) {
      const Method m = method_from_string(method_name);
      TrialSetup setup;
      setup.sampling_period = sampling_period;
      setup.msprt = msprt;
      const Decision d = classify_values(m, read_periods(periods_path), set, setup);
      out << decision_json(d, set, m).dump(2) << '\n';
    } else if (*distances) {
      out << "metric,from,to,value\n";
      for (std::size_t j = 0; j < set.size(); ++j) {
        for (std::size_t k = 0; k < set.size(); ++k) {
          if (j == k) continue;
          if (set.all_fixed()) {
            out << "kl," << j + 1 << ',' << k + 1 << ',' << fmt(kl_gamma(set.models[j].params(), set.models[k].params()))
                << '\n';
          }
        }
      }
      for (std::size_t j = 0; j < set.size(); ++j) {
        for (std::size_t k = j + 1; k < set.size(); ++k) {
          out << "sh," << j + 1 << ',' << k + 1 << ',' << fmt(sh_model(set.models[j], set.models[k])) << '\n';
        }
      }
      out << "average_sh,,," << fmt(average_sh(set)) << '\n';
    } else if (*predict) {
      const auto grid = parse_grid(grid_text);
      bool distinct_shapes = true;
      for (std::size_t j = 0; j < set.size(); ++j) {
        for (std::size_t k = j + 1; k < set.size(); ++k) distinct_shapes &= set.models[j].shape != set.models[k].shape;
      }
      out << "n,mlc";
      if (ts) out << ",mlc_noisy";
      if (distinct_shapes) out << ",etc_mlc";
      out << '\n';
      for (double n : grid) {
        out << fmt(n) << ',' << fmt(analytical_pc_mlc(set, n));
        if (ts) out << ',' << fmt(analytical_pc_mlc_noisy(set, n, *ts));
        if (distinct_shapes) out << ',' << fmt(analytical_pc_etc(set, n));
        out << '\n';
      }
    } else if (*samples) {
      const auto grid = parse_grid(grid_text);
      if (!set.all_fixed()) throw DomainError("samples needs fixed rates");
      out << "hypothesis,ts,expected_samples,misdetection_rate,expected_periods\n";
      for (double t : grid) {
        for (std::size_t j = 0; j < set.size(); ++j) {
          const auto p = set.models[j].params();
          out << j + 1 << ',' << fmt(t) << ',' << fmt(expected_samples_given(p, t)) << ','
              << fmt(misdetection_rate(p, t)) << ',' << fmt(expected_periods_given(p, window, t)) << '\n';
        }
        out << "all," << fmt(t) << ',' << fmt(expected_samples_per_period(set, t)) << ",,"
            << fmt(expected_periods(set, window, t)) << '\n';
      }
    } else if (*guideline) {
      GuidelineConstraint c{mode_name == "fix-time" ? GuidelineMode::fix_time_min_samples
                                                    : GuidelineMode::fix_samples_min_time,
                            fixed_value, epsilon};
      const PcEvaluator eval = evaluator_name == "analytic"
                                   ? analytic_pc_evaluator(set)
                                   : simulated_pc_evaluator(set, runs, realizations, master_seed, threads);
      const GuidelineResult r = guideline_solve(set, c, eval, gopt);
      json j{{"mode", mode_name},   {"evaluator", evaluator_name}, {"epsilon", epsilon},
             {"feasible", r.feasible}, {"window", r.window},       {"samples", r.samples},
             {"sampling_period", r.sampling_period}, {"achieved_pc", r.achieved_pc},
             {"evaluations", r.evaluations}};
      if (c.mode == GuidelineMode::fix_samples_min_time) {
        j["peak_window"] = r.peak_window;
        j["peak_pc"] = r.peak_pc;
      }
      out << j.dump(2) << '\n';
      if (!r.feasible) throw Unreachable("no operating point meets the target accuracy");
    } else if (*experiment) {
      ecfg.scenario = set;
      ecfg.classifier = method_from_string(method_name);
      ecfg.sweep = sweep_variable_from_string(sweep_name);
      ecfg.grid = parse_grid(grid_text);
      ecfg.runs = exp_runs ? *exp_runs : defaults.runs.value_or(ecfg.runs);
      ecfg.realizations = exp_realizations ? *exp_realizations : defaults.realizations.value_or(ecfg.realizations);
      ecfg.master_seed = master_seed;
      ecfg.sampling_period = sampling_period;
      ecfg.msprt = msprt;
      ecfg.threads = threads;
      if (!against.empty()) {
        ExperimentConfig other = ecfg;
        other.classifier = method_from_string(against);
        const auto rows = compare(ecfg, other);
        out << "sweep_x,mean_a,ci_a,mean_b,ci_b,difference,ci_halfwidth\n";
        for (const auto& r : rows) {
          out << fmt(r.x) << ',' << fmt(r.a.mean) << ',' << fmt(r.a.ci_halfwidth) << ',' << fmt(r.b.mean) << ','
              << fmt(r.b.ci_halfwidth) << ',' << fmt(r.difference) << ',' << fmt(r.ci_halfwidth) << '\n';
        }
      } else {
        write_csv(out, run_experiment(ecfg));
      }
      if (!common.out.empty()) {
        json m = manifest(ecfg);
        m["scenario_file"] = common.scenario;
        if (!against.empty()) m["against"] = against;
        std::ofstream(common.out + ".json") << m.dump(2) << '\n';
      }
    } else if (*sweep) {
      sopt.method = method_from_string(sweep_method);
      sopt.seed = master_seed;
      sopt.sampling_period = sampling_period;
      sopt.threads = threads;
      if (gamma) sopt.gamma_start = *gamma;
      const SweepResult r = sweep_gamma(set, target, msprt, sopt);
      out << json{{"method", method_name},         {"target", target},
                  {"reachable", r.reachable},       {"gamma", r.gamma},
                  {"achieved_pc", r.achieved_pc},   {"ci_halfwidth", r.ci_halfwidth},
                  {"mean_periods", r.mean_periods}, {"steps", r.steps}}
                 .dump(2)
          << '\n';
      if (!r.reachable) throw Unreachable("target accuracy not reached");
    }
  } catch (const ConvergenceError& e) {
    std::cerr << "ptclass: " << e.what() << '\n';
    return kNumeric;
  } catch (const Unreachable& e) {
    std::cerr << "ptclass: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "ptclass: " << e.what() << '\n';
    return kUsage;
  }
  return 0;
}
