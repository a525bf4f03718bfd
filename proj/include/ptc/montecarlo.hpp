#pragma once

// Batch-means Monte Carlo harness for accuracy curves.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ptc/analysis.hpp"
#include "ptc/classify.hpp"
#include "ptc/traffic.hpp"

namespace ptc {

/// What the grid values mean.
///  n_periods:       periods per classification (fixed-size methods)
///  sampling_period: T_s for noisy methods, with n_periods periods
///  samples:         N samples over a fixed window T; periods per trial follow E{K|H_j}
///  window:          observation time T with a fixed N
///  gamma:           MSPRT threshold (sequential methods)
enum class SweepVariable { n_periods, sampling_period, samples, window, gamma };

std::string_view to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(std::string_view name);

struct ExperimentConfig {
  HypothesisSet scenario;
  Method classifier = Method::mlc;
  SweepVariable sweep = SweepVariable::n_periods;
  std::vector<double> grid;
  std::size_t runs = 50;
  std::size_t realizations = 2000;
  std::uint64_t master_seed = 1;

  // Settings held fixed while another variable is swept.
  std::size_t n_periods = 10;
  double sampling_period = 0.0;
  double window = 60.0;
  std::size_t samples = 50;
  MsprtConfig msprt;
  bool redraw_rate_per_period = false;
  std::size_t threads = 0;  // 0: default_thread_count()
};

void validate(const ExperimentConfig& cfg);

struct CurvePoint {
  double x = 0.0;
  double mean = 0.0;          // accuracy averaged over runs
  double ci_halfwidth = 0.0;  // batch-means 95% half-width (0 when runs == 1)
  std::size_t n_effective = 0;
  double mean_periods = 0.0;  // periods consumed per classification
};

/// Deterministic in master_seed for any thread count.
std::vector<CurvePoint> run_experiment(const ExperimentConfig& cfg);

struct ComparisonRow {
  double x;
  CurvePoint a;
  CurvePoint b;
  double difference;       // a.mean - b.mean
  double ci_halfwidth;     // sqrt(ci_a^2 + ci_b^2)
};

/// Runs both experiments; throws DomainError if the grids differ.
std::vector<ComparisonRow> compare(const ExperimentConfig& a, const ExperimentConfig& b);

/// Half-width of the two-sided 95% Student-t interval of the mean of `values`.
double batch_means_halfwidth(const std::vector<double>& values);

/// One trial of the sampled-window protocol: the true hypothesis is drawn, the
/// number of detected periods is E{K|H_j} rounded stochastically, and each
/// period carries triangular noise with T_s = T/(N-1). With no periods the
/// decision falls back to the most probable prior.
TrialOutcome simulate_window_trial(Method m, const HypothesisSet& set, double window, std::size_t samples,
                                   const MsprtConfig& msprt, Rng& rng);

/// Monte Carlo accuracy of noisy MLC at (T, N) over runs x realizations. The
/// same per-realization seeds are used for every (T, N).
PcEvaluator simulated_pc_evaluator(const HypothesisSet& set, std::size_t runs, std::size_t realizations,
                                   std::uint64_t seed, std::size_t threads = 0);

/// CSV with header sweep_x,mean,ci_halfwidth,n_effective,mean_periods.
void write_csv(std::ostream& out, const std::vector<CurvePoint>& points);

/// Config echo plus seed, for provenance.
nlohmann::json manifest(const ExperimentConfig& cfg);
nlohmann::json to_json(const HypothesisSet& set);

}  // namespace ptc
