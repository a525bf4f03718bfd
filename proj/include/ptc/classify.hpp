#pragma once

// Fixed-size (maximum likelihood) and sequential (MSPRT) classifiers with
// known, estimated (ETC) or rate-averaged (ALF) likelihoods.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ptc/random.hpp"
#include "ptc/traffic.hpp"

namespace ptc {

/// Outcome of one classification. `chosen` is a 0-based hypothesis index
/// (the CLI prints it 1-based).
struct Decision {
  std::size_t chosen = 0;
  std::size_t periods_used = 0;
  std::vector<double> log_scores;  // log prior + log likelihood per hypothesis
  std::vector<double> posteriors;  // normalized, sums to one
  bool stopped = true;             // false when a sequential test hit max_periods
};

struct MsprtConfig {
  double gamma_threshold = 0.1;
  std::size_t max_periods = 10000;
  double sweep_step = 0.5;
};

void validate(const MsprtConfig& cfg);

/// Yields the next period, or nothing when the source is exhausted.
using PeriodSource = std::function<std::optional<double>()>;

/// Source that walks a fixed vector.
PeriodSource vector_source(const std::vector<double>& values);

/// Log density floor used when a value falls outside a hypothesis' support.
inline constexpr double kLogDensityFloor = -745.0;

Decision mlc(const PeriodSample& x, const HypothesisSet& set);
Decision msprt(const PeriodSource& source, const HypothesisSet& set, const MsprtConfig& cfg);

Decision mlc_noisy(const NoisyPeriods& x, const HypothesisSet& set);
Decision msprt_noisy(const PeriodSource& source, double sampling_period, const HypothesisSet& set,
                     const MsprtConfig& cfg);

/// Maximum likelihood rate for a known shape: shape * n / sum(x).
double mle_rate(const PeriodSample& x, double shape);

/// Rates are re-estimated from the data; only the shapes of `set` are used.
Decision etc_mlc(const PeriodSample& x, const HypothesisSet& set);
Decision etc_msprt(const PeriodSource& source, const HypothesisSet& set, const MsprtConfig& cfg);

/// Every model must carry a rate prior.
Decision alf_mlc(const PeriodSample& x, const HypothesisSet& set);
Decision alf_msprt(const PeriodSource& source, const HypothesisSet& set, const MsprtConfig& cfg);

/// Posterior probabilities from unnormalized log scores (max-shifted).
std::vector<double> normalize_log_scores(const std::vector<double>& log_scores);

enum class Method { mlc, msprt, mlc_noisy, msprt_noisy, etc_mlc, etc_msprt, alf_mlc, alf_msprt };

std::string_view to_string(Method m);
/// Accepts the CLI spellings (mlc, msprt, mlc-noisy, ...); throws DomainError.
Method method_from_string(std::string_view name);
bool is_sequential(Method m);
bool is_noisy(Method m);

/// Everything a simulated trial needs besides the scenario.
struct TrialSetup {
  std::size_t n_periods = 10;    // fixed-size methods
  double sampling_period = 0.0;  // noisy methods
  MsprtConfig msprt;             // sequential methods
  bool redraw_rate_per_period = false;
};

struct TrialOutcome {
  std::size_t truth;
  Decision decision;
  bool correct() const noexcept { return decision.chosen == truth; }
};

/// Throws DomainError when the method cannot run on the scenario (for example
/// ALF on fixed rates, or a noisy method without a sampling period).
void check_compatible(Method m, const HypothesisSet& set, const TrialSetup& setup);

/// Draws the true hypothesis from the priors (and a rate for fluctuating
/// models), generates its periods and classifies them. Random draws happen in
/// a fixed order, so a sequential trial consumes a prefix of the same stream
/// regardless of the threshold.
TrialOutcome simulate_trial(Method m, const HypothesisSet& set, const TrialSetup& setup, Rng& rng);

/// Classifies a recorded period list with method m; sequential methods stop
/// early or run out of data (stopped == false).
Decision classify_values(Method m, const std::vector<double>& values, const HypothesisSet& set,
                         const TrialSetup& setup);

struct SweepOptions {
  Method method = Method::msprt;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  double sampling_period = 0.0;
  double gamma_start = 1e3;
  double gamma_floor = 1e-9;
  std::size_t threads = 0;
};

struct SweepResult {
  double gamma = 0.0;
  double achieved_pc = 0.0;
  double ci_halfwidth = 0.0;
  double mean_periods = 0.0;
  bool reachable = false;
  std::size_t steps = 0;
};

/// Lowers gamma geometrically, gamma <- gamma / (1 + sweep_step), from
/// gamma_start until the simulated accuracy reaches target_pc. The same trial
/// seeds are reused at every gamma. When the floor is hit, or every trial runs
/// into max_periods, reachable is false and the best point seen is returned.
SweepResult sweep_gamma(const HypothesisSet& set, double target_pc, const MsprtConfig& cfg,
                        const SweepOptions& opt);

}  // namespace ptc
