#pragma once

// Hypothesis model, period generation and the channel-sampling noise model.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "ptc/gamma_params.hpp"
#include "ptc/random.hpp"

namespace ptc {

/// Uniform prior on the rate, beta ~ U(low, high).
struct RatePrior {
  double low;
  double high;

  double mean() const noexcept { return 0.5 * (low + high); }
  friend bool operator==(const RatePrior&, const RatePrior&) = default;
};

void validate(const RatePrior& prior);

struct FixedRate {
  double rate;
  friend bool operator==(const FixedRate&, const FixedRate&) = default;
};

struct HypothesisModel {
  double shape;
  std::variant<FixedRate, RatePrior> rate_spec;
  std::string label;

  static HypothesisModel fixed(double shape, double rate, std::string label = {});
  static HypothesisModel uniform(double shape, double low, double high, std::string label = {});

  bool has_fixed_rate() const noexcept { return std::holds_alternative<FixedRate>(rate_spec); }
  /// Parameters of a fixed-rate model; throws DomainError for a uniform one.
  GammaParams params() const;
  /// Rate prior of a uniform model; throws DomainError for a fixed one.
  const RatePrior& prior() const;
};

void validate(const HypothesisModel& model);

/// M hypotheses with their prior probabilities.
struct HypothesisSet {
  std::vector<HypothesisModel> models;
  std::vector<double> priors;

  /// Builds a set with equal priors 1/M.
  static HypothesisSet equiprobable(std::vector<HypothesisModel> models);

  std::size_t size() const noexcept { return models.size(); }
  bool all_fixed() const noexcept;
  bool all_uniform() const noexcept;
  /// Parameters of every hypothesis; requires all_fixed().
  std::vector<GammaParams> params() const;
};

/// Throws DomainError if the set is empty, any model is invalid, or the
/// priors are not positive and summing to one within 1e-12.
void validate(const HypothesisSet& set);

enum class PeriodKind { on, off };

struct PeriodSample {
  std::vector<double> values;
  PeriodKind kind = PeriodKind::on;
};

/// Period estimates under sampling noise; values lie in (-sampling_period, inf).
struct NoisyPeriods {
  std::vector<double> values;
  double sampling_period;
};

/// Outer (T1 = zeta4 - zeta1) and inner (T2 = zeta3 - zeta2) sampled intervals
/// for one detected ON period, with the true length kept for evaluation.
struct IntervalPair {
  double outer;
  double inner;
  double true_length;
  bool distorted;
};

struct SampledTrace {
  std::vector<IntervalPair> pairs;
  std::size_t total = 0;      // ON periods in the trace
  std::size_t missed = 0;     // shorter than T_s, dropped
  std::size_t boundary = 0;   // outer samples fall outside the trace
  std::size_t distorted = 0;  // a neighbouring OFF period shorter than T_s
};

PeriodSample generate_periods(const GammaParams& params, std::size_t n, Rng& rng,
                              PeriodKind kind = PeriodKind::on);
/// Fixed-rate models only; throws DomainError otherwise.
PeriodSample generate_periods(const HypothesisModel& model, std::size_t n, Rng& rng);

double draw_rate(const RatePrior& prior, Rng& rng);

/// Adds phi_a - phi_b, with phi_a, phi_b ~ U(0, T_s), to every period.
NoisyPeriods inject_sampling_noise(const PeriodSample& x, double sampling_period, Rng& rng);

/// Minimum-variance estimate (T1 + T2) / 2.
double mve_estimate(double outer, double inner);
/// Weighted estimate w * T1 + (1 - w) * T2.
double weighted_estimate(double outer, double inner, double w);

/// Lays out OFF, ON, OFF, ON, ..., ON, OFF on a time axis and samples it on a
/// grid of period T_s with a random phase. Requires off.size() >= on.size() + 1.
SampledTrace sample_binary_trace(const PeriodSample& on, const PeriodSample& off,
                                 double sampling_period, Rng& rng);

/// Triangular density of phi_a - phi_b on [-T_s, T_s].
double triangular_noise_pdf(double phi, double sampling_period);

/// Density of x + phi with x ~ gamma(params) and phi triangular on [-T_s, T_s].
double noisy_gamma_pdf(double x, const GammaParams& params, double sampling_period);

}  // namespace ptc
