#pragma once

// Semi-analytical performance predictions: log-likelihood-ratio term
// statistics, Gaussian-approximation accuracy of the ML classifier (clean,
// noisy and estimate-then-classify), expected sample and period counts, and
// the sensing-budget guideline solver.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ptc/gamma_params.hpp"
#include "ptc/traffic.hpp"

namespace ptc {

// ---------------------------------------------------------------------------
// y = a log x - b x with x ~ gamma(data)

enum class MomentMethod { quadrature, monte_carlo };

struct LlrTermMoments {
  double mean = 0.0;
  double variance = 0.0;
  MomentMethod method = MomentMethod::quadrature;
  double mean_se = 0.0;      // Monte Carlo standard errors, zero for quadrature
  double variance_se = 0.0;
};

/// Range of y = a log x - b x over x > 0, possibly infinite at either end.
struct LlrSupport {
  double low;
  double high;
};

LlrSupport linear_log_support(double a, double b);

/// Density of y = a log x - b x for x ~ gamma(data), by inverting the map
/// with the Lambert W function. Throws DegenerateError if a = b = 0.
double linear_log_pdf(double y, const GammaParams& data, double a, double b);

/// Mean and variance of a log x - b x for x ~ gamma(data).
LlrTermMoments linear_log_moments(const GammaParams& data, double a, double b,
                                  MomentMethod method = MomentMethod::quadrature,
                                  std::size_t draws = 1'000'000, std::uint64_t seed = 1);

/// Per-period log-likelihood-ratio term between hypotheses j and k under H_j:
/// a = shape_j - shape_k, b = rate_j - rate_k.
double llr_term_pdf(double y, const GammaParams& j, const GammaParams& k);
LlrTermMoments llr_term_moments(const GammaParams& j, const GammaParams& k,
                                MomentMethod method = MomentMethod::quadrature,
                                std::size_t draws = 1'000'000, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Gaussian approximation of the probability of correct classification. The
// period count n is real so that expected counts can be plugged in.

double analytical_pc_mlc(const HypothesisSet& set, double n,
                         MomentMethod method = MomentMethod::quadrature);
/// Per-hypothesis terms: entry j approximates Pr{correct | H_j}.
std::vector<double> analytical_pc_mlc_given(const HypothesisSet& set, double n,
                                            MomentMethod method = MomentMethod::quadrature);

/// Variance of the noisy LLR term a log(x~) - b x~, x~ = x + phi, treated as a
/// complex number for x~ < 0 (imaginary part pi * a).
struct NoisyLlrVariance {
  double real_part;
  double imag_part;
  double negative_mass;  // Pr{x~ < 0}
  double total() const noexcept { return real_part + imag_part; }
};

NoisyLlrVariance noisy_llr_variance_parts(const GammaParams& j, const GammaParams& k, double sampling_period);
double noisy_llr_variance(const GammaParams& j, const GammaParams& k, double sampling_period);

/// Density of the real part a log|x~| - b x~ under H_j (sum over all preimages).
double noisy_llr_real_pdf(double y, const GammaParams& j, const GammaParams& k, double sampling_period);

/// Same as analytical_pc_mlc with the noisy variance; the clean means are kept.
double analytical_pc_mlc_noisy(const HypothesisSet& set, double n, double sampling_period);

/// Estimate-then-classify accuracy. Throws DegenerateError if two hypotheses
/// share a shape.
double analytical_pc_etc(const HypothesisSet& set, double n);

// ---------------------------------------------------------------------------
// Sample and period counts under channel sampling

struct SeriesSum {
  double value;
  std::size_t terms;
  double tail_bound;  // certified upper bound on the omitted tail
};

/// E{N | H} = 1 + sum_{k>=1} Q(shape, k * rate * T_s), truncated once the
/// integral-test bound on the remainder drops below `tail_tolerance`.
SeriesSum expected_samples_series(const GammaParams& params, double sampling_period,
                                  double tail_tolerance = 1e-12);
double expected_samples_given(const GammaParams& params, double sampling_period);
/// Prior-weighted E{N}.
double expected_samples_per_period(const HypothesisSet& set, double sampling_period);

/// Closed forms for exponential (shape 1) and Erlang-2 periods with rate lambda.
double expected_samples_exponential(double lambda, double sampling_period);
double expected_samples_erlang2(double lambda, double sampling_period);

/// Pr{T_on < T_s}.
double misdetection_rate(const GammaParams& params, double sampling_period);

/// E{K | H} = (T / mean) * (1 - R) and its prior-weighted sum.
double expected_periods_given(const GammaParams& params, double window, double sampling_period);
double expected_periods(const HypothesisSet& set, double window, double sampling_period);

/// T_s = T / (N - 1).
double sampling_period_for(double window, std::size_t samples);

// ---------------------------------------------------------------------------
// Guideline solver

enum class GuidelineMode { fix_time_min_samples, fix_samples_min_time };

struct GuidelineConstraint {
  GuidelineMode mode;
  double fixed_value;  // T in seconds, or N
  double epsilon;
};

/// Accuracy as a function of (T, N).
using PcEvaluator = std::function<double(double window, std::size_t samples)>;

/// Plugs E{K} and T_s = T/(N-1) into analytical_pc_mlc_noisy.
PcEvaluator analytic_pc_evaluator(const HypothesisSet& set);

struct GuidelineOptions {
  std::size_t max_samples = 1u << 20;  // fix-time search limit on N
  double window_min = 1.0;             // fix-samples scan range for T
  double window_max = 1000.0;
  std::size_t grid_points = 64;
  std::size_t fit_halfwidth = 4;  // grid points on each side of the peak used in the fit
};

struct GuidelineResult {
  double window = 0.0;
  std::size_t samples = 0;
  double sampling_period = 0.0;
  double achieved_pc = 0.0;
  bool feasible = false;
  // Fix-samples mode: maximum of the accuracy profile over T.
  double peak_window = 0.0;
  double peak_pc = 0.0;
  std::size_t evaluations = 0;
};

/// Fix-time mode: smallest N with P~c >= epsilon, by doubling from N = 2 and
/// bisection. Fix-samples mode: geometric scan of T, least-squares parabola in
/// log T around the best grid point for the peak, then the smallest T meeting
/// epsilon (bisection between grid points). When no point meets epsilon,
/// feasible is false and the best point found is returned.
GuidelineResult guideline_solve(const HypothesisSet& set, const GuidelineConstraint& constraint,
                                const PcEvaluator& evaluator, const GuidelineOptions& opt = {});

/// (P_c - P~_c) / P_c; throws DomainError when pc_clean is not positive.
double normalized_loss(double pc_clean, double pc_noisy);

}  // namespace ptc
