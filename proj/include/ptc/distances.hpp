#pragma once

// Distances between gamma hypotheses and their rate-averaged counterparts.

#include <cstddef>

#include "ptc/gamma_params.hpp"
#include "ptc/traffic.hpp"

namespace ptc {

/// Kullback-Leibler divergence D(f_j || f_k) in closed form.
double kl_gamma(const GammaParams& j, const GammaParams& k);

/// Squared Hellinger distance 1 - int sqrt(f_j f_k) in closed form.
double sh_gamma(const GammaParams& j, const GammaParams& k);

/// True iff kl_gamma(j, k) >= sh_gamma(j, k) - 1e-12.
bool hellinger_lower_bound_check(const GammaParams& j, const GammaParams& k);

/// Gamma density averaged over a uniform rate prior (closed form).
double alf_pdf(double x, double shape, const RatePrior& prior);
/// log of alf_pdf, floored at -745 where the density underflows.
double alf_log_pdf(double x, double shape, const RatePrior& prior);

/// Density of a hypothesis model: gamma for a fixed rate, ALF for a rate prior.
double model_pdf(double x, const HypothesisModel& model);

/// Squared Hellinger distance between the ALF densities of two models, by
/// adaptive quadrature (absolute tolerance 1e-6, reached in practice ~1e-10).
/// Two fixed-rate models reduce to sh_gamma. Throws ConvergenceError.
double sh_alf(const HypothesisModel& j, const HypothesisModel& k);

/// Squared Hellinger distance between two models of any rate kind.
double sh_model(const HypothesisModel& j, const HypothesisModel& k);

/// min over k != j of the squared Hellinger distance; requires M >= 2.
double min_pairwise_sh(const HypothesisSet& set, std::size_t j);

/// Arithmetic mean of the squared Hellinger distance over unordered pairs.
double average_sh(const HypothesisSet& set);

}  // namespace ptc
