#pragma once

// Special functions used throughout the library. Everything here is a pure
// function of its arguments.

#include "ptc/gamma_params.hpp"

namespace ptc::specfun {

/// Real branches of the Lambert W function.
enum class LambertBranch : int { principal = 0, lower = -1 };

/// log Gamma(x) for x > 0.
double ln_gamma(double x);

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

/// Same as gamma_q with ln Gamma(a) supplied by the caller (hot loops).
double gamma_q(double a, double x, double ln_gamma_a);

/// Unregularized upper incomplete gamma Gamma(a, x) = int_x^inf t^(a-1) e^-t dt.
double upper_incomplete_gamma(double a, double x);

/// CDF of the gamma distribution with the given shape and rate.
double gamma_cdf(double x, const GammaParams& params);

/// Density and log-density of the gamma distribution; zero / -inf for x <= 0.
double gamma_pdf(double x, const GammaParams& params);
double gamma_log_pdf(double x, const GammaParams& params);

double digamma(double x);
double trigamma(double x);

/// Solves w * exp(w) = s on the requested real branch.
///
/// The principal branch accepts s >= -1/e and returns w >= -1; the lower
/// branch accepts -1/e <= s < 0 and returns w <= -1.
double lambert_w(LambertBranch branch, double s);

/// W0(exp(log_s)), evaluated without forming exp(log_s). Handles arguments far
/// outside the double range (Wright omega function).
double lambert_w0_exp(double log_s);

/// W_branch(-exp(log_s)) for log_s <= -1, without forming exp(log_s).
double lambert_w_negexp(LambertBranch branch, double log_s);

/// Standard normal upper tail probability.
double q_function(double x);

}  // namespace ptc::specfun
