#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature. The worst interval is
// bisected until the summed error estimate meets max(abs_tol, rel_tol*|I|).
// Infinite limits are mapped onto finite intervals with x = a + t/(1-t).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace ptc::quad {

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes (indices 1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  double err = std::fabs(kronrod - gauss);
  // QUADPACK-style sharpening of the raw difference.
  err = std::fabs(half) * std::pow(200.0 * err / std::max(std::fabs(half), 1e-300), 1.5);
  err = std::min(err, std::fabs(kronrod - gauss));
  return {a, b, kronrod, err};
}

template <class F>
Result adaptive_finite(F& f, double a, double b, const Options& opt) {
  Result r;
  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod(f, a, b);
  r.evaluations = 15;
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  int splits = 0;
  while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::fabs(total))) {
    if (splits >= opt.max_subdivisions) {
      r.value = total;
      r.error = total_err;
      r.converged = false;
      return r;
    }
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval cannot be split further in double precision.
      r.value = total;
      r.error = total_err;
      r.converged = false;
      return r;
    }
    heap.pop();
    Segment left = gauss_kronrod(f, worst.a, mid);
    Segment right = gauss_kronrod(f, mid, worst.b);
    r.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  // Re-sum to shed accumulated rounding from the running updates.
  total = 0.0;
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  r.value = total;
  r.error = total_err;
  r.converged = true;
  return r;
}

}  // namespace detail

/// Integrates f over [a, b]; either limit may be infinite.
template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (a == b) return {0.0, 0.0, true, 0};
  if (a > b) {
    Result r = integrate(f, b, a, opt);
    r.value = -r.value;
    return r;
  }
  if (std::isinf(a) && std::isinf(b)) {
    Options half = opt;
    half.abs_tol = 0.5 * opt.abs_tol;
    Result left = integrate(f, -inf, 0.0, half);
    Result right = integrate(f, 0.0, inf, half);
    return {left.value + right.value, left.error + right.error, left.converged && right.converged,
            left.evaluations + right.evaluations};
  }
  if (std::isinf(b)) {
    auto mapped = [&](double t) {
      const double s = 1.0 - t;
      const double v = f(a + t / s);
      return v / (s * s);
    };
    return detail::adaptive_finite(mapped, 0.0, 1.0, opt);
  }
  if (std::isinf(a)) {
    auto mapped = [&](double t) {
      const double s = 1.0 - t;
      const double v = f(b - t / s);
      return v / (s * s);
    };
    return detail::adaptive_finite(mapped, 0.0, 1.0, opt);
  }
  auto ref = [&](double x) { return f(x); };
  return detail::adaptive_finite(ref, a, b, opt);
}

/// Sums integrals over consecutive breakpoints (which may start/end at +-inf).
template <class F>
Result integrate_pieces(F&& f, const std::vector<double>& breaks, const Options& opt = {}) {
  Result total;
  total.converged = true;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    Result r = integrate(f, breaks[i], breaks[i + 1], opt);
    total.value += r.value;
    total.error += r.error;
    total.converged = total.converged && r.converged;
    total.evaluations += r.evaluations;
  }
  return total;
}

}  // namespace ptc::quad
