#pragma once

namespace ptc {

/// Shape/rate pair of one gamma hypothesis. Rate is in 1/seconds.
struct GammaParams {
  double shape;
  double rate;

  double mean() const noexcept { return shape / rate; }
  double variance() const noexcept { return shape / (rate * rate); }

  friend bool operator==(const GammaParams&, const GammaParams&) = default;
};

/// Throws ptc::DomainError unless shape > 0 and rate > 0 (both finite).
void validate(const GammaParams& params);

}  // namespace ptc
