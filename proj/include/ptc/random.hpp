#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace ptc {

/// Mixes a master seed with up to three indices (splitmix64 finalizer chain).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

/// Seeded random stream. Distributions are implemented here rather than taken
/// from <random> so that draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1); never returns 0.
  double uniform_pos();
  double uniform(double low, double high);
  double normal();
  /// Gamma variate with the given shape and unit rate.
  double gamma(double shape);
  /// Index drawn with probability proportional to weights (assumed to sum to 1).
  std::size_t categorical(std::span<const double> weights);
  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ptc
