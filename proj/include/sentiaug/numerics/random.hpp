#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace sentiaug::num {

// splitmix64 finalizer; used to carve independent streams out of one seed.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();
  std::size_t index(std::size_t n);  // uniform in [0, n)
  // Draws from unnormalized nonnegative weights.
  std::size_t categorical(std::span<const double> weights);
  // u clamped to [1e-10, 1 - 1e-10]; returns -log(-log(u)).
  double gumbel();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace sentiaug::num
