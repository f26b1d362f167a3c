// Splittable random streams. A stream is fully determined by a 64-bit seed
// and a stream index, so work can be partitioned across threads without
// changing any drawn value.
#pragma once

#include <array>
#include <cstdint>

namespace conclab {

// Mixes (seed, index) into an independent 64-bit seed; nest calls to derive
// sub-streams such as (experiment, split, trial).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// xoshiro256** seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::uint64_t stream) : Rng(derive_seed(seed, stream)) {}

  std::uint64_t next();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();
  // Gamma(shape, 1).
  double gamma(double shape);
  std::uint64_t poisson(double mean);
  double rademacher();

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace conclab
