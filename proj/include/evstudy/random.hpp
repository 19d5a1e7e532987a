#pragma once

#include <cstdint>
#include <optional>

namespace evstudy {

// SplitMix64 step; advances `state`.
std::uint64_t splitmix64_next(std::uint64_t& state);

// Independent sub-seed for (stream, index), e.g. (grid cell, replication):
//   s = base ^ (0x9E3779B97F4A7C15 * (stream + 1)); a = splitmix64(s)
//   s = a ^ (0xD1B54A32D192ED03 * (index + 1));    seed = splitmix64(s)
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

// xoshiro256** seeded through SplitMix64. Variates are generated with
// in-library transforms (polar normal, Marsaglia-Tsang gamma) so a seed
// yields the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();       // [0, 1), 53-bit resolution
  double uniform_open();  // (0, 1)
  double normal();        // standard normal
  double gamma(double shape);
  double student_t(double nu);

 private:
  std::uint64_t s_[4];
  std::optional<double> spare_normal_;
};

}  // namespace evstudy
