#pragma once

#include <cstdint>

namespace raysamp {

/// Seedable pseudo-random stream with a fully specified algorithm so batches reproduce
/// bit-for-bit across platforms and standard libraries.
///
/// Algorithm:
///  - state: four 64-bit words, filled from the seed by four successive SplitMix64 outputs
///    (x += 0x9E3779B97F4A7C15; z = x; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
///     z = (z ^ (z >> 27)) * 0x94D049BB133111EB; out = z ^ (z >> 31)).
///  - next(): xoshiro256** 1.0 (Blackman & Vigna), result = rotl(s1 * 5, 7) * 9.
///  - uniform(): (next() >> 11) * 2^-53, a double in [0, 1).
///  - below(n): Lemire's nearly-divisionless multiply-shift with rejection, exact uniform in
///    [0, n).
///
/// A stream is single-threaded; give each worker its own seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next();
  double uniform();
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
};

}  // namespace raysamp
