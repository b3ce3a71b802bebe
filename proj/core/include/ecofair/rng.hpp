#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace ecofair {

/// Seeded pseudo-random stream.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard, and
/// derives uniforms and categorical draws by hand so that a (seed, call
/// sequence) pair produces the same values on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  bool bernoulli(double p);
  std::size_t index(std::size_t n);

  /// Draws an index with probability proportional to `weights`; zero-weight
  /// entries are never returned.
  std::size_t categorical(std::span<const double> weights);

  /// Independent substream keyed by `stream`; does not advance this stream.
  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ecofair
