#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace sobscale {

/// Seeded generator with index-derived substreams.
///
/// `stream(i)` depends only on (seed, path of stream indices), so trial i
/// draws the same numbers regardless of how many other trials run.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  Rng stream(std::uint64_t index) const;

  double uniform();                     // [0, 1)
  double uniform(double lo, double hi);
  double normal();
  std::complex<double> complex_normal();  // E|z|^2 = 1
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace sobscale
