#pragma once

#include <cstdint>
#include <random>

namespace lte {

// splitmix64 finalizer; mixes a base seed with a stream id so that
// independent consumers (iterations, workers, layers) get unrelated streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Seeded generator with distribution code written out explicitly so draws do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // [0, 1)
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal (Box-Muller).
  double normal();
  // [0, n)
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lte
