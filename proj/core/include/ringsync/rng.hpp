#pragma once

#include <cstdint>
#include <random>

namespace ringsync {

/// Purposes for which independent random streams are derived from a master
/// seed. Values are part of the reproducibility contract; do not renumber.
enum class StreamPurpose : std::uint64_t {
  placement = 1,
  traffic = 2,
  destination = 3,
  backoff = 4,
  clock_correction = 5,
  ntp_calibration = 6,
};

/// One SplitMix64 step. Advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Derives a stream seed from (master, purpose, index) by chained SplitMix64.
std::uint64_t derive_seed(std::uint64_t master, StreamPurpose purpose,
                          std::uint64_t index = 0) noexcept;

/**
 * Seedable random source with platform-independent output.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the
 * standard. The distributions are implemented here rather than taken from
 * <random>, because the standard library distributions are allowed to differ
 * between implementations.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for one (purpose, index) pair of a master seed.
  static Rng stream(std::uint64_t master, StreamPurpose purpose,
                    std::uint64_t index = 0) {
    return Rng(derive_seed(master, purpose, index));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal deviate (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// Counter-based standard normal: a pure function of (key, counter). Used
/// where a value must be reproducible under random access.
double counter_normal(std::uint64_t key, std::uint64_t counter) noexcept;

/// Counter-based uniform in [0, 1).
double counter_uniform(std::uint64_t key, std::uint64_t counter) noexcept;

}  // namespace ringsync
