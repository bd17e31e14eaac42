#include "ringsync/rng.hpp"

#include <cmath>
#include <numbers>

namespace ringsync {

namespace {

constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * kTwoPow53Inv;
}

double box_muller(double u1, double u2) noexcept {
  // u1 in (0, 1] so the log is finite.
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, StreamPurpose purpose,
                          std::uint64_t index) noexcept {
  std::uint64_t state = master;
  std::uint64_t h = splitmix64(state);
  state = h ^ static_cast<std::uint64_t>(purpose);
  h = splitmix64(state);
  state = h ^ index;
  return splitmix64(state);
}

double Rng::uniform() { return to_unit(engine_()); }

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire's nearly-divisionless rejection method.
  __extension__ using u128 = unsigned __int128;
  std::uint64_t x = engine_();
  u128 m = static_cast<u128>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = engine_();
      m = static_cast<u128>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return box_muller(u1, u2);
}

double counter_uniform(std::uint64_t key, std::uint64_t counter) noexcept {
  std::uint64_t state = key ^ (counter * 0xD1B54A32D192ED03ULL);
  splitmix64(state);
  return to_unit(splitmix64(state));
}

double counter_normal(std::uint64_t key, std::uint64_t counter) noexcept {
  std::uint64_t state = key ^ (counter * 0xD1B54A32D192ED03ULL);
  const double u1 = 1.0 - to_unit(splitmix64(state));
  const double u2 = to_unit(splitmix64(state));
  return box_muller(u1, u2);
}

}  // namespace ringsync
