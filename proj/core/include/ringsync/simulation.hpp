#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ringsync/ring_bus.hpp"
#include "ringsync/types.hpp"

namespace ringsync {

struct RunOptions {
  /// Extend the run, one sim_length at a time, until this many messages
  /// have been both generated and delivered inside the window.
  std::size_t min_delivered = 1500;
  /// Upper bound on the window, as a multiple of sim_length.
  int max_length_factor = 64;
  /// Called after arbitration and before the medium advances.
  std::function<void(const RingState&)> on_tick;
};

struct RunStats {
  Tick window_end = 0;
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t undelivered = 0;
  std::uint64_t collided_words = 0;
  // sync
  std::uint64_t ap_claims = 0;
  std::uint64_t consecutive_claims = 0;
  std::uint64_t contaminated_injections = 0;
  // csma
  std::uint64_t attempts = 0;
  std::uint64_t collisions_detected = 0;
  std::uint64_t jam_words = 0;
};

struct RunResult {
  Protocol protocol = Protocol::sync;
  RingConfig config;
  std::vector<int> positions;
  /// Every message generated inside the window, by id.
  std::vector<Message> messages;
  RunStats stats;
};

/// Builds the ring and runs generate_traffic -> arbitration -> advance each
/// tick until the window (sim_length, possibly extended) ends.
RunResult run_simulation(const RingConfig& config, Protocol protocol,
                         const RunOptions& options = {});

}  // namespace ringsync
