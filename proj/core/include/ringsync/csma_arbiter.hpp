#pragma once

// CSMA/CD baseline on the ring: sense-then-send, compare the returning
// frame against what was sent one lap earlier, jam on mismatch, truncated
// binary exponential backoff measured in frame lengths.

#include <cstdint>
#include <optional>
#include <vector>

#include "ringsync/ring_bus.hpp"
#include "ringsync/rng.hpp"
#include "ringsync/types.hpp"

namespace ringsync::csma {

inline constexpr int kJamWords = 4;
inline constexpr int kMaxBackoffExponent = 10;

/// Header + (M - 1) payload words + last word.
constexpr int frame_words(int message_words) noexcept { return message_words + 1; }

/// u * frame_length with u uniform over [0, 2^min(10, c)). Requires c >= 1.
Tick csma_backoff(int collision_count, Rng& rng, int frame_length);

struct Attempt {
  MessageId message = kNoMessage;
  NodeId destination = kNoNode;
  Tick started_at = 0;
  int words_written = 0;
  int frame_length = 0;

  bool writing() const noexcept { return words_written < frame_length; }
};

struct CsmaNodeState {
  NodeId id = kNoNode;
  int position = 0;
  int collision_count = 0;
  Tick backoff_remaining = 0;
  int jam_remaining = 0;
  Tick pending_backoff = 0;
  std::optional<Attempt> attempt;
  FrameReceiver receiver;

  CsmaNodeState(NodeId node, int pos, std::uint32_t last_seq)
      : id(node), position(pos), receiver(node, last_seq) {}

  bool waiting() const noexcept { return jam_remaining > 0 || backoff_remaining > 0; }
};

/// Word `seq` of the frame for an attempt.
BusWord frame_word(const CsmaNodeState& node, const Attempt& attempt, int seq, Tick now);

/// Starts an attempt if the queue is nonempty, the node is idle and the
/// carrier at its position is free. Returns true if it started; the caller
/// writes the header this tick.
bool csma_try_send(CsmaNodeState& node, const BusWord& incoming,
                   const Message* head, int frame_length, Tick now);

enum class Verdict {
  idle,       ///< nothing to compare this tick
  match,      ///< returning word equals what was sent
  collision,  ///< mismatch: attempt aborted, jam armed
  success,    ///< the last word came back intact
};

/// Compares the word returning after one lap with the word sent L ticks
/// earlier. On collision aborts the attempt, increments the count, arms the
/// jam burst and draws the backoff.
Verdict csma_monitor(CsmaNodeState& node, const BusWord& incoming, Tick now,
                     int bus_length, Rng& backoff_rng);

struct CsmaStats {
  std::uint64_t attempts = 0;
  std::uint64_t collisions_detected = 0;
  std::uint64_t successes = 0;
  std::uint64_t jam_words = 0;
};

class CsmaArbiter {
 public:
  CsmaArbiter(const RingConfig& config, const RingState& state);

  void step(RingState& state);

  const CsmaStats& stats() const noexcept { return stats_; }
  const std::vector<CsmaNodeState>& nodes() const noexcept { return nodes_; }

 private:
  void step_node(CsmaNodeState& node, RingState& state);

  int frame_length_;
  std::vector<CsmaNodeState> nodes_;
  std::vector<Rng> backoff_rng_;
  CsmaStats stats_;
};

}  // namespace ringsync::csma
