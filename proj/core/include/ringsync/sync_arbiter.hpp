#pragma once

// Timing-based arbitration over arbitration points (APs).
//
// An AP slot is injected at the origin position every T_AP ticks and makes
// one lap. A node that wants to send overwrites a free AP ("0") with "1" and
// streams T_AP - 1 content words behind it; downstream nodes that read "1"
// defer. A node that has just sent must leave its next AP alone.

#include <cstdint>
#include <optional>
#include <vector>

#include "ringsync/ring_bus.hpp"
#include "ringsync/types.hpp"

namespace ringsync::sync {

struct ApSchedule {
  int ap_interval_words = 105;
  int origin_position = 0;
  int bus_length = 100;

  /// Ring distance from the origin along the propagation direction.
  int offset_of(int position) const noexcept {
    const int d = (position - origin_position) % bus_length;
    return d < 0 ? d + bus_length : d;
  }
  /// Tick at which AP slot `cycle` passes `position`.
  Tick arrival_tick(Tick cycle, int position) const noexcept {
    return cycle * ap_interval_words + offset_of(position);
  }
  /// AP cycle passing `position` at `tick`, if any.
  std::optional<Tick> cycle_at(Tick tick, int position) const noexcept {
    const Tick rel = tick - offset_of(position);
    if (rel < 0 || rel % ap_interval_words != 0) return std::nullopt;
    return rel / ap_interval_words;
  }
  int content_words() const noexcept { return ap_interval_words - 1; }
  /// Sequence index of the last content word (header is 0).
  std::uint32_t last_seq() const noexcept {
    return static_cast<std::uint32_t>(content_words() - 1);
  }
};

struct Transmission {
  MessageId message = kNoMessage;
  NodeId destination = kNoNode;
  std::uint32_t next_seq = 0;
  int words_remaining = 0;
};

struct SyncNodeState {
  NodeId id = kNoNode;
  int position = 0;
  bool skip_next_ap = false;
  std::optional<Transmission> transmitting;
  FrameReceiver receiver;
  /// Set on reading "1" at an AP; the content that follows is not ours.
  bool armed_reception = false;
  Tick last_claim_cycle = -2;

  SyncNodeState(NodeId node, int pos, std::uint32_t last_seq)
      : id(node), position(pos), receiver(node, last_seq) {}
};

enum class ApAction {
  forward,     ///< leave the AP word as it is
  regenerate,  ///< AP slot arrived empty; write "0"
  claim,       ///< write "1" and start content next tick
  defer,       ///< read "1" with a nonempty queue
  busy,        ///< another node's content still occupies the slot
};

struct ApDecision {
  ApAction action = ApAction::forward;
  bool armed_reception = false;
};

/// Decides what a node does with the word it reads at its AP tick. Consumes
/// skip_next_ap. Throws ProtocolFault for a jam or collided word.
ApDecision on_ap_arrival(SyncNodeState& node, const BusWord& incoming,
                         bool queue_nonempty);

/// Next content word of the node's ongoing transmission; advances it.
BusWord next_content_word(SyncNodeState& node, Tick now);

struct SyncStats {
  std::uint64_t claims = 0;
  std::uint64_t deferrals = 0;
  std::uint64_t busy_aps = 0;
  std::uint64_t contaminated_injections = 0;
  std::uint64_t consecutive_claims = 0;
};

class SyncArbiter {
 public:
  SyncArbiter(const RingConfig& config, const RingState& state);

  /// Runs one tick of arbitration: AP injection at the origin, then every
  /// node reads, absorbs, receives and writes at its position.
  void step(RingState& state);

  const ApSchedule& schedule() const noexcept { return schedule_; }
  const SyncStats& stats() const noexcept { return stats_; }
  const std::vector<SyncNodeState>& nodes() const noexcept { return nodes_; }

 private:
  void inject_ap(RingBus& bus);
  void step_node(SyncNodeState& node, RingState& state);

  ApSchedule schedule_;
  std::vector<SyncNodeState> nodes_;
  SyncStats stats_;
};

}  // namespace ringsync::sync
