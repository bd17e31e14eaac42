#pragma once

// Word-clocked unidirectional ring medium, node placement and traffic
// generation. A word written at position p on tick t is seen at position
// (p + k) mod L on tick t + k.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "ringsync/rng.hpp"
#include "ringsync/types.hpp"

namespace ringsync {

enum class WordKind : std::uint8_t {
  idle,
  ap_zero,
  ap_one,
  header,
  payload,
  last,
  jam,
  collided,
};

char glyph(WordKind kind) noexcept;

struct BusWord {
  WordKind kind = WordKind::idle;
  /// Destination id for a header, sequence index for payload/last.
  std::uint32_t data = 0;
  /// Node whose write produced this word; kNoNode for idle and AP words.
  NodeId owner = kNoNode;
  MessageId message = kNoMessage;
  /// Tick of the write (diagnostic; used to check circulation age).
  Tick written_at = 0;

  bool is_idle() const noexcept { return kind == WordKind::idle; }
  bool is_ap() const noexcept {
    return kind == WordKind::ap_zero || kind == WordKind::ap_one;
  }
  bool is_content() const noexcept {
    return kind == WordKind::header || kind == WordKind::payload ||
           kind == WordKind::last;
  }

  /// Equality of everything a receiver can observe (ignores written_at).
  bool same_signal(const BusWord& o) const noexcept {
    return kind == o.kind && data == o.data && owner == o.owner &&
           message == o.message;
  }
};

struct Message {
  MessageId id = kNoMessage;
  NodeId source = kNoNode;
  NodeId destination = kNoNode;
  int size_words = 0;
  Tick created_at = 0;
  /// Tick the message reached the head of its queue; -1 until then.
  Tick dequeued_at = -1;
  std::optional<Tick> delivered_at;
};

struct RingConfig {
  int bus_length_words = 100;
  int message_words = 105;
  int node_count = 10;
  double traffic_rate = 0.5;
  int ap_interval_words = 105;
  Tick sim_length_words = 1'000'000;
  std::uint64_t seed = 1;
  /// Explicit placement; drawn from the seed when empty.
  std::vector<int> node_positions;
  /// Ring position where AP slots are injected.
  int ap_origin_position = 0;
};

/// Throws ValidationError naming the offending field.
void validate(const RingConfig& config);

/// Per-node per-word message generation probability R / (N * M).
double generation_probability(const RingConfig& config);

/// Sorted distinct positions: the configured ones, or N uniform draws.
std::vector<int> place_nodes(const RingConfig& config);

class RingBus {
 public:
  explicit RingBus(int length);

  int length() const noexcept { return length_; }
  Tick tick() const noexcept { return tick_; }

  const BusWord& at(int position) const { return slots_[index(position)]; }

  /// Adds a word at `position`. If the slot already carries a signal the
  /// two superpose into a collided word owned by the writer.
  void add(int position, const BusWord& word);
  /// Replaces the slot unconditionally (AP state changes).
  void overwrite(int position, const BusWord& word);
  /// Removes whatever the slot carries.
  void drop(int position);

  /// Shifts every word one position downstream.
  void advance() noexcept { ++tick_; }

  std::uint64_t collisions() const noexcept { return collisions_; }

  /// One glyph per slot, position 0 first.
  std::string render() const;

 private:
  std::size_t index(int position) const noexcept {
    const Tick i = (static_cast<Tick>(position) - tick_) % length_;
    return static_cast<std::size_t>(i < 0 ? i + length_ : i);
  }

  int length_;
  Tick tick_ = 0;
  std::vector<BusWord> slots_;
  std::uint64_t collisions_ = 0;
};

struct NodeSite {
  NodeId id = kNoNode;
  int position = 0;
  std::deque<MessageId> tx_queue;
};

struct RingState {
  RingBus bus;
  std::vector<NodeSite> nodes;
  /// Every generated message, indexed by id.
  std::vector<Message> messages;
  std::vector<Rng> traffic_rng;
  std::vector<Rng> destination_rng;

  Tick tick() const noexcept { return bus.tick(); }

  bool has_head(NodeId node) const { return !nodes[node].tx_queue.empty(); }
  Message& head(NodeId node) { return messages[nodes[node].tx_queue.front()]; }

  /// Removes the head message; the next one reaches the head at `now`.
  void pop_head(NodeId node, Tick now);

  /// First valid reception wins; later duplicates are ignored.
  /// Returns true if this call recorded the delivery.
  bool record_delivery(MessageId id, Tick now);
};

/// Throws ValidationError on invalid config.
RingState build_ring(const RingConfig& config);

/// Called once per tick before arbitration.
void generate_traffic(RingState& state, const RingConfig& config);

inline void advance(RingState& state) noexcept { state.bus.advance(); }

/// If `incoming` is a word this node wrote, removes it from the bus and
/// returns true. Throws ProtocolFault if it has circulated for longer than
/// one lap.
bool absorb_own(RingBus& bus, NodeId self, int position, const BusWord& incoming);

/**
 * Header-addressed frame reception shared by both arbiters.
 *
 * A frame is a header (data = destination) followed on consecutive ticks by
 * payload words with sequence 1..last_seq-1 and a last word with sequence
 * last_seq, all from the same owner and message. Anything else while a
 * frame is buffered discards the buffer.
 */
class FrameReceiver {
 public:
  FrameReceiver(NodeId self, std::uint32_t last_seq)
      : self_(self), last_seq_(last_seq) {}

  /// Feeds the incoming word; returns the message id when a frame ends.
  std::optional<MessageId> observe(const BusWord& word);

  bool active() const noexcept { return active_; }
  std::uint64_t discarded() const noexcept { return discarded_; }

 private:
  bool starts_frame(const BusWord& word) const noexcept {
    return word.kind == WordKind::header &&
           word.data == static_cast<std::uint32_t>(self_);
  }

  NodeId self_;
  std::uint32_t last_seq_;
  bool active_ = false;
  NodeId sender_ = kNoNode;
  MessageId message_ = kNoMessage;
  std::uint32_t expected_seq_ = 0;
  std::uint64_t discarded_ = 0;
};

}  // namespace ringsync
