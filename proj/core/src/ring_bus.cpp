#include "ringsync/ring_bus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ringsync/errors.hpp"

namespace ringsync {

char glyph(WordKind kind) noexcept {
  switch (kind) {
    case WordKind::idle: return '.';
    case WordKind::ap_zero: return '0';
    case WordKind::ap_one: return '1';
    case WordKind::header: return 'H';
    case WordKind::payload: return 'p';
    case WordKind::last: return 'L';
    case WordKind::jam: return 'J';
    case WordKind::collided: return 'X';
  }
  return '?';
}

void validate(const RingConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ValidationError(field + ": " + why);
  };
  if (c.bus_length_words < 2) fail("bus_length", "must be >= 2");
  if (c.message_words < 2) fail("message_words", "must be >= 2");
  if (c.node_count < 1) fail("nodes", "must be >= 1");
  if (c.node_count > c.bus_length_words) {
    fail("nodes", "cannot exceed bus_length (" +
                      std::to_string(c.bus_length_words) + ")");
  }
  if (!(c.traffic_rate >= 0.0 && c.traffic_rate <= 1.0)) {
    fail("traffic_rate", "must lie in [0, 1]");
  }
  if (c.node_count == 1 && c.traffic_rate > 0.0) {
    fail("nodes", "at least two nodes are needed to carry traffic");
  }
  if (c.ap_interval_words < 3) fail("ap_interval", "must be >= 3");
  if (c.sim_length_words < 1) fail("sim_words", "must be >= 1");
  if (c.ap_origin_position < 0 || c.ap_origin_position >= c.bus_length_words) {
    fail("ap_origin", "must lie in [0, bus_length)");
  }
  if (!c.node_positions.empty()) {
    if (static_cast<int>(c.node_positions.size()) != c.node_count) {
      fail("node_positions", "expected " + std::to_string(c.node_count) +
                                 " entries, got " +
                                 std::to_string(c.node_positions.size()));
    }
    std::vector<int> sorted = c.node_positions;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] < 0 || sorted[i] >= c.bus_length_words) {
        fail("node_positions", "position " + std::to_string(sorted[i]) +
                                   " outside [0, bus_length)");
      }
      if (i > 0 && sorted[i] == sorted[i - 1]) {
        fail("node_positions", "duplicate position " + std::to_string(sorted[i]));
      }
    }
  }
}

double generation_probability(const RingConfig& c) {
  return c.traffic_rate /
         (static_cast<double>(c.node_count) * static_cast<double>(c.message_words));
}

std::vector<int> place_nodes(const RingConfig& c) {
  validate(c);
  std::vector<int> positions = c.node_positions;
  if (positions.empty()) {
    // Partial Fisher-Yates over all ring positions.
    std::vector<int> pool(static_cast<std::size_t>(c.bus_length_words));
    std::iota(pool.begin(), pool.end(), 0);
    Rng rng = Rng::stream(c.seed, StreamPurpose::placement);
    for (int i = 0; i < c.node_count; ++i) {
      const auto remaining = static_cast<std::uint64_t>(c.bus_length_words - i);
      const auto j = static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(rng.below(remaining));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    positions.assign(pool.begin(), pool.begin() + c.node_count);
  }
  std::sort(positions.begin(), positions.end());
  return positions;
}

RingBus::RingBus(int length) : length_(length) {
  if (length < 1) throw ValidationError("bus_length: must be >= 1");
  slots_.resize(static_cast<std::size_t>(length));
}

void RingBus::add(int position, const BusWord& word) {
  BusWord& slot = slots_[index(position)];
  if (slot.is_idle()) {
    slot = word;
    return;
  }
  ++collisions_;
  slot = BusWord{.kind = WordKind::collided,
                 .data = 0,
                 .owner = word.owner,
                 .message = kNoMessage,
                 .written_at = word.written_at};
}

void RingBus::overwrite(int position, const BusWord& word) {
  slots_[index(position)] = word;
}

void RingBus::drop(int position) { slots_[index(position)] = BusWord{}; }

std::string RingBus::render() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(length_));
  for (int p = 0; p < length_; ++p) out.push_back(glyph(at(p).kind));
  return out;
}

void RingState::pop_head(NodeId node, Tick now) {
  auto& queue = nodes[static_cast<std::size_t>(node)].tx_queue;
  queue.pop_front();
  if (!queue.empty()) messages[static_cast<std::size_t>(queue.front())].dequeued_at = now;
}

bool RingState::record_delivery(MessageId id, Tick now) {
  Message& m = messages[static_cast<std::size_t>(id)];
  if (m.delivered_at) return false;
  m.delivered_at = now;
  return true;
}

RingState build_ring(const RingConfig& config) {
  const std::vector<int> positions = place_nodes(config);
  RingState state{.bus = RingBus(config.bus_length_words),
                  .nodes = {},
                  .messages = {},
                  .traffic_rng = {},
                  .destination_rng = {}};
  state.nodes.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    state.nodes.push_back(NodeSite{static_cast<NodeId>(i), positions[i], {}});
    state.traffic_rng.push_back(Rng::stream(config.seed, StreamPurpose::traffic, i));
    state.destination_rng.push_back(
        Rng::stream(config.seed, StreamPurpose::destination, i));
  }
  return state;
}

void generate_traffic(RingState& state, const RingConfig& config) {
  const double p = generation_probability(config);
  if (p <= 0.0) return;
  const Tick now = state.tick();
  const auto n = static_cast<std::uint64_t>(state.nodes.size());
  for (auto& node : state.nodes) {
    const auto i = static_cast<std::size_t>(node.id);
    if (!state.traffic_rng[i].bernoulli(p)) continue;
    auto dst = static_cast<NodeId>(state.destination_rng[i].below(n - 1));
    if (dst >= node.id) ++dst;
    Message m;
    m.id = static_cast<MessageId>(state.messages.size());
    m.source = node.id;
    m.destination = dst;
    m.size_words = config.message_words;
    m.created_at = now;
    if (node.tx_queue.empty()) m.dequeued_at = now;
    node.tx_queue.push_back(m.id);
    state.messages.push_back(m);
  }
}

bool absorb_own(RingBus& bus, NodeId self, int position, const BusWord& incoming) {
  if (incoming.is_idle() || incoming.owner != self) return false;
  const Tick age = bus.tick() - incoming.written_at;
  if (age > bus.length()) {
    throw ProtocolFault("node " + std::to_string(self) + " saw its own word after " +
                        std::to_string(age) + " ticks on a ring of " +
                        std::to_string(bus.length()));
  }
  bus.drop(position);
  return true;
}

std::optional<MessageId> FrameReceiver::observe(const BusWord& word) {
  if (active_) {
    const bool continues = word.owner == sender_ && word.message == message_ &&
                           word.data == expected_seq_ &&
                           ((expected_seq_ < last_seq_ && word.kind == WordKind::payload) ||
                            (expected_seq_ == last_seq_ && word.kind == WordKind::last));
    if (continues) {
      if (expected_seq_ == last_seq_) {
        active_ = false;
        return message_;
      }
      ++expected_seq_;
      return std::nullopt;
    }
    active_ = false;
    ++discarded_;
  }
  if (starts_frame(word)) {
    active_ = true;
    sender_ = word.owner;
    message_ = word.message;
    expected_seq_ = 1;
  }
  return std::nullopt;
}

}  // namespace ringsync
