#include "ringsync/csma_arbiter.hpp"

#include <algorithm>

#include "ringsync/errors.hpp"

namespace ringsync::csma {

Tick csma_backoff(int collision_count, Rng& rng, int frame_length) {
  if (collision_count < 1) throw ValidationError("collision count must be >= 1");
  const int exponent = std::min(kMaxBackoffExponent, collision_count);
  const std::uint64_t window = std::uint64_t{1} << exponent;
  return static_cast<Tick>(rng.below(window)) * frame_length;
}

BusWord frame_word(const CsmaNodeState& node, const Attempt& attempt, int seq,
                   Tick now) {
  BusWord w;
  w.owner = node.id;
  w.message = attempt.message;
  w.written_at = now;
  if (seq == 0) {
    w.kind = WordKind::header;
    w.data = static_cast<std::uint32_t>(attempt.destination);
  } else {
    w.kind = seq == attempt.frame_length - 1 ? WordKind::last : WordKind::payload;
    w.data = static_cast<std::uint32_t>(seq);
  }
  return w;
}

bool csma_try_send(CsmaNodeState& node, const BusWord& incoming,
                   const Message* head, int frame_length, Tick now) {
  if (head == nullptr || node.attempt || node.waiting()) return false;
  if (!incoming.is_idle()) return false;
  node.attempt = Attempt{.message = head->id,
                         .destination = head->destination,
                         .started_at = now,
                         .words_written = 0,
                         .frame_length = frame_length};
  return true;
}

Verdict csma_monitor(CsmaNodeState& node, const BusWord& incoming, Tick now,
                     int bus_length, Rng& backoff_rng) {
  if (!node.attempt) return Verdict::idle;
  const Attempt& a = *node.attempt;
  const Tick seq = now - bus_length - a.started_at;
  if (seq < 0 || seq >= a.words_written) return Verdict::idle;

  const BusWord expected = frame_word(node, a, static_cast<int>(seq), now);
  if (incoming.same_signal(expected)) {
    if (seq == a.frame_length - 1) return Verdict::success;
    return Verdict::match;
  }
  node.attempt.reset();
  ++node.collision_count;
  node.jam_remaining = kJamWords;
  node.pending_backoff = csma_backoff(node.collision_count, backoff_rng,
                                      a.frame_length);
  return Verdict::collision;
}

CsmaArbiter::CsmaArbiter(const RingConfig& config, const RingState& state)
    : frame_length_(frame_words(config.message_words)) {
  const auto last_seq = static_cast<std::uint32_t>(frame_length_ - 1);
  nodes_.reserve(state.nodes.size());
  for (const auto& site : state.nodes) {
    nodes_.emplace_back(site.id, site.position, last_seq);
    backoff_rng_.push_back(Rng::stream(config.seed, StreamPurpose::backoff,
                                       static_cast<std::uint64_t>(site.id)));
  }
}

void CsmaArbiter::step_node(CsmaNodeState& node, RingState& state) {
  RingBus& bus = state.bus;
  const Tick now = bus.tick();
  const BusWord incoming = bus.at(node.position);

  const Verdict verdict = csma_monitor(node, incoming, now, bus.length(),
                                       backoff_rng_[static_cast<std::size_t>(node.id)]);
  absorb_own(bus, node.id, node.position, incoming);
  if (auto done = node.receiver.observe(incoming)) {
    state.record_delivery(*done, now);
  }

  if (verdict == Verdict::collision) {
    ++stats_.collisions_detected;
  } else if (verdict == Verdict::success) {
    ++stats_.successes;
    node.attempt.reset();
    node.collision_count = 0;
    state.pop_head(node.id, now);
  }

  if (node.jam_remaining > 0) {
    bus.add(node.position, BusWord{.kind = WordKind::jam,
                                   .data = 0,
                                   .owner = node.id,
                                   .message = kNoMessage,
                                   .written_at = now});
    ++stats_.jam_words;
    if (--node.jam_remaining == 0) node.backoff_remaining = node.pending_backoff;
    return;
  }
  if (node.attempt && node.attempt->writing()) {
    Attempt& a = *node.attempt;
    bus.add(node.position, frame_word(node, a, a.words_written, now));
    ++a.words_written;
    return;
  }
  if (node.backoff_remaining > 0) {
    --node.backoff_remaining;
    return;
  }
  const Message* head = state.has_head(node.id) ? &state.head(node.id) : nullptr;
  if (csma_try_send(node, bus.at(node.position), head, frame_length_, now)) {
    ++stats_.attempts;
    Attempt& a = *node.attempt;
    bus.add(node.position, frame_word(node, a, 0, now));
    a.words_written = 1;
  }
}

void CsmaArbiter::step(RingState& state) {
  for (auto& node : nodes_) step_node(node, state);
}

}  // namespace ringsync::csma
