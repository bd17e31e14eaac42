#include "ringsync/sync_arbiter.hpp"

#include <string>

#include "ringsync/errors.hpp"

namespace ringsync::sync {

ApDecision on_ap_arrival(SyncNodeState& node, const BusWord& incoming,
                         bool queue_nonempty) {
  const bool skip = node.skip_next_ap;
  node.skip_next_ap = false;
  const bool wants = queue_nonempty && !node.transmitting;

  switch (incoming.kind) {
    case WordKind::ap_one:
      node.armed_reception = true;
      return {wants ? ApAction::defer : ApAction::forward, true};
    case WordKind::ap_zero:
    case WordKind::idle:
      if (wants && !skip) return {ApAction::claim, false};
      return {incoming.is_idle() ? ApAction::regenerate : ApAction::forward, false};
    case WordKind::header:
    case WordKind::payload:
    case WordKind::last:
      return {ApAction::busy, false};
    case WordKind::jam:
    case WordKind::collided:
      break;
  }
  throw ProtocolFault("node " + std::to_string(node.id) + " read '" +
                      std::string(1, glyph(incoming.kind)) + "' at an AP");
}

BusWord next_content_word(SyncNodeState& node, Tick now) {
  Transmission& tx = *node.transmitting;
  BusWord w;
  w.owner = node.id;
  w.message = tx.message;
  w.written_at = now;
  if (tx.next_seq == 0) {
    w.kind = WordKind::header;
    w.data = static_cast<std::uint32_t>(tx.destination);
  } else {
    w.kind = tx.words_remaining == 1 ? WordKind::last : WordKind::payload;
    w.data = tx.next_seq;
  }
  ++tx.next_seq;
  --tx.words_remaining;
  return w;
}

SyncArbiter::SyncArbiter(const RingConfig& config, const RingState& state)
    : schedule_{config.ap_interval_words, config.ap_origin_position,
                config.bus_length_words} {
  nodes_.reserve(state.nodes.size());
  for (const auto& site : state.nodes) {
    nodes_.emplace_back(site.id, site.position, schedule_.last_seq());
  }
}

void SyncArbiter::inject_ap(RingBus& bus) {
  const int origin = schedule_.origin_position;
  // AP words end their lap when they come back to the origin.
  if (bus.at(origin).is_ap()) bus.drop(origin);
  if (bus.tick() % schedule_.ap_interval_words != 0) return;
  if (!bus.at(origin).is_idle()) {
    ++stats_.contaminated_injections;
    return;
  }
  bus.overwrite(origin, BusWord{.kind = WordKind::ap_zero,
                                .data = 0,
                                .owner = kNoNode,
                                .message = kNoMessage,
                                .written_at = bus.tick()});
}

void SyncArbiter::step_node(SyncNodeState& node, RingState& state) {
  RingBus& bus = state.bus;
  const Tick now = bus.tick();
  BusWord incoming = bus.at(node.position);

  if (incoming.is_content() && absorb_own(bus, node.id, node.position, incoming)) {
    incoming = BusWord{};
  }
  if (auto done = node.receiver.observe(incoming)) {
    state.record_delivery(*done, now);
  }

  if (const auto cycle = schedule_.cycle_at(now, node.position)) {
    node.armed_reception = false;
    const ApDecision d = on_ap_arrival(node, incoming, state.has_head(node.id));
    switch (d.action) {
      case ApAction::claim: {
        if (node.last_claim_cycle == *cycle - 1) ++stats_.consecutive_claims;
        node.last_claim_cycle = *cycle;
        ++stats_.claims;
        const Message& m = state.head(node.id);
        node.transmitting = Transmission{.message = m.id,
                                         .destination = m.destination,
                                         .next_seq = 0,
                                         .words_remaining = schedule_.content_words()};
        bus.overwrite(node.position,
                      BusWord{.kind = WordKind::ap_one,
                              .data = static_cast<std::uint32_t>(node.id),
                              .owner = kNoNode,
                              .message = kNoMessage,
                              .written_at = now});
        break;
      }
      case ApAction::regenerate:
        bus.overwrite(node.position, BusWord{.kind = WordKind::ap_zero,
                                             .data = 0,
                                             .owner = kNoNode,
                                             .message = kNoMessage,
                                             .written_at = now});
        break;
      case ApAction::defer:
        ++stats_.deferrals;
        break;
      case ApAction::busy:
        ++stats_.busy_aps;
        break;
      case ApAction::forward:
        break;
    }
    return;
  }

  if (node.transmitting) {
    bus.add(node.position, next_content_word(node, now));
    if (node.transmitting->words_remaining == 0) {
      node.transmitting.reset();
      node.skip_next_ap = true;
      state.pop_head(node.id, now);
    }
  }
}

void SyncArbiter::step(RingState& state) {
  inject_ap(state.bus);
  for (auto& node : nodes_) step_node(node, state);
}

}  // namespace ringsync::sync
