#include "ringsync/simulation.hpp"

#include <variant>

#include "ringsync/csma_arbiter.hpp"
#include "ringsync/sync_arbiter.hpp"

namespace ringsync {

namespace {

std::size_t delivered_by(const std::vector<Message>& messages, Tick end) {
  std::size_t n = 0;
  for (const auto& m : messages) {
    if (m.delivered_at && *m.delivered_at < end) ++n;
  }
  return n;
}

}  // namespace

RunResult run_simulation(const RingConfig& config, Protocol protocol,
                         const RunOptions& options) {
  RingState state = build_ring(config);
  std::variant<sync::SyncArbiter, csma::CsmaArbiter> arbiter =
      protocol == Protocol::sync
          ? decltype(arbiter){std::in_place_type<sync::SyncArbiter>, config, state}
          : decltype(arbiter){std::in_place_type<csma::CsmaArbiter>, config, state};

  const Tick chunk = config.sim_length_words;
  const Tick cap = chunk * (options.max_length_factor < 1 ? 1 : options.max_length_factor);
  Tick end = chunk;
  for (;;) {
    while (state.tick() < end) {
      generate_traffic(state, config);
      std::visit([&state](auto& a) { a.step(state); }, arbiter);
      if (options.on_tick) options.on_tick(state);
      advance(state);
    }
    if (end >= cap || delivered_by(state.messages, end) >= options.min_delivered) break;
    end += chunk;
  }

  RunResult result;
  result.protocol = protocol;
  result.config = config;
  for (const auto& n : state.nodes) result.positions.push_back(n.position);
  result.stats.window_end = end;
  result.stats.collided_words = state.bus.collisions();
  std::visit(
      [&result](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, sync::SyncArbiter>) {
          result.stats.ap_claims = a.stats().claims;
          result.stats.consecutive_claims = a.stats().consecutive_claims;
          result.stats.contaminated_injections = a.stats().contaminated_injections;
        } else {
          result.stats.attempts = a.stats().attempts;
          result.stats.collisions_detected = a.stats().collisions_detected;
          result.stats.jam_words = a.stats().jam_words;
        }
      },
      arbiter);
  result.messages = std::move(state.messages);
  result.stats.generated = result.messages.size();
  result.stats.delivered = delivered_by(result.messages, end);
  result.stats.undelivered = result.stats.generated - result.stats.delivered;
  return result;
}

}  // namespace ringsync
