#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ringsync/errors.hpp"
#include "ringsync/ring_bus.hpp"

namespace ringsync {
namespace {

RingConfig fixed_ring() {
  RingConfig c;
  c.node_positions = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90};
  return c;
}

BusWord word(WordKind kind, NodeId owner, std::uint32_t data = 0, Tick at = 0) {
  return BusWord{.kind = kind, .data = data, .owner = owner, .message = 0, .written_at = at};
}

TEST(BuildRing, FixedPositions) {
  const RingState s = build_ring(fixed_ring());
  EXPECT_EQ(s.bus.length(), 100);
  EXPECT_EQ(s.tick(), 0);
  ASSERT_EQ(s.nodes.size(), 10u);
  for (int p = 0; p < 100; ++p) EXPECT_TRUE(s.bus.at(p).is_idle());
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(s.nodes[i].position, static_cast<int>(10 * i));
    EXPECT_TRUE(s.nodes[i].tx_queue.empty());
  }
}

TEST(BuildRing, PositionsSortedInternally) {
  RingConfig c;
  c.node_count = 3;
  c.node_positions = {70, 5, 33};
  const RingState s = build_ring(c);
  EXPECT_EQ(s.nodes[0].position, 5);
  EXPECT_EQ(s.nodes[1].position, 33);
  EXPECT_EQ(s.nodes[2].position, 70);
}

TEST(BuildRing, SeededPlacementIsDeterministicAndDistinct) {
  RingConfig c;
  c.seed = 1234;
  const auto a = place_nodes(c);
  EXPECT_EQ(a, place_nodes(c));
  ASSERT_EQ(a.size(), 10u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  for (int p : a) {
    EXPECT_GE(p, 0);
    EXPECT_LT(p, 100);
  }
  c.seed = 1235;
  EXPECT_NE(a, place_nodes(c));
}

TEST(BuildRing, RejectsInvalidConfigs) {
  RingConfig c;
  c.node_count = 101;
  EXPECT_THROW(build_ring(c), ValidationError);

  c = fixed_ring();
  c.node_positions[3] = 20;
  EXPECT_THROW(build_ring(c), ValidationError);

  c = fixed_ring();
  c.node_positions[0] = 100;
  EXPECT_THROW(build_ring(c), ValidationError);

  c = RingConfig{};
  c.traffic_rate = 1.5;
  try {
    validate(c);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("traffic_rate"), std::string::npos);
  }
}

TEST(GenerateTraffic, ZeroRateGeneratesNothing) {
  RingConfig c = fixed_ring();
  c.traffic_rate = 0;
  RingState s = build_ring(c);
  for (int t = 0; t < 100000; ++t) {
    generate_traffic(s, c);
    advance(s);
  }
  EXPECT_TRUE(s.messages.empty());
}

TEST(GenerateTraffic, PerWordProbability) {
  RingConfig c;
  c.traffic_rate = 0.5;
  EXPECT_NEAR(generation_probability(c), 4.7619e-4, 1e-8);
  EXPECT_DOUBLE_EQ(generation_probability(c), 0.5 / 1050);
}

TEST(GenerateTraffic, CountMatchesBinomialExpectation) {
  // Oracle: T * R / M messages in total; each node is Binomial(T, R/(N*M)).
  const Tick ticks = 1'000'000;
  const double expected_total = ticks * 0.5 / 105;
  double pooled = 0;
  int pairs_within_3sd = 0;
  const int seeds = 20;
  for (int seed = 1; seed <= seeds; ++seed) {
    RingConfig c = fixed_ring();
    c.seed = static_cast<std::uint64_t>(seed);
    RingState s = build_ring(c);
    for (Tick t = 0; t < ticks; ++t) {
      generate_traffic(s, c);
      advance(s);
    }
    pooled += static_cast<double>(s.messages.size());
    const double p = generation_probability(c);
    const double mean = ticks * p, sd = std::sqrt(ticks * p * (1 - p));
    std::vector<int> per_node(10, 0);
    for (const auto& m : s.messages) ++per_node[static_cast<std::size_t>(m.source)];
    for (int n : per_node) pairs_within_3sd += std::abs(n - mean) <= 3 * sd ? 1 : 0;
  }
  EXPECT_NEAR(pooled / seeds, expected_total, expected_total * 0.05);
  EXPECT_GE(pairs_within_3sd, static_cast<int>(std::ceil(0.95 * seeds * 10)));
}

TEST(GenerateTraffic, MessageFieldsAreConsistent) {
  RingConfig c = fixed_ring();
  c.traffic_rate = 1.0;
  RingState s = build_ring(c);
  std::vector<int> dest_hist(10, 0);
  for (Tick t = 0; t < 200000; ++t) {
    generate_traffic(s, c);
    advance(s);
  }
  ASSERT_GT(s.messages.size(), 1000u);
  for (std::size_t i = 0; i < s.messages.size(); ++i) {
    const auto& m = s.messages[i];
    EXPECT_EQ(m.id, static_cast<MessageId>(i));
    EXPECT_NE(m.source, m.destination);
    EXPECT_GE(m.destination, 0);
    EXPECT_LT(m.destination, 10);
    EXPECT_EQ(m.size_words, 105);
    if (i > 0) EXPECT_GE(m.created_at, s.messages[i - 1].created_at);
    ++dest_hist[static_cast<std::size_t>(m.destination)];
  }
  for (int h : dest_hist) EXPECT_GT(h, 0);
}

TEST(GenerateTraffic, SameSeedSameTrajectory) {
  RingConfig c;
  c.seed = 77;
  c.traffic_rate = 0.9;
  RingState a = build_ring(c), b = build_ring(c);
  for (Tick t = 0; t < 100000; ++t) {
    generate_traffic(a, c);
    generate_traffic(b, c);
    advance(a);
    advance(b);
  }
  ASSERT_EQ(a.messages.size(), b.messages.size());
  for (std::size_t i = 0; i < a.messages.size(); ++i) {
    EXPECT_EQ(a.messages[i].source, b.messages[i].source);
    EXPECT_EQ(a.messages[i].destination, b.messages[i].destination);
    EXPECT_EQ(a.messages[i].created_at, b.messages[i].created_at);
  }
}

TEST(Advance, IdleRingStaysIdle) {
  RingBus bus(100);
  bus.advance();
  EXPECT_EQ(bus.tick(), 1);
  for (int p = 0; p < 100; ++p) EXPECT_TRUE(bus.at(p).is_idle());
}

TEST(Advance, SingleWordShifts) {
  RingBus bus(100);
  bus.add(99, word(WordKind::payload, 3, 7));
  bus.advance();
  EXPECT_EQ(bus.at(0).kind, WordKind::payload);
  EXPECT_EQ(bus.at(0).data, 7u);
  EXPECT_TRUE(bus.at(99).is_idle());
}

TEST(Advance, ConflictingWritesCollide) {
  RingBus bus(100);
  bus.add(41, word(WordKind::payload, 2, 5));
  bus.advance();  // payload now passes position 42
  bus.add(42, word(WordKind::header, 4, 9, 1));
  EXPECT_EQ(bus.at(42).kind, WordKind::collided);
  EXPECT_EQ(bus.collisions(), 1u);
  bus.advance();
  EXPECT_EQ(bus.at(43).kind, WordKind::collided);
  EXPECT_TRUE(bus.at(42).is_idle());
}

TEST(Advance, OverwriteAndDropDoNotCollide) {
  RingBus bus(10);
  bus.add(3, word(WordKind::ap_zero, kNoNode));
  bus.overwrite(3, word(WordKind::ap_one, kNoNode));
  EXPECT_EQ(bus.at(3).kind, WordKind::ap_one);
  bus.drop(3);
  EXPECT_TRUE(bus.at(3).is_idle());
  EXPECT_EQ(bus.collisions(), 0u);
}

TEST(AdvanceProperty, ConservationOfPropagation) {
  for (int len : {2, 7, 100, 257}) {
    for (int p = 0; p < len; p += std::max(1, len / 5)) {
      RingBus bus(len);
      for (int k = 0; k < 3; ++k) bus.advance();
      bus.add(p, word(WordKind::header, 1, 42, bus.tick()));
      for (int k = 0; k < len; ++k) {
        const int at = (p + k) % len;
        ASSERT_EQ(bus.at(at).kind, WordKind::header) << len << ' ' << p << ' ' << k;
        ASSERT_EQ(bus.at(at).data, 42u);
        int occupied = 0;
        for (int q = 0; q < len; ++q) occupied += bus.at(q).is_idle() ? 0 : 1;
        ASSERT_EQ(occupied, 1);
        bus.advance();
      }
    }
  }
}

TEST(Render, OneGlyphPerSlot) {
  RingBus bus(6);
  bus.add(0, word(WordKind::ap_one, kNoNode));
  bus.add(1, word(WordKind::header, 0));
  bus.add(2, word(WordKind::payload, 0));
  bus.add(3, word(WordKind::last, 0));
  bus.add(4, word(WordKind::jam, 0));
  EXPECT_EQ(bus.render(), "1HpLJ.");
}

TEST(AbsorbOwn, AbsorbsAfterExactlyOneLap) {
  RingBus bus(100);
  bus.add(20, word(WordKind::header, 1, 5, 0));
  for (int k = 0; k < 100; ++k) bus.advance();
  const BusWord incoming = bus.at(20);
  ASSERT_EQ(incoming.kind, WordKind::header);
  EXPECT_TRUE(absorb_own(bus, 1, 20, incoming));
  EXPECT_TRUE(bus.at(20).is_idle());
}

TEST(AbsorbOwn, ForwardsOtherOwners) {
  RingBus bus(100);
  bus.add(20, word(WordKind::payload, 2, 5, 0));
  const BusWord incoming = bus.at(20);
  EXPECT_FALSE(absorb_own(bus, 1, 20, incoming));
  EXPECT_EQ(bus.at(20).kind, WordKind::payload);
}

TEST(AbsorbOwn, WordOlderThanOneLapIsAFault) {
  RingBus bus(10);
  bus.add(0, word(WordKind::payload, 1, 1, 0));
  for (int k = 0; k < 20; ++k) bus.advance();
  EXPECT_THROW(absorb_own(bus, 1, 0, bus.at(0)), ProtocolFault);
}

std::vector<BusWord> frame(NodeId owner, NodeId dst, MessageId id, std::uint32_t last_seq) {
  std::vector<BusWord> f;
  f.push_back({WordKind::header, static_cast<std::uint32_t>(dst), owner, id, 0});
  for (std::uint32_t s = 1; s < last_seq; ++s) f.push_back({WordKind::payload, s, owner, id, 0});
  f.push_back({WordKind::last, last_seq, owner, id, 0});
  return f;
}

TEST(FrameReceiver, DeliversCleanFrameAddressedToSelf) {
  FrameReceiver rx(3, 103);
  int deliveries = 0;
  const auto f = frame(1, 3, 17, 103);
  ASSERT_EQ(f.size(), 104u);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto got = rx.observe(f[i]);
    if (got) {
      ++deliveries;
      EXPECT_EQ(*got, 17);
      EXPECT_EQ(i, f.size() - 1);
    }
  }
  EXPECT_EQ(deliveries, 1);
}

TEST(FrameReceiver, IgnoresFramesForOthers) {
  FrameReceiver rx(3, 103);
  for (const auto& w : frame(1, 4, 17, 103)) EXPECT_FALSE(rx.observe(w));
}

TEST(FrameReceiver, JamDiscardsPartialBuffer) {
  FrameReceiver rx(3, 105);
  auto f = frame(1, 3, 17, 105);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_FALSE(rx.observe(f[i]));
  EXPECT_TRUE(rx.active());
  EXPECT_FALSE(rx.observe({WordKind::jam, 0, 1, kNoMessage, 0}));
  EXPECT_FALSE(rx.active());
  EXPECT_EQ(rx.discarded(), 1u);
  for (std::size_t i = 50; i < f.size(); ++i) EXPECT_FALSE(rx.observe(f[i]));
}

TEST(FrameReceiver, GapDiscards) {
  FrameReceiver rx(3, 10);
  auto f = frame(1, 3, 17, 10);
  f.erase(f.begin() + 4);
  for (const auto& w : f) EXPECT_FALSE(rx.observe(w));
}

}  // namespace
}  // namespace ringsync
