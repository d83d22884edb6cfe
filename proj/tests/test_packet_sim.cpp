#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "fattree/packet_sim.hpp"

using namespace fattree;

namespace {

SimConfig small(SchemeConfig scheme, double rho, std::uint64_t seed = 1) {
  SimConfig c;
  c.layers = 3;
  c.radix_half = 4;
  c.scheme = scheme;
  c.rho = rho;
  c.horizon_slots = 300;
  c.warmup_slots = 200;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(PacketThreshold, Examples) {
  EXPECT_NEAR(packet_threshold(0.9), 1.0 - std::log(0.1), 1e-12);
  EXPECT_NEAR(packet_threshold(0.9), 3.3026, 1e-4);
  EXPECT_DOUBLE_EQ(packet_threshold(0.0), 1.0);
  EXPECT_NEAR(packet_threshold(1.0 - std::exp(-1.0)), 2.0, 1e-12);
  EXPECT_THROW(packet_threshold(1.0), ParameterError);
  EXPECT_THROW(packet_threshold(1.5), ParameterError);
}

TEST(Simulator, EmptyNetworkStaysEmpty) {
  SimConfig c = small(SchemeConfig::drb(1.0), 0.5);
  PacketSimulator sim(c);
  for (int i = 0; i < 10; ++i) {
    const SlotStats s = sim.advance_slot();
    EXPECT_EQ(s.injected, 0);
    EXPECT_EQ(s.delivered, 0);
    for (const auto& l : s.layers) EXPECT_EQ(l.max, 0.0);
  }
  EXPECT_EQ(sim.queued_packets(), 0);
}

// Pair (0,5) on F(2,2) has distance 2: up host->edge queue, edge->core,
// core->edge, edge->host is 3 queue services after the staging slot.
TEST(Simulator, SinglePacketDelayEqualsHopCount) {
  SimConfig c;
  c.layers = 2;
  c.radix_half = 2;
  c.scheme = SchemeConfig::dmodk();
  PacketSimulator sim(c);
  ASSERT_EQ(sim.topology().distance(0, 5), 2);
  std::optional<Packet> got;
  sim.on_delivery([&](const Packet& p) { got = p; });
  sim.add_packet(0, 5);
  for (int i = 0; i < 10 && !got; ++i) sim.advance_slot();
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(*got->delivery_slot - got->birth_slot, 2 * 2 - 1);
}

TEST(Simulator, DistanceOnePacketSkipsUpwardStage) {
  SimConfig c;
  c.layers = 3;
  c.radix_half = 2;
  PacketSimulator sim(c);
  int up_enqueues = 0;
  sim.set_trace([&](const TraceEvent& e) {
    if (e.kind == TraceEvent::Kind::kEnqueue &&
        sim.topology().link_at(e.queue).direction == Direction::kUp) {
      ++up_enqueues;
    }
  });
  std::optional<Packet> got;
  sim.on_delivery([&](const Packet& p) { got = p; });
  sim.add_packet(4, 5);
  sim.advance_slot();
  sim.advance_slot();
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(*got->delivery_slot - got->birth_slot, 1);
  EXPECT_EQ(up_enqueues, 0);
}

TEST(Simulator, QueueDrainsOnePerSlot) {
  SimConfig c;
  c.layers = 2;
  c.radix_half = 2;
  PacketSimulator sim(c);
  // Three packets from three sources to host 0 share its host downlink.
  sim.add_packet(1, 0);
  sim.add_packet(1, 0);
  sim.add_packet(1, 0);
  sim.advance_slot();
  const LinkRef host_down{1, Direction::kDown, 0};
  EXPECT_EQ(sim.queue_length(host_down), 3u);
  std::vector<std::size_t> lengths;
  for (int i = 0; i < 3; ++i) {
    sim.advance_slot();
    lengths.push_back(sim.queue_length(host_down));
  }
  EXPECT_EQ(lengths, (std::vector<std::size_t>{2, 1, 0}));
  EXPECT_EQ(sim.delivered(), 3);
}

TEST(Simulator, ConservationEverySlot) {
  PacketSimulator sim(small(SchemeConfig::micro(), 0.7));
  for (int i = 0; i < 200; ++i) {
    sim.step();
    ASSERT_EQ(sim.injected(), sim.delivered() + sim.queued_packets() + sim.staged());
  }
}

TEST(Simulator, FifoAndWorkConservation) {
  PacketSimulator sim(small(SchemeConfig::drb(0.5), 0.8, 3));
  std::map<std::size_t, std::deque<std::uint64_t>> mirror;
  std::map<std::size_t, int> served_this_slot;
  std::int64_t current_slot = -1;
  bool ok = true;
  sim.set_trace([&](const TraceEvent& e) {
    if (e.slot != current_slot) {
      current_slot = e.slot;
      served_this_slot.clear();
    }
    if (e.kind == TraceEvent::Kind::kEnqueue) {
      mirror[e.queue].push_back(e.packet);
    } else if (e.kind == TraceEvent::Kind::kDequeue) {
      auto& q = mirror[e.queue];
      ok = ok && !q.empty() && q.front() == e.packet;
      if (!q.empty()) q.pop_front();
      ok = ok && ++served_this_slot[e.queue] == 1;
    }
  });
  for (int i = 0; i < 150; ++i) {
    // Every queue non-empty before the slot must be served during it.
    std::set<std::size_t> nonempty;
    for (const auto& [q, items] : mirror) {
      if (!items.empty()) nonempty.insert(q);
    }
    const std::int64_t slot = sim.slot();
    sim.step();
    for (std::size_t q : nonempty) {
      ok = ok && current_slot == slot && served_this_slot.count(q) == 1;
    }
    ASSERT_TRUE(ok) << "slot " << slot;
  }
}

TEST(Simulator, FullLoadInjectsAPermutation) {
  SimConfig c = small(SchemeConfig::dmodk(), 1.0);
  PacketSimulator sim(c);
  const auto pkts = sim.inject_slot();
  ASSERT_EQ(static_cast<std::int64_t>(pkts.size()), sim.topology().host_count());
  std::set<std::int64_t> dests;
  for (const auto& p : pkts) {
    EXPECT_NE(p.source, p.dest);
    dests.insert(p.dest);
  }
  EXPECT_EQ(static_cast<std::int64_t>(dests.size()), sim.topology().host_count());
}

TEST(Simulator, InjectionRateMatchesRho) {
  const double rho = 0.3;
  SimConfig c = small(SchemeConfig::dmodk(), rho, 5);
  PacketSimulator sim(c);
  const int slots = 2000;
  double sum = 0.0;
  for (int i = 0; i < slots; ++i) {
    sum += static_cast<double>(sim.inject_slot().size());
    sim.advance_slot();
  }
  const double n = static_cast<double>(sim.topology().host_count());
  const double se = std::sqrt(n * rho * (1 - rho) / slots);
  EXPECT_NEAR(sum / slots, rho * n, 3 * se);
}

TEST(Simulator, FixedPermutationModeReusesDestinations) {
  SimConfig c = small(SchemeConfig::dmodk(), 1.0);
  c.fixed_permutation = true;
  PacketSimulator sim(c);
  std::map<std::int64_t, std::int64_t> first;
  for (const auto& p : sim.inject_slot()) first[p.source] = p.dest;
  sim.advance_slot();
  for (const auto& p : sim.inject_slot()) {
    ASSERT_TRUE(first.count(p.source));
    EXPECT_EQ(first[p.source], p.dest);
  }
}

TEST(RunPacketSim, LightTrafficHasNoQueueing) {
  SimConfig c = small(SchemeConfig::drb(packet_threshold(0.1)), 0.1);
  const PacketSimResult r = run_packet_sim(c);
  EXPECT_TRUE(r.drained);
  // Hop count averaged over uniform derangement destinations on F(3,4).
  const Topology t(3, 4);
  double hops = 0.0;
  for (std::int64_t d = 1; d < t.host_count(); ++d) hops += 2 * t.distance(0, d) - 1;
  hops /= static_cast<double>(t.host_count() - 1);
  EXPECT_NEAR(r.latency.mean_latency, hops, 0.15 * hops);
  for (const auto& q : r.queues) EXPECT_LT(q.mean, 0.2);
}

TEST(RunPacketSim, StatsAreOrderedAndDeterministic) {
  const SimConfig c = small(SchemeConfig::drb(1.5), 0.6, 9);
  const PacketSimResult a = run_packet_sim(c);
  const PacketSimResult b = run_packet_sim(c);
  ASSERT_EQ(a.queues.size(), b.queues.size());
  // Uplinks exist at layers 1..l-1, downlinks at 1..l.
  EXPECT_EQ(a.queues.size(), 5u);
  for (std::size_t i = 0; i < a.queues.size(); ++i) {
    EXPECT_EQ(a.queues[i].mean, b.queues[i].mean);
    EXPECT_EQ(a.queues[i].max, b.queues[i].max);
    EXPECT_GE(a.queues[i].max, a.queues[i].mean);
    EXPECT_GE(a.queues[i].mean, 0.0);
  }
  EXPECT_EQ(a.latency.mean_latency, b.latency.mean_latency);
  EXPECT_EQ(a.latency.max_tail_latency, b.latency.max_tail_latency);
  EXPECT_GE(a.latency.max_tail_latency, a.latency.mean_tail_latency);
  EXPECT_GE(a.latency.mean_tail_latency, a.latency.mean_latency);
  EXPECT_TRUE(a.drained);
  EXPECT_LE(a.delivered, a.injected);
}

TEST(RunPacketSim, QueueGuardTrips) {
  SimConfig c = small(SchemeConfig::dmodk(), 0.95);
  c.max_queued = 5;
  const PacketSimResult r = run_packet_sim(c);
  EXPECT_TRUE(r.diverged);
}

TEST(RunPacketSim, RejectsBadConfig) {
  SimConfig c = small(SchemeConfig::dmodk(), 1.0);
  EXPECT_THROW(run_packet_sim(c), ParameterError);
  c.rho = 0.5;
  c.warmup_slots = c.horizon_slots;
  EXPECT_THROW(run_packet_sim(c), ParameterError);
}
