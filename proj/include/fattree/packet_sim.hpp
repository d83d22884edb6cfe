#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "fattree/routing.hpp"
#include "fattree/topology.hpp"

namespace fattree {

// T(rho) = 1 - ln(1 - rho), unrounded.
double packet_threshold(double rho);

struct SimConfig {
  int layers = 3;
  int radix_half = 8;
  SchemeConfig scheme = SchemeConfig::dmodk();
  double rho = 0.5;
  int horizon_slots = 2000;
  int warmup_slots = 1500;
  std::uint64_t seed = 1;
  bool fixed_permutation = false;
  // Abort when more packets than this are queued; 0 disables the guard.
  std::int64_t max_queued = 0;
  // Extra slots allowed after the horizon for measured packets to drain.
  int drain_limit_slots = 20000;
};

struct Packet {
  std::uint64_t id = 0;
  std::int64_t source = 0;
  std::int64_t dest = 0;
  std::int64_t birth_slot = 0;
  int distance = 0;
  std::optional<std::int64_t> delivery_slot;
};

// Per (switch layer, direction) queue statistics.  The layer is that of the
// switch owning the output queue; layer-1 down queues feed hosts.
struct LayerQueueStat {
  int layer = 1;
  Direction direction = Direction::kUp;
  double mean = 0.0;
  double max = 0.0;
};

struct SlotStats {
  std::int64_t slot = 0;
  std::int64_t injected = 0;
  std::int64_t delivered = 0;
  std::vector<LayerQueueStat> layers;
};

struct LatencyStats {
  std::int64_t packets = 0;
  double mean_latency = 0.0;
  double mean_tail_latency = 0.0;  // mean over injection slots of the cohort max
  double max_tail_latency = 0.0;
};

struct PacketSimResult {
  std::vector<LayerQueueStat> queues;  // averaged over the measurement window
  LatencyStats latency;
  std::int64_t injected = 0;
  std::int64_t delivered = 0;
  std::int64_t slots_run = 0;
  bool diverged = false;
  bool drained = true;
};

struct TraceEvent {
  enum class Kind { kEnqueue, kDequeue, kDeliver } kind;
  std::int64_t slot;
  std::size_t queue;  // dense link index
  std::uint64_t packet;
};

class PacketSimulator {
 public:
  explicit PacketSimulator(const SimConfig& config);

  const Topology& topology() const { return topo_; }
  std::int64_t slot() const { return slot_; }

  // Samples this slot's permutation and Bernoulli(rho) emissions.  The
  // packets are staged and routed by the next advance_slot.
  std::vector<Packet> inject_slot();
  // Stages one packet from `source` to `dest` for the next advance_slot.
  std::uint64_t add_packet(std::int64_t source, std::int64_t dest);

  // Departures, then routing of transit and staged arrivals in uniformly
  // random order against post-departure queue lengths, then sampling.
  SlotStats advance_slot();
  SlotStats step() {
    inject_slot();
    return advance_slot();
  }

  std::size_t queue_length(const LinkRef& link) const {
    return queues_[topo_.dense_index(link)].size();
  }
  std::int64_t queued_packets() const { return queued_; }
  std::int64_t injected() const { return injected_; }
  std::int64_t delivered() const { return delivered_; }
  std::int64_t staged() const { return static_cast<std::int64_t>(staged_.size()); }

  // Delivered packets are handed to this callback and then recycled.
  void on_delivery(std::function<void(const Packet&)> fn) { on_delivery_ = std::move(fn); }
  void set_trace(std::function<void(const TraceEvent&)> fn) { trace_ = std::move(fn); }

 private:
  struct Arrival {
    std::uint32_t slot_index;
    int layer;
    std::int64_t switch_label;
    bool downward;
  };

  std::uint32_t allocate(std::int64_t source, std::int64_t dest);
  void route(const Arrival& a);
  void enqueue(std::size_t queue, std::uint32_t pkt);

  SimConfig config_;
  Topology topo_;
  Rng rng_;
  std::vector<std::deque<std::uint32_t>> queues_;
  std::vector<Packet> pool_;
  std::vector<std::uint32_t> free_;
  std::vector<std::uint32_t> staged_;
  std::vector<Arrival> arrivals_;
  std::vector<std::int64_t> fixed_perm_;
  std::int64_t slot_ = 0;
  std::int64_t queued_ = 0;
  std::int64_t injected_ = 0;
  std::int64_t delivered_ = 0;
  std::uint64_t next_id_ = 0;
  std::function<void(const Packet&)> on_delivery_;
  std::function<void(const TraceEvent&)> trace_;
};

PacketSimResult run_packet_sim(const SimConfig& config);

}  // namespace fattree
