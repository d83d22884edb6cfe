#include "fattree/packet_sim.hpp"

#include <algorithm>
#include <cmath>

#include "fattree/flow_experiment.hpp"

namespace fattree {

double packet_threshold(double rho) {
  if (!(rho >= 0.0) || rho >= 1.0) throw ParameterError("rho must lie in [0, 1)");
  return 1.0 - std::log(1.0 - rho);
}

namespace {

class QueueLoadView final : public LoadView {
 public:
  QueueLoadView(const Topology& topo, const std::vector<std::deque<std::uint32_t>>& queues)
      : topo_(&topo), queues_(&queues) {}
  double up_load(int layer, std::int64_t switch_label, int up_port) const override {
    const LinkRef link{layer + 1, Direction::kUp,
                       switch_label * topo_->radix_half() + up_port};
    return static_cast<double>((*queues_)[topo_->dense_index(link)].size());
  }

 private:
  const Topology* topo_;
  const std::vector<std::deque<std::uint32_t>>* queues_;
};

void validate(const SimConfig& c) {
  if (!(c.rho > 0.0 && c.rho < 1.0)) throw ParameterError("rho must lie in (0, 1)");
  if (c.horizon_slots < 1) throw ParameterError("horizon_slots must be >= 1");
  if (c.warmup_slots < 0 || c.warmup_slots >= c.horizon_slots) {
    throw ParameterError("warmup_slots must lie in [0, horizon_slots)");
  }
  if (c.drain_limit_slots < 0) throw ParameterError("drain_limit_slots must be >= 0");
  if (c.max_queued < 0) throw ParameterError("max_queued must be >= 0");
}

}  // namespace

PacketSimulator::PacketSimulator(const SimConfig& config)
    : config_(config),
      topo_(config.layers, config.radix_half),
      rng_(config.seed),
      queues_(topo_.dense_link_count()) {
  if (config_.rho < 0.0 || config_.rho > 1.0) throw ParameterError("rho must lie in [0, 1]");
  if (config_.fixed_permutation) fixed_perm_ = random_derangement(topo_.host_count(), rng_);
}

std::uint32_t PacketSimulator::allocate(std::int64_t source, std::int64_t dest) {
  std::uint32_t idx;
  if (!free_.empty()) {
    idx = free_.back();
    free_.pop_back();
  } else {
    idx = static_cast<std::uint32_t>(pool_.size());
    pool_.emplace_back();
  }
  Packet& p = pool_[idx];
  p.id = next_id_++;
  p.source = source;
  p.dest = dest;
  p.birth_slot = slot_;
  p.distance = topo_.distance(source, dest);
  p.delivery_slot.reset();
  return idx;
}

std::uint64_t PacketSimulator::add_packet(std::int64_t source, std::int64_t dest) {
  if (topo_.distance(source, dest) == 0) throw ParameterError("source and destination coincide");
  const std::uint32_t idx = allocate(source, dest);
  staged_.push_back(idx);
  ++injected_;
  return pool_[idx].id;
}

std::vector<Packet> PacketSimulator::inject_slot() {
  const std::int64_t n = topo_.host_count();
  std::vector<std::int64_t> fresh;
  const std::vector<std::int64_t>* perm = &fixed_perm_;
  if (!config_.fixed_permutation) {
    fresh = random_derangement(n, rng_);
    perm = &fresh;
  }
  std::bernoulli_distribution emit(config_.rho);
  std::vector<Packet> out;
  for (std::int64_t h = 0; h < n; ++h) {
    if (!emit(rng_)) continue;
    add_packet(h, (*perm)[static_cast<std::size_t>(h)]);
    out.push_back(pool_[staged_.back()]);
  }
  return out;
}

void PacketSimulator::enqueue(std::size_t queue, std::uint32_t pkt) {
  queues_[queue].push_back(pkt);
  ++queued_;
  if (trace_) trace_({TraceEvent::Kind::kEnqueue, slot_, queue, pool_[pkt].id});
}

void PacketSimulator::route(const Arrival& a) {
  const Packet& p = pool_[a.slot_index];
  const int d = topo_.radix_half();
  if (!a.downward && a.layer < p.distance) {
    const QueueLoadView view(topo_, queues_);
    const int port = choose_up_port(config_.scheme, a.layer, a.switch_label,
                                    topo_.host_digit(p.dest, a.layer), d, view, rng_);
    enqueue(topo_.dense_index(LinkRef{a.layer + 1, Direction::kUp, a.switch_label * d + port}),
            a.slot_index);
    return;
  }
  const int q = topo_.host_digit(p.dest, a.layer);
  LinkRef link{1, Direction::kDown, a.switch_label * d + q};
  if (a.layer > 1) {
    const std::int64_t lower = topo_.with_switch_digit(a.switch_label, a.layer - 1, q);
    link = LinkRef{a.layer, Direction::kDown,
                   lower * d + topo_.switch_digit(a.switch_label, a.layer - 1)};
  }
  enqueue(topo_.dense_index(link), a.slot_index);
}

SlotStats PacketSimulator::advance_slot() {
  const int d = topo_.radix_half();
  arrivals_.clear();
  SlotStats stats;
  stats.slot = slot_;
  stats.injected = static_cast<std::int64_t>(staged_.size());

  for (std::size_t qi = 0; qi < queues_.size(); ++qi) {
    auto& q = queues_[qi];
    if (q.empty()) continue;
    const std::uint32_t pkt = q.front();
    q.pop_front();
    --queued_;
    if (trace_) trace_({TraceEvent::Kind::kDequeue, slot_, qi, pool_[pkt].id});
    const LinkRef link = topo_.link_at(qi);
    const std::int64_t lower = link.index / d;
    if (link.direction == Direction::kUp) {
      const int m = link.layer - 1;
      const int port = static_cast<int>(link.index % d);
      arrivals_.push_back({pkt, m + 1, topo_.with_switch_digit(lower, m, port), false});
    } else if (link.layer >= 2) {
      arrivals_.push_back({pkt, link.layer - 1, lower, true});
    } else {
      Packet& p = pool_[pkt];
      p.delivery_slot = slot_;
      ++delivered_;
      ++stats.delivered;
      if (trace_) trace_({TraceEvent::Kind::kDeliver, slot_, qi, p.id});
      if (on_delivery_) on_delivery_(p);
      free_.push_back(pkt);
    }
  }
  for (std::uint32_t pkt : staged_) {
    arrivals_.push_back({pkt, 1, pool_[pkt].source / d, false});
  }
  staged_.clear();

  std::shuffle(arrivals_.begin(), arrivals_.end(), rng_);
  for (const Arrival& a : arrivals_) route(a);

  for (int layer = 1; layer <= topo_.layers(); ++layer) {
    for (Direction dir : {Direction::kUp, Direction::kDown}) {
      if (dir == Direction::kUp && layer == topo_.layers()) continue;
      const int link_layer = dir == Direction::kUp ? layer + 1 : layer;
      const std::size_t begin = topo_.dense_index(LinkRef{link_layer, dir, 0});
      const auto count = static_cast<std::size_t>(topo_.links_per_layer());
      std::size_t total = 0;
      std::size_t longest = 0;
      for (std::size_t i = begin; i < begin + count; ++i) {
        total += queues_[i].size();
        longest = std::max(longest, queues_[i].size());
      }
      stats.layers.push_back({layer, dir, static_cast<double>(total) / static_cast<double>(count),
                              static_cast<double>(longest)});
    }
  }
  ++slot_;
  return stats;
}

PacketSimResult run_packet_sim(const SimConfig& config) {
  validate(config);
  PacketSimulator sim(config);
  PacketSimResult result;

  const std::int64_t window_begin = config.warmup_slots;
  const std::int64_t window_end = config.horizon_slots;
  const auto window = static_cast<std::size_t>(window_end - window_begin);
  std::vector<double> cohort_max(window, 0.0);
  std::vector<std::int64_t> cohort_count(window, 0);
  double delay_sum = 0.0;
  std::int64_t outstanding = 0;

  sim.on_delivery([&](const Packet& p) {
    if (p.birth_slot < window_begin || p.birth_slot >= window_end) return;
    const auto idx = static_cast<std::size_t>(p.birth_slot - window_begin);
    const double delay = static_cast<double>(*p.delivery_slot - p.birth_slot);
    delay_sum += delay;
    cohort_max[idx] = std::max(cohort_max[idx], delay);
    ++cohort_count[idx];
    --outstanding;
  });

  std::vector<LayerQueueStat> acc;
  const std::int64_t limit = window_end + config.drain_limit_slots;
  while (sim.slot() < limit) {
    const std::int64_t t = sim.slot();
    if (t >= window_end && outstanding == 0) break;
    const auto injected = static_cast<std::int64_t>(sim.inject_slot().size());
    if (t >= window_begin && t < window_end) outstanding += injected;
    const SlotStats s = sim.advance_slot();
    if (t >= window_begin && t < window_end) {
      if (acc.empty()) {
        acc = s.layers;
        for (auto& a : acc) a.mean = 0.0, a.max = 0.0;
      }
      for (std::size_t i = 0; i < acc.size(); ++i) {
        acc[i].mean += s.layers[i].mean;
        acc[i].max = std::max(acc[i].max, s.layers[i].max);
      }
    }
    if (config.max_queued > 0 && sim.queued_packets() > config.max_queued) {
      result.diverged = true;
      break;
    }
  }
  for (auto& a : acc) a.mean /= static_cast<double>(window);
  result.queues = std::move(acc);
  result.drained = outstanding == 0;
  result.injected = sim.injected();
  result.delivered = sim.delivered();
  result.slots_run = sim.slot();

  LatencyStats& lat = result.latency;
  std::int64_t slots_with_packets = 0;
  double tail_sum = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    lat.packets += cohort_count[i];
    if (cohort_count[i] == 0) continue;
    ++slots_with_packets;
    tail_sum += cohort_max[i];
    lat.max_tail_latency = std::max(lat.max_tail_latency, cohort_max[i]);
  }
  if (lat.packets > 0) lat.mean_latency = delay_sum / static_cast<double>(lat.packets);
  if (slots_with_packets > 0) {
    lat.mean_tail_latency = tail_sum / static_cast<double>(slots_with_packets);
  }
  return result;
}

}  // namespace fattree
