#include "fattree/flow_experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fattree/parallel.hpp"
#include "fattree/seeding.hpp"

namespace fattree {

LinkLoadTable::LinkLoadTable(const Topology& topo)
    : topo_(&topo), counts_(topo.dense_link_count(), 0) {}

std::int64_t LinkLoadTable::max_load() const {
  return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
}

std::int64_t LinkLoadTable::max_load(int layer, Direction dir) const {
  const auto begin = counts_.begin() + static_cast<std::ptrdiff_t>(
                                           topo_->dense_index(LinkRef{layer, dir, 0}));
  return *std::max_element(begin, begin + topo_->links_per_layer());
}

std::int64_t LinkLoadTable::total(int layer, Direction dir) const {
  const auto begin = counts_.begin() + static_cast<std::ptrdiff_t>(
                                           topo_->dense_index(LinkRef{layer, dir, 0}));
  return std::accumulate(begin, begin + topo_->links_per_layer(), std::int64_t{0});
}

std::int64_t LinkLoadTable::up_port_load(int layer, std::int64_t switch_label, int port) const {
  return load(LinkRef{layer + 1, Direction::kUp, switch_label * topo_->radix_half() + port});
}

std::vector<std::int64_t> random_derangement(std::int64_t n, Rng& rng) {
  if (n < 2) throw ParameterError("a derangement needs at least 2 elements");
  std::vector<std::int64_t> perm(static_cast<std::size_t>(n));
  // Rejection keeps the result uniform over derangements; acceptance is ~1/e.
  for (;;) {
    std::iota(perm.begin(), perm.end(), std::int64_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    bool fixed = false;
    for (std::int64_t i = 0; i < n && !fixed; ++i) fixed = perm[i] == i;
    if (!fixed) return perm;
  }
}

FlowSet gen_c_permutation(std::int64_t hosts, int c, Rng& rng) {
  if (hosts < 2) throw ParameterError("need at least 2 hosts");
  if (c < 1) throw ParameterError("c must be >= 1");
  FlowSet set;
  set.multiplicity = c;
  set.flows.reserve(static_cast<std::size_t>(hosts) * static_cast<std::size_t>(c));
  for (int round = 0; round < c; ++round) {
    const auto perm = random_derangement(hosts, rng);
    for (std::int64_t h = 0; h < hosts; ++h) set.flows.push_back({h, perm[h]});
  }
  return set;
}

namespace {

void add_route(const Topology& topo, LinkLoadTable& table, std::int64_t src,
               std::int64_t dst, const std::vector<int>& up_ports) {
  const int d = topo.radix_half();
  const int k = static_cast<int>(up_ports.size()) + 1;
  table.add(topo.host_link(src, Direction::kUp));
  std::int64_t sw = src / d;
  for (int i = 1; i < k; ++i) {
    const int p = up_ports[i - 1];
    table.add(LinkRef{i + 1, Direction::kUp, sw * d + p});
    sw = topo.with_switch_digit(sw, i, p);
  }
  for (int j = k; j >= 2; --j) {
    const std::int64_t lower = topo.with_switch_digit(sw, j - 1, topo.host_digit(dst, j));
    table.add(LinkRef{j, Direction::kDown, lower * d + topo.switch_digit(sw, j - 1)});
    sw = lower;
  }
  table.add(topo.host_link(dst, Direction::kDown));
}

}  // namespace

LinkLoadTable assign_flows(const Topology& topo, const SchemeConfig& scheme,
                           const FlowSet& flows, Rng& rng) {
  LinkLoadTable table(topo);
  std::vector<Flow> order = flows.flows;
  std::shuffle(order.begin(), order.end(), rng);
  const TableLoadView view(table);
  for (const Flow& f : order) {
    const auto ports = select_up_ports(topo, scheme, f.source, f.dest, view, rng);
    add_route(topo, table, f.source, f.dest, ports);
  }
  return table;
}

int flow_threshold(int c, std::int64_t hosts) {
  if (c < 1) throw ParameterError("c must be >= 1");
  if (hosts < 3) throw ParameterError("threshold schedule needs N >= 3");
  const int half_c = (c + 1) / 2;
  const int cap = static_cast<int>(std::floor(std::log(static_cast<double>(hosts)) / 2.0));
  return std::min(half_c, cap);
}

double estimate_max_load(int c, std::int64_t hosts) {
  const double ln_n = std::log(static_cast<double>(hosts));
  return c + std::log(ln_n) / std::log(2.0) + flow_threshold(c, hosts);
}

SchemeConfig FlowSchemeSpec::resolve(int c, std::int64_t hosts) const {
  if (kind != SchemeKind::kDrb) return SchemeConfig{kind, 0.0};
  if (rule == ThresholdRule::kFlowSchedule) return SchemeConfig::drb(flow_threshold(c, hosts));
  return SchemeConfig::drb(fixed_threshold);
}

std::int64_t flow_replica(const Topology& topo, const SchemeConfig& scheme, int c,
                          std::uint64_t flow_seed, std::uint64_t route_seed) {
  Rng flow_rng(flow_seed);
  const FlowSet flows = gen_c_permutation(topo.host_count(), c, flow_rng);
  Rng route_rng(route_seed);
  return assign_flows(topo, scheme, flows, route_rng).max_load();
}

FlowExpOutput run_flow_experiment(const FlowExpConfig& config) {
  const Topology topo(config.layers, config.radix_half);
  if (config.schemes.empty()) throw ParameterError("flow experiment needs at least one scheme");
  if (config.c_values.empty()) throw ParameterError("flow experiment needs at least one c");
  if (config.repetitions < 1) throw ParameterError("repetitions must be >= 1");
  for (int c : config.c_values) {
    if (c < 1) throw ParameterError("c values must be >= 1");
  }

  FlowExpOutput out;
  const std::size_t reps = static_cast<std::size_t>(config.repetitions);
  const std::size_t per_scheme = config.c_values.size() * reps;
  out.records.resize(config.schemes.size() * per_scheme);

  parallel_for(out.records.size(), config.jobs, [&](std::size_t job) {
    const std::size_t si = job / per_scheme;
    const std::size_t ci = (job % per_scheme) / reps;
    const int rep = static_cast<int>(job % reps);
    const FlowSchemeSpec& spec = config.schemes[si];
    const int c = config.c_values[ci];
    // Flow sets are shared across schemes for a given (c, rep).
    const std::uint64_t flow_seed = derive_seed(config.base_seed, "flows",
                                                static_cast<std::uint64_t>(c),
                                                static_cast<std::uint64_t>(rep));
    const std::uint64_t route_seed = derive_seed(config.base_seed, "route", spec.label,
                                                 static_cast<std::uint64_t>(c),
                                                 static_cast<std::uint64_t>(rep));
    FlowRepRecord& rec = out.records[job];
    rec.scheme = spec.label;
    rec.c = c;
    rec.rep = rep;
    rec.seed = route_seed;
    rec.max_link_load =
        flow_replica(topo, spec.resolve(c, topo.host_count()), c, flow_seed, route_seed);
    rec.estimate = estimate_max_load(c, topo.host_count());
    rec.rel_error = std::abs(static_cast<double>(rec.max_link_load) - rec.estimate) / rec.estimate;
  });

  for (std::size_t si = 0; si < config.schemes.size(); ++si) {
    for (std::size_t ci = 0; ci < config.c_values.size(); ++ci) {
      FlowExpResult res;
      res.scheme = config.schemes[si].label;
      res.c = config.c_values[ci];
      res.repetitions = config.repetitions;
      for (std::size_t r = 0; r < reps; ++r) {
        res.max_loads.push_back(out.records[si * per_scheme + ci * reps + r].max_link_load);
      }
      const double n = static_cast<double>(reps);
      double sum = 0.0;
      for (auto v : res.max_loads) sum += static_cast<double>(v);
      res.mean = sum / n;
      double ss = 0.0;
      for (auto v : res.max_loads) ss += (static_cast<double>(v) - res.mean) * (static_cast<double>(v) - res.mean);
      res.variance = reps > 1 ? ss / (n - 1.0) : 0.0;
      res.std_error = std::sqrt(res.variance / n);
      res.estimate = estimate_max_load(res.c, topo.host_count());
      res.rel_error = std::abs(res.mean - res.estimate) / res.estimate;
      out.summaries.push_back(std::move(res));
    }
  }
  return out;
}

}  // namespace fattree
