#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fattree/routing.hpp"
#include "fattree/topology.hpp"

namespace fattree {

struct Flow {
  std::int64_t source = 0;
  std::int64_t dest = 0;
};

struct FlowSet {
  int multiplicity = 0;  // c
  std::vector<Flow> flows;
};

// Dense per-link counters indexed by Topology::dense_index.
class LinkLoadTable {
 public:
  explicit LinkLoadTable(const Topology& topo);

  std::int64_t load(const LinkRef& link) const { return counts_[topo_->dense_index(link)]; }
  void add(const LinkRef& link, std::int64_t amount = 1) {
    counts_[topo_->dense_index(link)] += amount;
  }
  std::int64_t max_load() const;
  std::int64_t max_load(int layer, Direction dir) const;
  // Load on the link behind up-port `port` of a layer-`layer` switch.
  std::int64_t up_port_load(int layer, std::int64_t switch_label, int port) const;
  std::int64_t total(int layer, Direction dir) const;
  const std::vector<std::int64_t>& raw() const { return counts_; }

 private:
  const Topology* topo_;
  std::vector<std::int64_t> counts_;
};

class TableLoadView final : public LoadView {
 public:
  explicit TableLoadView(const LinkLoadTable& table) : table_(&table) {}
  double up_load(int layer, std::int64_t switch_label, int up_port) const override {
    return static_cast<double>(table_->up_port_load(layer, switch_label, up_port));
  }

 private:
  const LinkLoadTable* table_;
};

// Uniform fixed-point-free permutation of [0, n).
std::vector<std::int64_t> random_derangement(std::int64_t n, Rng& rng);

FlowSet gen_c_permutation(std::int64_t hosts, int c, Rng& rng);

// Processes flows one at a time in a uniformly shuffled order, choosing each
// path against the loads accumulated so far.
LinkLoadTable assign_flows(const Topology& topo, const SchemeConfig& scheme,
                           const FlowSet& flows, Rng& rng);

// Threshold schedule for the flow model: min(ceil(c/2), floor(ln N / 2)).
int flow_threshold(int c, std::int64_t hosts);

// c + ln(ln N)/ln 2 + flow_threshold(c, N).
double estimate_max_load(int c, std::int64_t hosts);

// A scheme with its threshold rule; "eq4" resolves per (c, N).
struct FlowSchemeSpec {
  SchemeKind kind = SchemeKind::kDrb;
  enum class ThresholdRule { kFixed, kFlowSchedule } rule = ThresholdRule::kFixed;
  double fixed_threshold = 0.0;
  std::string label;  // display name, e.g. "drb(eq4)"

  SchemeConfig resolve(int c, std::int64_t hosts) const;
};

struct FlowExpConfig {
  int layers = 3;
  int radix_half = 8;
  std::vector<FlowSchemeSpec> schemes;
  std::vector<int> c_values;
  int repetitions = 1;
  std::uint64_t base_seed = 1;
  int jobs = 1;
};

struct FlowRepRecord {
  std::string scheme;
  int c = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::int64_t max_link_load = 0;
  double estimate = 0.0;
  double rel_error = 0.0;
};

struct FlowExpResult {
  std::string scheme;
  int c = 0;
  int repetitions = 0;
  std::vector<std::int64_t> max_loads;
  double mean = 0.0;
  double variance = 0.0;  // sample variance
  double std_error = 0.0;
  double estimate = 0.0;
  double rel_error = 0.0;  // |mean - estimate| / estimate
};

struct FlowExpOutput {
  std::vector<FlowRepRecord> records;  // ordered by (scheme, c, rep)
  std::vector<FlowExpResult> summaries;
};

FlowExpOutput run_flow_experiment(const FlowExpConfig& config);

// Single replica: max link load of one c-permutation under one scheme.
std::int64_t flow_replica(const Topology& topo, const SchemeConfig& scheme, int c,
                          std::uint64_t flow_seed, std::uint64_t route_seed);

}  // namespace fattree
