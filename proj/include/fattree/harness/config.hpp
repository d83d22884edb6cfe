#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fattree/routing.hpp"

namespace fattree::harness {

// Schema violation; what() starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ExperimentKind { kTopo, kFlowExp, kPacketExp, kFluid, kCtmc };

std::string experiment_name(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

// Threshold selector resolved at run time: a fixed value, the flow-model
// schedule ("eq4", against c and N), the packet-model schedule ("eq7",
// against rho) or "zero".
struct ThresholdSelector {
  enum class Kind { kFixed, kFlowSchedule, kPacketSchedule } kind = Kind::kFixed;
  double value = 0.0;

  std::string label() const;
};

struct SchemeEntry {
  SchemeKind kind = SchemeKind::kDModK;
  ThresholdSelector threshold;

  std::string label() const;  // "dmodk", "drb(eq4)", "drb(2.5)", ...
  SchemeConfig resolve_flow(int c, std::int64_t hosts) const;
  SchemeConfig resolve_packet(double rho) const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kTopo;
  int layers = 3;
  int radix_half = 8;
  std::vector<SchemeEntry> schemes;
  std::uint64_t base_seed = 1;
  int repetitions = 1;

  // flow-exp
  std::vector<int> c_values;

  // packet-exp
  std::vector<double> rho_values;
  int horizon_slots = 2000;
  int warmup_slots = 1500;
  bool fixed_permutation = false;
  std::int64_t max_queued = 0;

  // fluid / ctmc
  double lambda = 0.9;
  int threshold = 0;
  int i_max = 64;
  double tol = 1e-10;
  std::int64_t queues = 10'000;
  std::int64_t burn_in_events = 2'000'000;
  std::int64_t events = 500'000;

  // topo
  bool dump_adjacency = false;

  bool plots = false;

  nlohmann::json to_json() const;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace fattree::harness
