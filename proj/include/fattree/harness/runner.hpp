#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fattree/ctmc.hpp"
#include "fattree/flow_experiment.hpp"
#include "fattree/fluid.hpp"
#include "fattree/harness/config.hpp"
#include "fattree/packet_sim.hpp"
#include "fattree/topology.hpp"

namespace fattree::harness {

inline constexpr const char* kToolName = "fattree_drb";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kCsvSchemaVersion = 1;

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,       // I/O or unexpected internal failure
  kExitConfig = 2,      // schema or parameter validation
  kExitGuard = 3,       // run finished but a guard tripped
};

struct RunOptions {
  std::string out_dir = ".";
  std::string out;  // primary CSV path; empty picks a default inside out_dir
  std::optional<std::uint64_t> seed;  // replaces base_seed
  int jobs = 1;
  std::ostream* log = nullptr;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::vector<std::string> outputs;  // CSVs, SVGs and the record, in write order
  std::string record_path;
  nlohmann::json record;
};

// Runs the experiment named by `config`.  Writes CSVs, optional SVGs and a
// JSON run record next to the primary CSV.  Outputs are removed again when
// the run aborts with an error; guard failures keep them for inspection.
RunResult run_experiment(ExperimentConfig config, const RunOptions& options);

// Loads, validates and runs a config file.
RunResult run_config_file(const std::string& config_path, const RunOptions& options);

// Default jobs from FATTREE_DRB_JOBS, else 1.
int default_jobs();

// CSV emitters, one per documented schema.
extern const std::vector<std::string> kFlowColumns;
extern const std::vector<std::string> kQueueColumns;
extern const std::vector<std::string> kLatencyColumns;
extern const std::vector<std::string> kFluidColumns;
extern const std::vector<std::string> kCtmcColumns;
extern const std::vector<std::string> kAdjacencyColumns;

void write_flow_csv(std::ostream& out, int layers, int radix_half, const FlowExpOutput& result);

struct PacketRun {
  std::string scheme;
  double rho = 0.0;
  std::uint64_t seed = 0;
  PacketSimResult result;
};

void write_queue_csv(std::ostream& out, const std::vector<PacketRun>& runs);
void write_latency_csv(std::ostream& out, const std::vector<PacketRun>& runs);

// One row per i in [0, i_max]; bound_ok is 0 where check_decay_bounds
// reported a violation.
void write_fluid_csv(std::ostream& out, const TailDistribution& tail,
                     const DecayCertificate& cert, const DecayReport& report);

void write_ctmc_csv(std::ostream& out, const TailDistribution& empirical,
                    const TailDistribution& fixed_point, int i_max);

// Every layer m -> m+1 link, switches written as "layer:label".
void write_adjacency_csv(std::ostream& out, const Topology& topo);

nlohmann::json topology_summary(const Topology& topo);

}  // namespace fattree::harness
