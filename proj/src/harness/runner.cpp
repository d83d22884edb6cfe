#include "fattree/harness/runner.hpp"

#include <bit>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fattree/harness/csv.hpp"
#include "fattree/harness/svg.hpp"
#include "fattree/parallel.hpp"
#include "fattree/seeding.hpp"

namespace fattree::harness {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kFlowColumns = {"scheme", "ell",     "d",
                                               "c",      "rep",     "seed",
                                               "max_link_load", "estimate", "rel_error"};
const std::vector<std::string> kQueueColumns = {"scheme", "rho",    "seed", "layer",
                                                "direction", "mean_q", "max_q"};
const std::vector<std::string> kLatencyColumns = {"scheme",       "rho",
                                                  "seed",         "mean_latency",
                                                  "mean_tail_latency", "max_tail_latency"};
const std::vector<std::string> kFluidColumns = {"i", "s_i", "p_i", "lambda_i", "z_i", "bound_ok"};
const std::vector<std::string> kCtmcColumns = {"i", "s_empirical", "s_fixed_point", "abs_diff"};
const std::vector<std::string> kAdjacencyColumns = {"lower_switch", "port", "upper_switch",
                                                    "down_port"};

int default_jobs() {
  if (const char* env = std::getenv("FATTREE_DRB_JOBS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void write_flow_csv(std::ostream& out, int layers, int radix_half, const FlowExpOutput& result) {
  CsvWriter w(out, kFlowColumns);
  for (const auto& r : result.records) {
    w.cell(r.scheme).cell(layers).cell(radix_half).cell(r.c).cell(r.rep).cell(r.seed);
    w.cell(r.max_link_load).cell(r.estimate).cell(r.rel_error);
    w.end_row();
  }
}

void write_queue_csv(std::ostream& out, const std::vector<PacketRun>& runs) {
  CsvWriter w(out, kQueueColumns);
  for (const auto& run : runs) {
    for (const auto& q : run.result.queues) {
      w.cell(run.scheme).cell(run.rho).cell(run.seed).cell(q.layer);
      w.cell(to_string(q.direction)).cell(q.mean).cell(q.max);
      w.end_row();
    }
  }
}

void write_latency_csv(std::ostream& out, const std::vector<PacketRun>& runs) {
  CsvWriter w(out, kLatencyColumns);
  for (const auto& run : runs) {
    const auto& l = run.result.latency;
    w.cell(run.scheme).cell(run.rho).cell(run.seed);
    w.cell(l.mean_latency).cell(l.mean_tail_latency).cell(l.max_tail_latency);
    w.end_row();
  }
}

void write_fluid_csv(std::ostream& out, const TailDistribution& tail,
                     const DecayCertificate& cert, const DecayReport& report) {
  CsvWriter w(out, kFluidColumns);
  const auto rates = lambda_rates(tail);
  for (int i = 0; i <= tail.i_max(); ++i) {
    bool ok = true;
    for (const auto& v : report.violations) ok = ok && v.i != i;
    const auto k = static_cast<std::size_t>(i);
    const double z = k < cert.z.size() ? cert.z[k] : 0.0;
    w.cell(i).cell(tail.at(i)).cell(tail.p(i)).cell(rates[k]).cell(z).cell(ok ? 1 : 0);
    w.end_row();
  }
}

void write_ctmc_csv(std::ostream& out, const TailDistribution& empirical,
                    const TailDistribution& fixed_point, int i_max) {
  CsvWriter w(out, kCtmcColumns);
  for (int i = 0; i <= i_max; ++i) {
    const double e = empirical.at(i);
    const double f = fixed_point.at(i);
    w.cell(i).cell(e).cell(f).cell(std::abs(e - f));
    w.end_row();
  }
}

namespace {

std::string switch_name(int layer, std::int64_t label) {
  return std::to_string(layer) + ":" + std::to_string(label);
}

}  // namespace

void write_adjacency_csv(std::ostream& out, const Topology& topo) {
  CsvWriter w(out, kAdjacencyColumns);
  for (int m = 1; m < topo.layers(); ++m) {
    for (std::int64_t s = 0; s < topo.switches_at(m); ++s) {
      const SwitchCode lower = topo.switch_code(m, s);
      for (int p = 0; p < topo.radix_half(); ++p) {
        const auto [upper, down_port] = topo.up_neighbor(lower, p);
        w.cell(switch_name(m, s)).cell(p);
        w.cell(switch_name(upper.layer, topo.switch_label(upper))).cell(down_port);
        w.end_row();
      }
    }
  }
}

json topology_summary(const Topology& topo) {
  json j = json::parse(topo.describe_json());
  j["hosts"] = topo.host_count();
  j["core_switches"] = topo.core_count();
  j["switches_per_layer"] = topo.switches_per_layer();
  json layers = json::array();
  for (int m = 1; m <= topo.layers(); ++m) layers.push_back(topo.switches_at(m));
  j["switches_by_layer"] = layers;
  j["links_per_layer_direction"] = topo.links_per_layer();
  return j;
}

namespace {

class GuardFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tracks written files so that an aborted run can remove them.
class OutputSet {
 public:
  void write(const fs::path& path, const std::string& body) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    paths_.push_back(path.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + path.string());
  }
  void adopt(const std::vector<std::string>& paths) {
    paths_.insert(paths_.end(), paths.begin(), paths.end());
  }
  void remove_all() {
    std::error_code ec;
    for (const auto& p : paths_) fs::remove(p, ec);
    paths_.clear();
  }
  const std::vector<std::string>& paths() const { return paths_; }

 private:
  std::vector<std::string> paths_;
};

fs::path primary_path(const RunOptions& options, const std::string& fallback) {
  if (!options.out.empty()) return fs::path(options.out);
  return fs::path(options.out_dir) / fallback;
}

fs::path sibling(const fs::path& primary, const std::string& suffix) {
  return primary.parent_path() / (primary.stem().string() + suffix);
}

std::ostream& log_of(const RunOptions& o) {
  static std::ostringstream sink;
  if (o.log) return *o.log;
  sink.str("");
  return sink;
}

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& options;
  OutputSet& outputs;
  json& details;
  std::vector<std::string> warnings;
  std::vector<std::string> guard_failures;
};

fs::path run_topo(Context& ctx) {
  const Topology topo(ctx.cfg.layers, ctx.cfg.radix_half);
  ctx.details["topology"] = topology_summary(topo);
  log_of(ctx.options) << ctx.details["topology"].dump(2) << '\n';
  const fs::path primary = primary_path(ctx.options, "adjacency.csv");
  if (ctx.cfg.dump_adjacency) {
    std::ostringstream csv;
    write_adjacency_csv(csv, topo);
    ctx.outputs.write(primary, csv.str());
  }
  return primary;
}

fs::path run_flow(Context& ctx) {
  const auto& cfg = ctx.cfg;
  FlowExpConfig fc;
  fc.layers = cfg.layers;
  fc.radix_half = cfg.radix_half;
  fc.c_values = cfg.c_values;
  fc.repetitions = cfg.repetitions;
  fc.base_seed = cfg.base_seed;
  fc.jobs = ctx.options.jobs;
  for (const auto& s : cfg.schemes) {
    FlowSchemeSpec spec;
    spec.kind = s.kind;
    spec.label = s.label();
    if (s.threshold.kind == ThresholdSelector::Kind::kFlowSchedule) {
      spec.rule = FlowSchemeSpec::ThresholdRule::kFlowSchedule;
    } else {
      spec.fixed_threshold = s.threshold.value;
    }
    fc.schemes.push_back(spec);
  }
  const FlowExpOutput result = run_flow_experiment(fc);

  const fs::path primary = primary_path(ctx.options, "flow.csv");
  std::ostringstream csv;
  write_flow_csv(csv, cfg.layers, cfg.radix_half, result);
  ctx.outputs.write(primary, csv.str());

  json summary = json::array();
  auto& log = log_of(ctx.options);
  for (const auto& s : result.summaries) {
    summary.push_back({{"scheme", s.scheme},
                       {"c", s.c},
                       {"mean_max_load", s.mean},
                       {"std_error", s.std_error},
                       {"estimate", s.estimate},
                       {"rel_error", s.rel_error}});
    log << s.scheme << " c=" << s.c << " mean=" << format_number(s.mean)
        << " se=" << format_number(s.std_error) << '\n';
  }
  ctx.details["summary"] = summary;
  return primary;
}

fs::path run_packet(Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<PacketRun> runs;
  std::vector<SimConfig> sims;
  for (const auto& s : cfg.schemes) {
    for (double rho : cfg.rho_values) {
      for (int rep = 0; rep < cfg.repetitions; ++rep) {
        SimConfig sc;
        sc.layers = cfg.layers;
        sc.radix_half = cfg.radix_half;
        sc.scheme = s.resolve_packet(rho);
        sc.rho = rho;
        sc.horizon_slots = cfg.horizon_slots;
        sc.warmup_slots = cfg.warmup_slots;
        sc.fixed_permutation = cfg.fixed_permutation;
        sc.max_queued = cfg.max_queued;
        // Shared across schemes so that every scheme sees the same seeds.
        sc.seed = derive_seed(cfg.base_seed, "packet", std::bit_cast<std::uint64_t>(rho),
                              static_cast<std::uint64_t>(rep));
        sims.push_back(sc);
        runs.push_back(PacketRun{s.label(), rho, sc.seed, {}});
      }
    }
  }
  parallel_for(sims.size(), ctx.options.jobs,
               [&](std::size_t i) { runs[i].result = run_packet_sim(sims[i]); });

  const fs::path primary = primary_path(ctx.options, "queues.csv");
  std::ostringstream qcsv, lcsv;
  write_queue_csv(qcsv, runs);
  write_latency_csv(lcsv, runs);
  ctx.outputs.write(primary, qcsv.str());
  ctx.outputs.write(sibling(primary, "_latency.csv"), lcsv.str());

  json summary = json::array();
  for (const auto& r : runs) {
    const std::string tag = r.scheme + " rho=" + format_number(r.rho) +
                            " seed=" + std::to_string(r.seed);
    if (r.result.diverged) ctx.guard_failures.push_back(tag + ": queue guard tripped");
    if (!r.result.drained) ctx.guard_failures.push_back(tag + ": measured packets did not drain");
    summary.push_back({{"scheme", r.scheme},
                       {"rho", r.rho},
                       {"seed", r.seed},
                       {"injected", r.result.injected},
                       {"delivered", r.result.delivered},
                       {"slots_run", r.result.slots_run},
                       {"measured_packets", r.result.latency.packets},
                       {"diverged", r.result.diverged},
                       {"drained", r.result.drained}});
  }
  ctx.details["runs"] = summary;
  return primary;
}

fs::path run_fluid(Context& ctx) {
  const auto& cfg = ctx.cfg;
  FixedPointOptions fo;
  fo.tol = cfg.tol;
  const FixedPointResult fp = solve_fixed_point(cfg.lambda, cfg.threshold, cfg.i_max, fo);
  const DecayCertificate cert = decay_certificate(cfg.lambda, cfg.threshold, cfg.i_max);
  const DecayReport report = check_decay_bounds(fp.tail, cert);
  const LocalBalanceReport balance = check_local_balance(fp.tail);

  const fs::path primary = primary_path(ctx.options, "tail.csv");
  std::ostringstream csv;
  write_fluid_csv(csv, fp.tail, cert, report);
  ctx.outputs.write(primary, csv.str());

  double mean = 0.0;
  for (int i = 1; i <= fp.tail.i_max(); ++i) mean += fp.tail.at(i);
  ctx.details["iterations"] = fp.iterations;
  ctx.details["residual"] = fp.residual;
  ctx.details["mean_queue_length"] = mean;
  ctx.details["alpha"] = cert.alpha;
  ctx.details["c"] = cert.c;
  ctx.details["certified"] = cert.certified;
  ctx.details["bounds_checked"] = report.checked;
  ctx.details["bound_violations"] = report.violations.size();
  ctx.details["local_balance_residual"] = balance.max_residual;
  ctx.details["throughput_error"] = balance.throughput_error;
  log_of(ctx.options) << "fixed point: iterations=" << fp.iterations
                      << " residual=" << format_number(fp.residual)
                      << " mean=" << format_number(mean)
                      << " violations=" << report.violations.size() << '\n';
  if (!report.ok()) {
    ctx.guard_failures.push_back(std::to_string(report.violations.size()) +
                                 " decay bound violations");
  }
  if (!cert.certified) ctx.guard_failures.push_back("decay certificate not established");
  return primary;
}

fs::path run_ctmc(Context& ctx) {
  const auto& cfg = ctx.cfg;
  CtmcConfig cc;
  cc.queues = cfg.queues;
  cc.lambda = cfg.lambda;
  cc.threshold = cfg.threshold;
  cc.burn_in_events = cfg.burn_in_events;
  cc.events = cfg.events;
  cc.seed = derive_seed(cfg.base_seed, "ctmc");
  const CtmcResult sim = ctmc_supermarket_sim(cc);
  FixedPointOptions fo;
  fo.tol = cfg.tol;
  const FixedPointResult fp = solve_fixed_point(cfg.lambda, cfg.threshold, cfg.i_max, fo);

  const fs::path primary = primary_path(ctx.options, "empirical.csv");
  std::ostringstream csv;
  write_ctmc_csv(csv, sim.tail, fp.tail, cfg.i_max);
  ctx.outputs.write(primary, csv.str());

  double diff = 0.0;
  for (int i = 0; i <= 10; ++i) diff = std::max(diff, std::abs(sim.tail.at(i) - fp.tail.at(i)));
  const double bound = 1.0 / (1.0 - cfg.lambda);
  ctx.details["seed"] = cc.seed;
  ctx.details["mean_queue_length"] = sim.mean_queue_length;
  ctx.details["mean_queue_std_error"] = sim.mean_queue_std_error;
  ctx.details["measured_time"] = sim.measured_time;
  ctx.details["max_abs_diff_i_le_10"] = diff;
  ctx.details["mean_queue_bound"] = bound;
  log_of(ctx.options) << "ctmc: mean=" << format_number(sim.mean_queue_length)
                      << " se=" << format_number(sim.mean_queue_std_error)
                      << " max|diff|=" << format_number(diff) << '\n';
  if (sim.short_horizon) {
    ctx.warnings.push_back("fewer than 10*N measured events; estimates are noisy");
  }
  if (!(sim.mean_queue_length < bound)) {
    ctx.guard_failures.push_back("mean queue length not below 1/(1-lambda)");
  }
  return primary;
}

}  // namespace

RunResult run_experiment(ExperimentConfig config, const RunOptions& options) {
  if (options.seed) config.base_seed = *options.seed;
  RunResult result;
  OutputSet outputs;
  json details = json::object();
  Context ctx{config, options, outputs, details, {}, {}};
  const auto t0 = std::chrono::steady_clock::now();
  fs::path primary;
  try {
    switch (config.kind) {
      case ExperimentKind::kTopo: primary = run_topo(ctx); break;
      case ExperimentKind::kFlowExp: primary = run_flow(ctx); break;
      case ExperimentKind::kPacketExp: primary = run_packet(ctx); break;
      case ExperimentKind::kFluid: primary = run_fluid(ctx); break;
      case ExperimentKind::kCtmc: primary = run_ctmc(ctx); break;
    }
    if (config.plots && !outputs.paths().empty()) {
      const std::string dir = primary.has_parent_path() ? primary.parent_path().string() : ".";
      std::vector<std::string> csvs;
      if (config.kind == ExperimentKind::kFlowExp) {
        csvs = {outputs.paths()[0]};
        outputs.adopt(render_plots(csvs, PlotStyle::kFlow, dir));
      } else if (config.kind == ExperimentKind::kPacketExp) {
        const auto q = outputs.paths()[0];
        const auto l = outputs.paths()[1];
        outputs.adopt(render_plots({q}, PlotStyle::kQueues, dir));
        outputs.adopt(render_plots({l}, PlotStyle::kLatency, dir));
      }
    }
  } catch (const ConfigError& e) {
    outputs.remove_all();
    result.exit_code = kExitConfig;
    result.message = e.what();
    return result;
  } catch (const ParameterError& e) {
    outputs.remove_all();
    result.exit_code = kExitConfig;
    result.message = e.what();
    return result;
  } catch (const ConvergenceError& e) {
    outputs.remove_all();
    result.exit_code = kExitGuard;
    result.message = e.what();
    return result;
  } catch (const std::exception& e) {
    outputs.remove_all();
    result.exit_code = kExitError;
    result.message = e.what();
    return result;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json rec;
  rec["tool"] = kToolName;
  rec["version"] = kToolVersion;
  rec["csv_schema_version"] = kCsvSchemaVersion;
  rec["config"] = config.to_json();
  rec["jobs"] = options.jobs;
  rec["outputs"] = outputs.paths();
  rec["results"] = details;
  rec["warnings"] = ctx.warnings;
  rec["guard_failures"] = ctx.guard_failures;
  rec["status"] = ctx.guard_failures.empty() ? "ok" : "guard_failed";
  rec["wall_clock_seconds"] = wall;

  const fs::path record_path =
      config.kind == ExperimentKind::kTopo && !config.dump_adjacency
          ? fs::path(options.out_dir) / "topo.run.json"
          : sibling(primary, ".run.json");
  try {
    outputs.write(record_path, rec.dump(2) + "\n");
  } catch (const std::exception& e) {
    outputs.remove_all();
    result.exit_code = kExitError;
    result.message = e.what();
    return result;
  }
  result.outputs = outputs.paths();
  result.record_path = record_path.string();
  result.record = std::move(rec);
  for (const auto& w : ctx.warnings) log_of(options) << "warning: " << w << '\n';
  if (!ctx.guard_failures.empty()) {
    result.exit_code = kExitGuard;
    result.message = ctx.guard_failures.front();
    for (const auto& g : ctx.guard_failures) log_of(options) << "guard: " << g << '\n';
  }
  return result;
}

RunResult run_config_file(const std::string& config_path, const RunOptions& options) {
  try {
    return run_experiment(load_experiment_config(config_path), options);
  } catch (const ConfigError& e) {
    RunResult r;
    r.exit_code = kExitConfig;
    r.message = e.what();
    return r;
  }
}

}  // namespace fattree::harness
