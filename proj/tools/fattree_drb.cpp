// Command-line front end: topo, flow-exp, packet-exp, fluid, ctmc, plot.

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fattree/harness/config.hpp"
#include "fattree/harness/runner.hpp"
#include "fattree/harness/svg.hpp"

namespace {

using nlohmann::json;
namespace h = fattree::harness;

struct Common {
  std::string config;
  std::string out_dir = ".";
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 0;
};

void add_common(CLI::App* app, Common& c, bool seeded) {
  app->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  app->add_option("--out-dir", c.out_dir, "directory for outputs");
  app->add_option("--out", c.out, "primary CSV path");
  if (seeded) app->add_option("--seed", c.seed, "replaces base_seed");
  app->add_option("--jobs", c.jobs, "worker threads (default: FATTREE_DRB_JOBS or 1)")
      ->check(CLI::PositiveNumber);
}

json base_json(const Common& c, const std::string& kind) {
  json j = json::object();
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw h::ConfigError("$", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw h::ConfigError("$", "expected an object");
    if (j.contains("experiment") && j["experiment"] != kind) {
      throw h::ConfigError("experiment", "config is for '" + j["experiment"].dump() +
                                         "' but the subcommand is " + kind);
    }
  }
  j["experiment"] = kind;
  return j;
}

int execute(const json& j, const Common& c, CLI::App* app) {
  h::ExperimentConfig cfg;
  try {
    cfg = h::parse_experiment_config(j);
  } catch (const h::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return h::kExitConfig;
  }
  h::RunOptions opt;
  opt.out_dir = c.out_dir;
  opt.out = c.out;
  if (auto* o = app->get_option_no_throw("--seed"); o && o->count()) opt.seed = c.seed;
  opt.jobs = c.jobs > 0 ? c.jobs : h::default_jobs();
  opt.log = &std::cout;
  const h::RunResult r = h::run_experiment(cfg, opt);
  if (r.exit_code == h::kExitConfig) {
    std::cerr << "config error: " << r.message << '\n';
  } else if (r.exit_code == h::kExitGuard) {
    std::cerr << "guard failure: " << r.message << '\n';
  } else if (r.exit_code != h::kExitOk) {
    std::cerr << "error: " << r.message << '\n';
  }
  for (const auto& p : r.outputs) std::cout << "wrote " << p << '\n';
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fat-tree routing experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", h::kToolVersion);

  Common topo_c, flow_c, packet_c, fluid_c, ctmc_c;
  int layers = 0, radix_half = 0;
  bool adjacency = false;
  auto* topo = app.add_subcommand("topo", "print topology counts, optionally dump adjacency CSV");
  add_common(topo, topo_c, false);
  topo->add_option("--layers,--ell", layers, "number of switch layers");
  topo->add_option("--radix-half,--d", radix_half, "half the switch radix");
  topo->add_flag("--adjacency", adjacency, "write the adjacency CSV");

  auto* flow = app.add_subcommand("flow-exp", "flow-level c-permutation sweep");
  add_common(flow, flow_c, true);
  flow->get_option("--config")->required();

  auto* packet = app.add_subcommand("packet-exp", "slotted packet simulation sweep");
  add_common(packet, packet_c, true);
  packet->get_option("--config")->required();

  double lambda = 0.9, tol = 1e-10;
  int threshold = 0, imax = 64;
  auto* fluid = app.add_subcommand("fluid", "mean-field fixed point and decay bounds");
  add_common(fluid, fluid_c, false);
  fluid->add_option("--lambda", lambda, "arrival rate per queue");
  fluid->add_option("--threshold", threshold, "redirect threshold T");
  fluid->add_option("--imax", imax, "truncation index");
  fluid->add_option("--tol", tol, "residual tolerance");

  double c_lambda = 0.9, horizon = 0, burn_in = 0, c_tol = 1e-10;
  int c_threshold = 0, c_imax = 64;
  std::int64_t n = 0;
  auto* ctmc = app.add_subcommand("ctmc", "finite-N supermarket simulation");
  add_common(ctmc, ctmc_c, true);
  ctmc->add_option("--n", n, "number of queues");
  ctmc->add_option("--lambda", c_lambda, "arrival rate per queue");
  ctmc->add_option("--threshold", c_threshold, "redirect threshold T");
  ctmc->add_option("--horizon", horizon, "measured events after burn-in");
  ctmc->add_option("--burn-in", burn_in, "events discarded before measuring");
  ctmc->add_option("--imax", c_imax, "truncation index for the fixed point");
  ctmc->add_option("--tol", c_tol, "fixed-point residual tolerance");

  std::vector<std::string> csvs;
  std::string style = "auto", plot_dir = ".";
  auto* plot = app.add_subcommand("plot", "render SVG charts from result CSVs");
  plot->add_option("csv", csvs, "input CSVs sharing one schema")->required();
  plot->add_option("--style", style, "auto, flow, latency or queues");
  plot->add_option("--out-dir", plot_dir, "directory for SVGs");

  CLI11_PARSE(app, argc, argv);

  auto count_as_events = [](double v, const char* name) {
    if (!(v >= 0.0) || v != std::floor(v)) {
      throw h::ConfigError(name, "expected a non-negative whole number");
    }
    return static_cast<std::int64_t>(v);
  };

  try {
    if (*topo) {
      json j = base_json(topo_c, "topo");
      if (topo->count("--layers")) j["topology"]["layers"] = layers;
      if (topo->count("--radix-half")) j["topology"]["radix_half"] = radix_half;
      if (adjacency) j["dump_adjacency"] = true;
      return execute(j, topo_c, topo);
    }
    if (*flow) return execute(base_json(flow_c, "flow-exp"), flow_c, flow);
    if (*packet) return execute(base_json(packet_c, "packet-exp"), packet_c, packet);
    if (*fluid) {
      json j = base_json(fluid_c, "fluid");
      if (fluid->count("--lambda")) j["lambda"] = lambda;
      if (fluid->count("--threshold")) j["threshold"] = threshold;
      if (fluid->count("--imax")) j["i_max"] = imax;
      if (fluid->count("--tol")) j["tol"] = tol;
      return execute(j, fluid_c, fluid);
    }
    if (*ctmc) {
      json j = base_json(ctmc_c, "ctmc");
      if (ctmc->count("--n")) j["queues"] = n;
      if (ctmc->count("--lambda")) j["lambda"] = c_lambda;
      if (ctmc->count("--threshold")) j["threshold"] = c_threshold;
      if (ctmc->count("--horizon")) j["events"] = count_as_events(horizon, "--horizon");
      if (ctmc->count("--burn-in")) j["burn_in_events"] = count_as_events(burn_in, "--burn-in");
      if (ctmc->count("--imax")) j["i_max"] = c_imax;
      if (ctmc->count("--tol")) j["tol"] = c_tol;
      return execute(j, ctmc_c, ctmc);
    }
    if (*plot) {
      for (const auto& p : h::render_plots(csvs, h::parse_plot_style(style), plot_dir)) {
        std::cout << "wrote " << p << '\n';
      }
      return h::kExitOk;
    }
  } catch (const h::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return h::kExitConfig;
  } catch (const h::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return h::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::kExitError;
  }
  return h::kExitOk;
}
