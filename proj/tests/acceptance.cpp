// End-to-end acceptance checks.  Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.  `acceptance N [N ...]` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fattree/ctmc.hpp"
#include "fattree/flow_experiment.hpp"
#include "fattree/fluid.hpp"
#include "fattree/packet_sim.hpp"
#include "fattree/parallel.hpp"
#include "fattree/routing.hpp"
#include "fattree/seeding.hpp"

using namespace fattree;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

int jobs() {
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

// Difference of two means against twice their combined standard error.
bool gap_at_least_2se(double lo, double se_lo, double hi, double se_hi) {
  return hi - lo >= 2.0 * std::hypot(se_lo, se_hi);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) r.mean += x;
  r.mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return r;
}

// Destination-disjointness of D-mod-k downlinks for a batch of pairs.
// Returns the number of downlinks carrying two or more destinations.
std::int64_t downlink_conflicts(const Topology& t,
                                const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) {
  std::map<std::size_t, std::int64_t> owner;
  std::int64_t conflicts = 0;
  std::set<std::size_t> bad;
  for (const auto& [s, d] : pairs) {
    const RoutePath p =
        t.resolve_route(t.host_code(s), t.host_code(d), dmodk_up(t.host_code(d), t.distance(s, d)));
    for (const LinkRef& l : t.route_links(p)) {
      if (l.direction != Direction::kDown) continue;
      const std::size_t key = t.dense_index(l);
      const auto [it, fresh] = owner.emplace(key, d);
      if (!fresh && it->second != d && bad.insert(key).second) ++conflicts;
    }
  }
  return conflicts;
}

Outcome criterion1() {
  std::int64_t violations = 0;
  std::int64_t pairs_checked = 0;
  for (auto [l, d] : {std::pair{2, 2}, {3, 2}}) {
    const Topology t(l, d);
    std::vector<std::pair<std::int64_t, std::int64_t>> all;
    for (std::int64_t s = 0; s < t.host_count(); ++s) {
      for (std::int64_t x = 0; x < t.host_count(); ++x) {
        if (s != x) all.emplace_back(s, x);
      }
    }
    pairs_checked += static_cast<std::int64_t>(all.size());
    violations += downlink_conflicts(t, all);
  }
  const Topology t(3, 4);
  Rng rng(derive_seed(1, "disjoint"));
  const int sets = 10000;
  for (int k = 0; k < sets; ++k) {
    const auto perm = random_derangement(t.host_count(), rng);
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (std::int64_t s = 0; s < t.host_count(); ++s) pairs.emplace_back(s, perm[s]);
    violations += downlink_conflicts(t, pairs);
  }
  return {violations == 0,
          fmt("%lld exhaustive pairs on F(2,2)+F(3,2), %d random pair sets on F(3,4), "
              "%lld shared downlinks",
              (long long)pairs_checked, sets, (long long)violations)};
}

Outcome criterion2() {
  const Topology t(3, 2);
  std::int64_t routes = 0, violations = 0;
  for (std::int64_t s = 0; s < t.host_count(); ++s) {
    for (std::int64_t x = 0; x < t.host_count(); ++x) {
      if (s == x) continue;
      const HostCode hd = t.host_code(x);
      const int k = t.distance(s, x);
      std::vector<int> expect;
      for (int j = k; j >= 1; --j) expect.push_back(hd.digit(j));
      for (int mask = 0; mask < (1 << (k - 1)); ++mask) {
        std::vector<int> up;
        for (int i = 0; i < k - 1; ++i) up.push_back((mask >> i) & 1);
        ++routes;
        try {
          const RoutePath p = t.resolve_route(t.host_code(s), hd, up);
          const bool reaches = t.attached_host(p.switch_trace.back(), p.down_ports.back()) == hd;
          if (!reaches || p.down_ports != expect) ++violations;
        } catch (const std::exception&) {
          ++violations;
        }
      }
    }
  }
  return {violations == 0,
          fmt("%lld (pair, up-port sequence) routes on F(3,2), %lld violations",
              (long long)routes, (long long)violations)};
}

FlowExpOutput flow_run(const std::vector<int>& cs) {
  FlowExpConfig cfg;
  cfg.layers = 3;
  cfg.radix_half = 8;
  cfg.c_values = cs;
  cfg.repetitions = 50;
  cfg.base_seed = 2024;
  cfg.jobs = jobs();
  using R = FlowSchemeSpec::ThresholdRule;
  cfg.schemes = {{SchemeKind::kDrb, R::kFlowSchedule, 0.0, "drb(eq4)"},
                 {SchemeKind::kDrb, R::kFixed, 0.0, "drb(zero)"},
                 {SchemeKind::kMicro, R::kFixed, 0.0, "micro"},
                 {SchemeKind::kVlb, R::kFixed, 0.0, "vlb"}};
  return run_flow_experiment(cfg);
}

const FlowExpResult& find(const FlowExpOutput& out, const std::string& scheme, int c) {
  for (const auto& s : out.summaries) {
    if (s.scheme == scheme && s.c == c) return s;
  }
  throw std::logic_error("missing summary");
}

Outcome criterion3() {
  const auto out = flow_run({1, 2, 4, 8});
  bool ok = true;
  std::string detail;
  for (int c : {1, 2, 4, 8}) {
    const auto& s = find(out, "drb(eq4)", c);
    ok = ok && s.rel_error < 0.20;
    detail += fmt("c=%d mean=%.2f est=%.2f re=%.3f; ", c, s.mean, s.estimate, s.rel_error);
  }
  return {ok, "F(3,8), 50 reps: " + detail};
}

Outcome criterion4() {
  const auto out = flow_run({4, 8});
  bool ok = true;
  std::string detail;
  for (int c : {4, 8}) {
    const auto& drb = find(out, "drb(eq4)", c);
    const auto& zero = find(out, "drb(zero)", c);
    const auto& micro = find(out, "micro", c);
    const auto& vlb = find(out, "vlb", c);
    ok = ok && gap_at_least_2se(drb.mean, drb.std_error, zero.mean, zero.std_error);
    ok = ok && gap_at_least_2se(drb.mean, drb.std_error, micro.mean, micro.std_error);
    ok = ok && gap_at_least_2se(micro.mean, micro.std_error, vlb.mean, vlb.std_error);
    detail += fmt("c=%d drb(eq4)=%.2f±%.2f drb(zero)=%.2f±%.2f micro=%.2f±%.2f vlb=%.2f±%.2f; ",
                  c, drb.mean, drb.std_error, zero.mean, zero.std_error, micro.mean,
                  micro.std_error, vlb.mean, vlb.std_error);
  }
  return {ok, detail};
}

// Fraction of k=3 DRB(T=0) routes whose up-ports equal the D-mod-k ports
// when every load read is an independent uniform draw.
double stay_fraction(int d, int trials, std::uint64_t seed) {
  const Topology t(3, d);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const FunctionLoadView iid([&](int, std::int64_t, int) { return u(rng); });
  std::uniform_int_distribution<std::int64_t> host(0, t.host_count() - 1);
  int stayed = 0, done = 0;
  while (done < trials) {
    const std::int64_t s = host(rng), x = host(rng);
    if (t.distance(s, x) != 3) continue;
    const auto ports = select_up_ports(t, SchemeConfig::drb(0.0), s, x, iid, rng);
    stayed += ports == dmodk_up(t.host_code(x), 3);
    ++done;
  }
  return static_cast<double>(stayed) / trials;
}

Outcome criterion5() {
  const double wide = stay_fraction(24, 10000, derive_seed(1, "redirect", 24));
  const double narrow = stay_fraction(8, 10000, derive_seed(1, "redirect", 8));
  return {std::abs(wide - 0.25) <= 0.05,
          fmt("F(3,24) i.i.d. continuous loads: %.4f stay on D-mod-k (F(3,8) for reference: "
              "%.4f)",
              wide, narrow)};
}

struct PacketGrid {
  // [scheme][rho] -> per-seed results
  std::map<std::string, std::map<double, std::vector<PacketSimResult>>> runs;
};

const PacketGrid& packet_grid() {
  static const PacketGrid grid = [] {
    PacketGrid g;
    struct Job {
      std::string scheme;
      double rho;
      SimConfig cfg;
    };
    std::vector<Job> jobs_list;
    for (double rho : {0.8, 0.9}) {
      for (int seed = 0; seed < 5; ++seed) {
        const std::uint64_t s = derive_seed(7, "packet", static_cast<std::uint64_t>(seed),
                                            static_cast<std::uint64_t>(rho * 100));
        for (const auto& [name, scheme] :
             std::vector<std::pair<std::string, SchemeConfig>>{
                 {"drb", SchemeConfig::drb(packet_threshold(rho))},
                 {"micro", SchemeConfig::micro()},
                 {"dmodk", SchemeConfig::dmodk()}}) {
          SimConfig c;
          c.layers = 3;
          c.radix_half = 8;
          c.scheme = scheme;
          c.rho = rho;
          c.horizon_slots = 2000;
          c.warmup_slots = 1500;
          c.seed = s;
          jobs_list.push_back({name, rho, c});
        }
      }
    }
    std::vector<PacketSimResult> results(jobs_list.size());
    parallel_for(jobs_list.size(), jobs(),
                 [&](std::size_t i) { results[i] = run_packet_sim(jobs_list[i].cfg); });
    for (std::size_t i = 0; i < jobs_list.size(); ++i) {
      g.runs[jobs_list[i].scheme][jobs_list[i].rho].push_back(results[i]);
    }
    return g;
  }();
  return grid;
}

Outcome criterion6() {
  const auto& g = packet_grid();
  bool ok = true;
  std::string detail;
  for (double rho : {0.8, 0.9}) {
    auto stat = [&](const std::string& scheme, bool tail) {
      std::vector<double> xs;
      for (const auto& r : g.runs.at(scheme).at(rho)) {
        ok = ok && r.drained && !r.diverged;
        xs.push_back(tail ? r.latency.mean_tail_latency : r.latency.mean_latency);
      }
      return mean_se(xs);
    };
    for (bool tail : {false, true}) {
      const MeanSe drb = stat("drb", tail), micro = stat("micro", tail),
                   dmodk = stat("dmodk", tail);
      ok = ok && drb.mean <= micro.mean && drb.mean <= dmodk.mean;
      if (rho == 0.9) ok = ok && gap_at_least_2se(drb.mean, drb.se, dmodk.mean, dmodk.se);
      detail += fmt("rho=%.1f %s drb=%.2f±%.2f micro=%.2f±%.2f dmodk=%.2f±%.2f; ", rho,
                    tail ? "tail" : "mean", drb.mean, drb.se, micro.mean, micro.se, dmodk.mean,
                    dmodk.se);
    }
  }
  return {ok, detail};
}

Outcome criterion7() {
  const auto& runs = packet_grid().runs.at("drb").at(0.9);
  std::map<int, double> up;
  for (const auto& r : runs) {
    for (const auto& q : r.queues) {
      if (q.direction == Direction::kUp) up[q.layer] += q.mean / static_cast<double>(runs.size());
    }
  }
  bool ok = up.size() >= 2;
  std::string detail;
  for (const auto& [a, va] : up) {
    detail += fmt("layer %d up=%.3f; ", a, va);
    for (const auto& [b, vb] : up) {
      if (a < b) ok = ok && std::abs(va - vb) <= 0.25 * std::min(va, vb);
    }
  }
  return {ok, "DRB rho=0.9 F(3,8), 5 seeds: " + detail};
}

Outcome criterion8() {
  double worst_closed = 0.0, worst_residual = 0.0;
  for (double lambda : {0.3, 0.5, 0.7, 0.9}) {
    const auto r = solve_fixed_point(lambda, 0, 64, {.tol = 1e-13});
    for (int i = 0; i <= 20; ++i) {
      worst_closed = std::max(
          worst_closed, std::abs(r.tail.at(i) - std::pow(lambda, std::pow(2.0, i) - 1.0)));
    }
  }
  for (double lambda : {0.5, 0.9}) {
    for (int T : {0, 1, 2, 4}) {
      const auto r = solve_fixed_point(lambda, T, 64, {.tol = 1e-11});
      worst_residual = std::max(worst_residual, ode_residual(r.tail));
    }
  }
  return {worst_closed <= 1e-10 && worst_residual < 1e-10,
          fmt("max |s_i - closed form| = %.2e, max residual = %.2e", worst_closed,
              worst_residual)};
}

Outcome criterion9() {
  bool ok = true;
  std::string detail;
  for (double lambda : {0.5, 0.9}) {
    for (int T : {1, 2, 4}) {
      const auto r = solve_fixed_point(lambda, T, 64, {.tol = 1e-13});
      const auto cert = decay_certificate(lambda, T, 64);
      const auto rep = check_decay_bounds(r.tail, cert, 1e-14);
      ok = ok && rep.ok() && cert.certified && rep.checked > 0;
      detail += fmt("(%.1f,%d) checked=%d viol=%zu; ", lambda, T, rep.checked,
                    rep.violations.size());
    }
  }
  const auto c1 = decay_certificate(0.9, 1, 20);
  bool fib = c1.g[0] == 1 && c1.g[1] == 2;
  for (std::size_t i = 2; i < c1.g.size(); ++i) fib = fib && c1.g[i] == c1.g[i - 1] + c1.g[i - 2];
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  ok = ok && fib && std::abs(c1.alpha - golden) <= 1e-6;
  detail += fmt("T=1 Fibonacci=%s alpha=%.7f", fib ? "yes" : "no", c1.alpha);
  return {ok, detail};
}

Outcome criterion10() {
  bool ok = true;
  std::string detail;
  for (int T : {0, 2}) {
    CtmcConfig c;
    c.queues = 10000;
    c.lambda = 0.9;
    c.threshold = T;
    c.burn_in_events = 2'000'000;
    c.events = 1'000'000;
    c.seed = derive_seed(3, "ctmc", static_cast<std::uint64_t>(T));
    const auto sim = ctmc_supermarket_sim(c);
    const auto fp = solve_fixed_point(0.9, T, 64);
    double diff = 0.0;
    for (int i = 0; i <= 10; ++i) diff = std::max(diff, std::abs(sim.tail.at(i) - fp.tail.at(i)));
    ok = ok && diff <= 0.02 && sim.mean_queue_length < 1.0 / (1.0 - 0.9);
    detail += fmt("T=%d max|diff|=%.4f mean=%.3f (bound 10); ", T, diff, sim.mean_queue_length);
  }
  return {ok, "N=10^4, lambda=0.9, 10^6 events: " + detail};
}

Outcome criterion11() {
  double worst_balance = 0.0, worst_throughput = 0.0;
  for (double lambda : {0.3, 0.5, 0.7, 0.9}) {
    for (int T : {0, 1, 2, 4}) {
      const auto r = solve_fixed_point(lambda, T, 64);
      const auto b = check_local_balance(r.tail);
      worst_balance = std::max(worst_balance, b.max_residual);
      worst_throughput = std::max(worst_throughput, b.throughput_error);
    }
  }
  return {worst_balance < 1e-8 && worst_throughput < 1e-8,
          fmt("max local-balance residual %.2e, max throughput error %.2e", worst_balance,
              worst_throughput)};
}

Outcome criterion12() {
  bool ok = true;
  std::string detail;
  Rng rng(derive_seed(5, "lipschitz"));
  for (double lambda : {0.5, 0.9}) {
    for (int T : {0, 2}) {
      const auto r = lipschitz_probe(lambda, T, 10000, 32, rng);
      ok = ok && r.max_ratio <= r.bound && r.max_vector_ratio <= r.bound;
      detail += fmt("(%.1f,%d) summed=%.3f vector=%.3f bound=%.1f; ", lambda, T, r.max_ratio,
                    r.max_vector_ratio, r.bound);
    }
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "D-mod-k downlinks are destination-disjoint", 60, criterion1},
      {2, "downward routing is determined by the destination", 60, criterion2},
      {3, "flow-model max load matches the heuristic estimate", 600, criterion3},
      {4, "flow-model scheme ordering", 600, criterion4},
      {5, "DRB T=0 keeps about a quarter of k=3 routes on D-mod-k", 10, criterion5},
      {6, "packet-model latency ordering", 900, criterion6},
      {7, "DRB uplink queues are balanced across layers", 900, criterion7},
      {8, "fixed-point solver against the T=0 closed form", 60, criterion8},
      {9, "doubly exponential decay certificate", 60, criterion9},
      {10, "CTMC agrees with the fixed point and the mean-queue bound", 600, criterion10},
      {11, "local balance and throughput identity", 10, criterion11},
      {12, "Lipschitz probe", 60, criterion12},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.budget_seconds;
    failures += !pass;
    std::printf("%s criterion %d: %s [%.1fs] %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
