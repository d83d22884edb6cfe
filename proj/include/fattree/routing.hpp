#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fattree/topology.hpp"

namespace fattree {

using Rng = std::mt19937_64;

enum class SchemeKind { kDModK, kVlb, kMicro, kDrb };

struct SchemeConfig {
  SchemeKind kind = SchemeKind::kDModK;
  double threshold = 0.0;  // DRB only

  static SchemeConfig dmodk() { return {SchemeKind::kDModK, 0.0}; }
  static SchemeConfig vlb() { return {SchemeKind::kVlb, 0.0}; }
  static SchemeConfig micro() { return {SchemeKind::kMicro, 0.0}; }
  static SchemeConfig drb(double threshold);
};

std::string scheme_name(SchemeKind kind);
// Accepts "dmodk", "vlb", "micro", "drb" (case-insensitive, "d-mod-k" too).
SchemeKind parse_scheme(const std::string& name);

// Load of the link behind an up-port of a switch, read at decision time.
class LoadView {
 public:
  virtual ~LoadView() = default;
  virtual double up_load(int layer, std::int64_t switch_label, int up_port) const = 0;
};

class FunctionLoadView final : public LoadView {
 public:
  using Fn = std::function<double(int, std::int64_t, int)>;
  explicit FunctionLoadView(Fn fn) : fn_(std::move(fn)) {}
  double up_load(int layer, std::int64_t switch_label, int up_port) const override {
    return fn_(layer, switch_label, up_port);
  }

 private:
  Fn fn_;
};

// Every load is zero.
class ZeroLoadView final : public LoadView {
 public:
  double up_load(int, std::int64_t, int) const override { return 0.0; }
};

int random_port(Rng& rng, int d);

// D-mod-k upward ports (h^d_1, ..., h^d_{k-1}).
std::vector<int> dmodk_up(const HostCode& dest, int k);
std::vector<int> vlb_up(int k, int d, Rng& rng);

// Threshold rule: redirect only when the random candidate is more than
// `threshold` lighter than the default.  Ties keep the default.
inline bool ttc_redirects(double default_load, double random_load, double threshold) {
  return random_load < default_load - threshold;
}

int ttc_choose(int default_port, int random_port, const LoadView& loads, int layer,
               std::int64_t switch_label, double threshold);
int micro_choose(int port_a, int port_b, const LoadView& loads, int layer,
                 std::int64_t switch_label);

// One upward decision at a layer-`layer` switch whose D-mod-k port is
// `default_port`.  Draws from `rng` according to the scheme.
int choose_up_port(const SchemeConfig& scheme, int layer, std::int64_t switch_label,
                   int default_port, int d, const LoadView& loads, Rng& rng);

RoutePath select_path(const Topology& topo, const SchemeConfig& scheme,
                      const HostCode& src, const HostCode& dst, const LoadView& loads,
                      Rng& rng);

// Upward ports only; avoids building the full RoutePath.
std::vector<int> select_up_ports(const Topology& topo, const SchemeConfig& scheme,
                                 std::int64_t src, std::int64_t dst, const LoadView& loads,
                                 Rng& rng);

}  // namespace fattree
