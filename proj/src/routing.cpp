#include "fattree/routing.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace fattree {

SchemeConfig SchemeConfig::drb(double threshold) {
  if (!std::isfinite(threshold) || threshold < 0.0) {
    throw ParameterError("DRB threshold must be finite and non-negative");
  }
  return {SchemeKind::kDrb, threshold};
}

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kDModK: return "dmodk";
    case SchemeKind::kVlb: return "vlb";
    case SchemeKind::kMicro: return "micro";
    case SchemeKind::kDrb: return "drb";
  }
  return "unknown";
}

SchemeKind parse_scheme(const std::string& name) {
  std::string key;
  for (char ch : name) {
    if (ch == '-' || ch == '_') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (key == "dmodk") return SchemeKind::kDModK;
  if (key == "vlb") return SchemeKind::kVlb;
  if (key == "micro") return SchemeKind::kMicro;
  if (key == "drb" || key == "ttc") return SchemeKind::kDrb;
  throw ParameterError("unknown scheme '" + name + "'");
}

int random_port(Rng& rng, int d) {
  return std::uniform_int_distribution<int>(0, d - 1)(rng);
}

std::vector<int> dmodk_up(const HostCode& dest, int k) {
  std::vector<int> ports;
  for (int i = 1; i < k; ++i) ports.push_back(dest.digit(i));
  return ports;
}

std::vector<int> vlb_up(int k, int d, Rng& rng) {
  std::vector<int> ports;
  for (int i = 1; i < k; ++i) ports.push_back(random_port(rng, d));
  return ports;
}

int ttc_choose(int default_port, int random_port, const LoadView& loads, int layer,
               std::int64_t switch_label, double threshold) {
  if (random_port == default_port) return default_port;
  const double l_default = loads.up_load(layer, switch_label, default_port);
  const double l_random = loads.up_load(layer, switch_label, random_port);
  return ttc_redirects(l_default, l_random, threshold) ? random_port : default_port;
}

int micro_choose(int port_a, int port_b, const LoadView& loads, int layer,
                 std::int64_t switch_label) {
  const double la = loads.up_load(layer, switch_label, port_a);
  const double lb = loads.up_load(layer, switch_label, port_b);
  return lb < la ? port_b : port_a;
}

int choose_up_port(const SchemeConfig& scheme, int layer, std::int64_t switch_label,
                   int default_port, int d, const LoadView& loads, Rng& rng) {
  switch (scheme.kind) {
    case SchemeKind::kDModK:
      return default_port;
    case SchemeKind::kVlb:
      return random_port(rng, d);
    case SchemeKind::kMicro: {
      const int a = random_port(rng, d);
      int b = std::uniform_int_distribution<int>(0, d - 2)(rng);
      if (b >= a) ++b;
      return micro_choose(a, b, loads, layer, switch_label);
    }
    case SchemeKind::kDrb: {
      const int r = random_port(rng, d);
      return ttc_choose(default_port, r, loads, layer, switch_label, scheme.threshold);
    }
  }
  return default_port;
}

std::vector<int> select_up_ports(const Topology& topo, const SchemeConfig& scheme,
                                 std::int64_t src, std::int64_t dst, const LoadView& loads,
                                 Rng& rng) {
  const int k = topo.distance(src, dst);
  if (k == 0) throw ParameterError("source and destination coincide");
  const int d = topo.radix_half();
  std::vector<int> ports;
  ports.reserve(static_cast<std::size_t>(k - 1));
  std::int64_t sw = src / d;
  for (int i = 1; i < k; ++i) {
    const int port = choose_up_port(scheme, i, sw, topo.host_digit(dst, i), d, loads, rng);
    ports.push_back(port);
    sw = topo.with_switch_digit(sw, i, port);
  }
  return ports;
}

RoutePath select_path(const Topology& topo, const SchemeConfig& scheme,
                      const HostCode& src, const HostCode& dst, const LoadView& loads,
                      Rng& rng) {
  const std::int64_t s = topo.host_label(src);
  const std::int64_t t = topo.host_label(dst);
  return topo.resolve_route(src, dst, select_up_ports(topo, scheme, s, t, loads, rng));
}

}  // namespace fattree
