#include "fattree/topology.hpp"

#include <nlohmann/json.hpp>

#include <limits>
#include <utility>

namespace fattree {

const char* to_string(Direction dir) {
  return dir == Direction::kUp ? "up" : "down";
}

Topology::Topology(int layers, int radix_half) : layers_(layers), d_(radix_half) {
  if (layers < 2) {
    throw ParameterError("fat-tree needs at least 2 layers, got " + std::to_string(layers));
  }
  if (radix_half < 2) {
    throw ParameterError("radix_half must be >= 2, got " + std::to_string(radix_half));
  }
  pow_.assign(static_cast<std::size_t>(layers + 1), 1);
  for (int e = 1; e <= layers; ++e) {
    if (pow_[e - 1] > std::numeric_limits<std::int64_t>::max() / (2 * radix_half)) {
      throw ParameterError("fat-tree too large to index");
    }
    pow_[e] = pow_[e - 1] * radix_half;
  }
  hosts_ = 2 * pow_[layers];
  core_ = pow_[layers - 1];
  per_layer_ = 2 * pow_[layers - 1];
}

std::int64_t Topology::switches_at(int layer) const {
  if (layer < 1 || layer > layers_) {
    throw ParameterError("switch layer out of range: " + std::to_string(layer));
  }
  return layer == layers_ ? core_ : per_layer_;
}

void Topology::check_host(std::int64_t label) const {
  if (label < 0 || label >= hosts_) {
    throw ParameterError("host label out of range: " + std::to_string(label));
  }
}

int Topology::host_digit(std::int64_t label, int i) const {
  const std::int64_t q = label / pow_[i - 1];
  return static_cast<int>(i == layers_ ? q : q % d_);
}

int Topology::switch_digit(std::int64_t label, int i) const {
  const std::int64_t q = label / pow_[i - 1];
  return static_cast<int>(i == layers_ - 1 ? q : q % d_);
}

std::int64_t Topology::with_switch_digit(std::int64_t label, int i, int value) const {
  return label + (static_cast<std::int64_t>(value) - switch_digit(label, i)) * pow_[i - 1];
}

HostCode Topology::host_code(std::int64_t label) const {
  check_host(label);
  HostCode code;
  code.digits.resize(static_cast<std::size_t>(layers_));
  for (int i = 1; i <= layers_; ++i) code.digits[i - 1] = host_digit(label, i);
  return code;
}

std::int64_t Topology::host_label(const HostCode& code) const {
  if (code.digits.size() != static_cast<std::size_t>(layers_)) {
    throw ParameterError("host code has wrong length");
  }
  std::int64_t label = 0;
  for (int i = 1; i <= layers_; ++i) {
    const int radix = i == layers_ ? 2 * d_ : d_;
    const int h = code.digit(i);
    if (h < 0 || h >= radix) throw ParameterError("host code digit out of range");
    label += h * pow_[i - 1];
  }
  return label;
}

void Topology::check_switch(const SwitchCode& code) const {
  if (code.layer < 1 || code.layer > layers_) {
    throw ParameterError("switch layer out of range: " + std::to_string(code.layer));
  }
  if (code.digits.size() != static_cast<std::size_t>(layers_ - 1)) {
    throw ParameterError("switch code has wrong length");
  }
  const bool core = code.layer == layers_;
  for (int i = 1; i < layers_; ++i) {
    const int radix = (i == layers_ - 1 && !core) ? 2 * d_ : d_;
    const int s = code.digit(i);
    if (s < 0 || s >= radix) throw ParameterError("switch code digit out of range");
  }
}

SwitchCode Topology::switch_code(int layer, std::int64_t label) const {
  const std::int64_t count = switches_at(layer);
  if (label < 0 || label >= count) {
    throw ParameterError("switch label out of range: " + std::to_string(label));
  }
  SwitchCode code;
  code.layer = layer;
  code.digits.resize(static_cast<std::size_t>(layers_ - 1));
  for (int i = 1; i < layers_; ++i) code.digits[i - 1] = switch_digit(label, i);
  return code;
}

std::int64_t Topology::switch_label(const SwitchCode& code) const {
  check_switch(code);
  std::int64_t label = 0;
  for (int i = 1; i < layers_; ++i) label += code.digit(i) * pow_[i - 1];
  return label;
}

int Topology::distance(std::int64_t a, std::int64_t b) const {
  check_host(a);
  check_host(b);
  for (int i = layers_; i >= 1; --i) {
    if (host_digit(a, i) != host_digit(b, i)) return i;
  }
  return 0;
}

int Topology::distance(const HostCode& a, const HostCode& b) const {
  return distance(host_label(a), host_label(b));
}

std::pair<SwitchCode, int> Topology::up_neighbor(const SwitchCode& sw, int up_port) const {
  const std::int64_t label = switch_label(sw);
  if (sw.layer == layers_) throw ParameterError("core switches have no up-ports");
  if (up_port < 0 || up_port >= d_) {
    throw ParameterError("up-port out of range: " + std::to_string(up_port));
  }
  const int m = sw.layer;
  return {switch_code(m + 1, with_switch_digit(label, m, up_port)), switch_digit(label, m)};
}

std::pair<SwitchCode, int> Topology::down_neighbor(const SwitchCode& sw, int down_port) const {
  const std::int64_t label = switch_label(sw);
  if (sw.layer == 1) throw ParameterError("layer-1 down-ports attach hosts");
  const int ports = sw.layer == layers_ ? 2 * d_ : d_;
  if (down_port < 0 || down_port >= ports) {
    throw ParameterError("down-port out of range: " + std::to_string(down_port));
  }
  const int m = sw.layer;
  return {switch_code(m - 1, with_switch_digit(label, m - 1, down_port)),
          switch_digit(label, m - 1)};
}

SwitchCode Topology::edge_switch_of(const HostCode& host) const {
  return switch_code(1, host_label(host) / d_);
}

HostCode Topology::attached_host(const SwitchCode& edge, int down_port) const {
  if (edge.layer != 1) throw ParameterError("hosts attach to layer-1 switches only");
  if (down_port < 0 || down_port >= d_) {
    throw ParameterError("down-port out of range: " + std::to_string(down_port));
  }
  return host_code(switch_label(edge) * d_ + down_port);
}

RoutePath Topology::resolve_route(const HostCode& src, const HostCode& dst,
                                  const std::vector<int>& up_ports) const {
  const int k = distance(src, dst);
  if (k == 0) throw ParameterError("source and destination coincide");
  if (up_ports.size() != static_cast<std::size_t>(k - 1)) {
    throw ParameterError("route needs " + std::to_string(k - 1) + " up-ports, got " +
                         std::to_string(up_ports.size()));
  }
  RoutePath path;
  path.source = src;
  path.dest = dst;
  path.distance = k;
  path.up_ports = up_ports;

  SwitchCode cur = edge_switch_of(src);
  path.switch_trace.push_back(cur);
  for (int p : up_ports) {
    cur = up_neighbor(cur, p).first;
    path.switch_trace.push_back(cur);
  }
  for (int j = k; j >= 2; --j) {
    const int q = dst.digit(j);
    path.down_ports.push_back(q);
    cur = down_neighbor(cur, q).first;
    path.switch_trace.push_back(cur);
  }
  path.down_ports.push_back(dst.digit(1));
  if (!(attached_host(cur, dst.digit(1)) == dst)) {
    throw std::logic_error("downward walk did not reach the destination");
  }
  return path;
}

LinkRef Topology::link_of(const PortRef& port) const {
  const std::int64_t label = switch_label(port.sw);
  const int m = port.sw.layer;
  if (port.direction == Direction::kUp) {
    if (m == layers_) throw ParameterError("core switches have no up-ports");
    if (port.port < 0 || port.port >= d_) throw ParameterError("up-port out of range");
    return LinkRef{m + 1, Direction::kUp, label * d_ + port.port};
  }
  if (m == 1) {
    if (port.port < 0 || port.port >= d_) throw ParameterError("down-port out of range");
    return LinkRef{1, Direction::kDown, label * d_ + port.port};
  }
  const auto [lower, up_port] = down_neighbor(port.sw, port.port);
  return LinkRef{m, Direction::kDown, switch_label(lower) * d_ + up_port};
}

std::vector<LinkRef> Topology::route_links(const RoutePath& path) const {
  std::vector<LinkRef> links;
  links.reserve(static_cast<std::size_t>(2 * path.distance));
  links.push_back(host_link(host_label(path.source), Direction::kUp));
  const int k = path.distance;
  for (int i = 0; i < k - 1; ++i) {
    links.push_back(link_of(PortRef{path.switch_trace[i], Direction::kUp, path.up_ports[i]}));
  }
  for (int j = 0; j < k; ++j) {
    links.push_back(link_of(PortRef{path.switch_trace[k - 1 + j], Direction::kDown,
                                    path.down_ports[j]}));
  }
  return links;
}

std::size_t Topology::dense_index(const LinkRef& link) const {
  const auto dir = static_cast<std::int64_t>(link.direction);
  return static_cast<std::size_t>(((link.layer - 1) * 2 + dir) * hosts_ + link.index);
}

LinkRef Topology::link_at(std::size_t dense) const {
  const auto i = static_cast<std::int64_t>(dense);
  const std::int64_t block = i / hosts_;
  return LinkRef{static_cast<int>(block / 2) + 1, static_cast<Direction>(block % 2), i % hosts_};
}

std::string Topology::describe_json() const {
  nlohmann::json j{{"layers", layers_},
                   {"radix_half", d_},
                   {"hosts", hosts_},
                   {"core_switches", core_},
                   {"switches_per_intermediate_layer", per_layer_},
                   {"links_per_layer_direction", hosts_}};
  return j.dump();
}

}  // namespace fattree
