#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fattree {

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Direction : std::uint8_t { kUp = 0, kDown = 1 };

const char* to_string(Direction dir);

// Digits of a label code are stored least-significant first: digits[i - 1]
// holds component i, so digits.back() is the wide (radix 2d) component.
struct HostCode {
  std::vector<int> digits;

  int digit(int i) const { return digits.at(static_cast<std::size_t>(i - 1)); }
  bool operator==(const HostCode&) const = default;
};

struct SwitchCode {
  int layer = 1;
  std::vector<int> digits;

  int digit(int i) const { return digits.at(static_cast<std::size_t>(i - 1)); }
  bool operator==(const SwitchCode&) const = default;
};

struct PortRef {
  SwitchCode sw;
  Direction direction = Direction::kUp;
  int port = 0;
};

// Canonical identity of one direction of a physical link.  `layer` is the
// layer of the upper endpoint (1 for host attachment links) and `index`
// enumerates (lower endpoint, lower endpoint's up-port).
struct LinkRef {
  int layer = 1;
  Direction direction = Direction::kUp;
  std::int64_t index = 0;

  bool operator==(const LinkRef&) const = default;
};

struct RoutePath {
  HostCode source;
  HostCode dest;
  int distance = 0;
  std::vector<int> up_ports;         // (p_up^1, ..., p_up^{k-1})
  std::vector<int> down_ports;       // (p_dn^k, ..., p_dn^1)
  std::vector<SwitchCode> switch_trace;  // layer 1 up to layer k and back to 1
};

class Topology {
 public:
  Topology(int layers, int radix_half);

  int layers() const { return layers_; }
  int radix_half() const { return d_; }
  std::int64_t host_count() const { return hosts_; }
  std::int64_t core_count() const { return core_; }
  std::int64_t switches_per_layer() const { return per_layer_; }
  std::int64_t switches_at(int layer) const;
  // Links per (layer, direction); equals host_count().
  std::int64_t links_per_layer() const { return hosts_; }

  HostCode host_code(std::int64_t label) const;
  std::int64_t host_label(const HostCode& code) const;
  SwitchCode switch_code(int layer, std::int64_t label) const;
  std::int64_t switch_label(const SwitchCode& code) const;

  int distance(const HostCode& a, const HostCode& b) const;
  int distance(std::int64_t a, std::int64_t b) const;

  // Label-code adjacency between layers m and m+1.  up_neighbor returns the upper switch and the down-port
  // on it; down_neighbor is the inverse and returns the lower switch and the
  // up-port on it.  down_neighbor on a layer-1 switch is an error; use
  // attached_host.
  std::pair<SwitchCode, int> up_neighbor(const SwitchCode& sw, int up_port) const;
  std::pair<SwitchCode, int> down_neighbor(const SwitchCode& sw, int down_port) const;

  SwitchCode edge_switch_of(const HostCode& host) const;
  HostCode attached_host(const SwitchCode& edge, int down_port) const;

  RoutePath resolve_route(const HostCode& src, const HostCode& dst,
                          const std::vector<int>& up_ports) const;

  LinkRef link_of(const PortRef& port) const;
  // Link between a host and its edge switch.
  LinkRef host_link(std::int64_t host, Direction dir) const {
    return LinkRef{1, dir, host};
  }
  // All directed links traversed by a route, in traversal order, including
  // both host attachment links.
  std::vector<LinkRef> route_links(const RoutePath& path) const;

  // Label-level primitives for hot loops.  Component i of a switch label;
  // the top component ℓ-1 is unbounded by d (radix 2d for intermediates).
  int switch_digit(std::int64_t label, int i) const;
  std::int64_t with_switch_digit(std::int64_t label, int i, int value) const;
  int host_digit(std::int64_t label, int i) const;
  std::int64_t pow_d(int e) const { return pow_[static_cast<std::size_t>(e)]; }

  // Dense slot for a LinkRef in [0, dense_link_count()).
  std::size_t dense_index(const LinkRef& link) const;
  std::size_t dense_link_count() const {
    return static_cast<std::size_t>(2 * layers_ * hosts_);
  }
  LinkRef link_at(std::size_t dense) const;

  std::string describe_json() const;

 private:
  void check_host(std::int64_t label) const;
  void check_switch(const SwitchCode& code) const;

  int layers_;
  int d_;
  std::int64_t hosts_;
  std::int64_t core_;
  std::int64_t per_layer_;
  std::vector<std::int64_t> pow_;
};

}  // namespace fattree
