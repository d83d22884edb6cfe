#include <gtest/gtest.h>

#include <map>
#include <queue>
#include <set>

#include "fattree/topology.hpp"

using namespace fattree;

namespace {

HostCode code_msb_first(std::vector<int> msb) {
  return HostCode{std::vector<int>(msb.rbegin(), msb.rend())};
}

}  // namespace

TEST(TopologyCounts, ThreeLayerRadixTwo) {
  const Topology t(3, 2);
  EXPECT_EQ(t.host_count(), 16);
  EXPECT_EQ(t.core_count(), 4);
  EXPECT_EQ(t.switches_per_layer(), 8);
  EXPECT_EQ(t.switches_at(1), 8);
  EXPECT_EQ(t.switches_at(2), 8);
  EXPECT_EQ(t.switches_at(3), 4);
}

TEST(TopologyCounts, TwoLayerRadixTwo) {
  const Topology t(2, 2);
  EXPECT_EQ(t.host_count(), 8);
  EXPECT_EQ(t.core_count(), 2);
  EXPECT_EQ(t.switches_at(1), 4);
  EXPECT_EQ(t.links_per_layer(), 8);
}

TEST(TopologyCounts, LargeRadix) {
  const Topology t(3, 24);
  EXPECT_EQ(t.host_count(), 2 * 24 * 24 * 24);
  EXPECT_EQ(t.host_count(), 27648);
}

TEST(TopologyCounts, RejectsDegenerateParameters) {
  EXPECT_THROW(Topology(1, 4), ParameterError);
  EXPECT_THROW(Topology(3, 1), ParameterError);
  EXPECT_THROW(Topology(40, 40), ParameterError);
}

TEST(HostCodes, KnownLabels) {
  const Topology t(3, 2);
  EXPECT_EQ(t.host_code(10), code_msb_first({2, 1, 0}));
  EXPECT_EQ(t.host_code(4), code_msb_first({1, 0, 0}));
  EXPECT_EQ(t.host_code(0), code_msb_first({0, 0, 0}));
}

TEST(HostCodes, RoundTripAllHosts) {
  for (auto [l, d] : {std::pair{2, 2}, {3, 2}, {3, 4}, {4, 3}}) {
    const Topology t(l, d);
    for (std::int64_t x = 0; x < t.host_count(); ++x) {
      const HostCode c = t.host_code(x);
      ASSERT_EQ(t.host_label(c), x);
      // Every digit but the top one lies in [0, d); the top one in [0, 2d).
      for (int i = 1; i <= l; ++i) {
        ASSERT_LT(c.digit(i), i == l ? 2 * d : d);
      }
    }
  }
}

TEST(HostCodes, RejectBadInput) {
  const Topology t(3, 2);
  EXPECT_THROW(t.host_code(16), ParameterError);
  EXPECT_THROW(t.host_code(-1), ParameterError);
  EXPECT_THROW(t.host_label(HostCode{{0, 2, 0}}), ParameterError);
  EXPECT_THROW(t.host_label(HostCode{{0, 0}}), ParameterError);
}

TEST(SwitchCodes, RoundTripEveryLayer) {
  for (auto [l, d] : {std::pair{2, 2}, {3, 2}, {3, 4}}) {
    const Topology t(l, d);
    for (int m = 1; m <= l; ++m) {
      for (std::int64_t s = 0; s < t.switches_at(m); ++s) {
        ASSERT_EQ(t.switch_label(t.switch_code(m, s)), s);
      }
    }
  }
}

TEST(Distance, Examples) {
  const Topology t(3, 2);
  EXPECT_EQ(t.distance(code_msb_first({1, 0, 0}), code_msb_first({2, 1, 0})), 3);
  EXPECT_EQ(t.distance(7, 7), 0);
  const Topology t2(2, 2);
  EXPECT_EQ(t2.distance(code_msb_first({0, 0}), code_msb_first({0, 1})), 1);
}

TEST(Distance, SymmetricAndMatchesHighestDifferingDigit) {
  const Topology t(3, 3);
  for (std::int64_t a = 0; a < t.host_count(); ++a) {
    for (std::int64_t b = 0; b < t.host_count(); ++b) {
      int expect = 0;
      const auto ca = t.host_code(a), cb = t.host_code(b);
      for (int i = 1; i <= 3; ++i) {
        if (ca.digit(i) != cb.digit(i)) expect = i;
      }
      ASSERT_EQ(t.distance(a, b), expect);
      ASSERT_EQ(t.distance(a, b), t.distance(b, a));
    }
  }
}

TEST(Adjacency, UpPortExample) {
  const Topology t(3, 2);
  const auto [upper, down_port] = t.up_neighbor(t.switch_code(1, 0), 1);
  EXPECT_EQ(upper.layer, 2);
  EXPECT_EQ(t.switch_label(upper), 1);
  EXPECT_EQ(down_port, 0);
}

TEST(Adjacency, TwoLayerEdgeToCore) {
  const Topology t(2, 2);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 2; ++i) {
      const auto [core, down_port] = t.up_neighbor(t.switch_code(1, j), i);
      EXPECT_EQ(core.layer, 2);
      EXPECT_EQ(t.switch_label(core), i);
      EXPECT_EQ(down_port, j);
    }
  }
}

TEST(Adjacency, UpAndDownAreInverse) {
  for (int l = 2; l <= 3; ++l) {
    for (int d = 2; d <= 4; ++d) {
      const Topology t(l, d);
      for (int m = 1; m < l; ++m) {
        for (std::int64_t s = 0; s < t.switches_at(m); ++s) {
          const SwitchCode sw = t.switch_code(m, s);
          for (int p = 0; p < d; ++p) {
            const auto [up, q] = t.up_neighbor(sw, p);
            const auto [back, p2] = t.down_neighbor(up, q);
            ASSERT_EQ(back, sw);
            ASSERT_EQ(p2, p);
          }
        }
      }
      for (int m = 2; m <= l; ++m) {
        const int ports = m == l ? 2 * d : d;
        for (std::int64_t s = 0; s < t.switches_at(m); ++s) {
          const SwitchCode sw = t.switch_code(m, s);
          for (int q = 0; q < ports; ++q) {
            const auto [low, p] = t.down_neighbor(sw, q);
            const auto [back, q2] = t.up_neighbor(low, p);
            ASSERT_EQ(back, sw);
            ASSERT_EQ(q2, q);
          }
        }
      }
    }
  }
}

TEST(Adjacency, PortCountsMatchRadix) {
  // Each intermediate switch has d up and d down neighbours; cores have 2d.
  const Topology t(3, 3);
  std::map<std::pair<int, std::int64_t>, int> down_degree;
  for (int m = 1; m < 3; ++m) {
    for (std::int64_t s = 0; s < t.switches_at(m); ++s) {
      for (int p = 0; p < 3; ++p) {
        const auto [up, q] = t.up_neighbor(t.switch_code(m, s), p);
        ++down_degree[{up.layer, t.switch_label(up)}];
      }
    }
  }
  for (const auto& [key, deg] : down_degree) EXPECT_EQ(deg, key.first == 3 ? 6 : 3);
  EXPECT_EQ(down_degree.size(), static_cast<std::size_t>(t.switches_at(2) + t.switches_at(3)));
}

TEST(Adjacency, RejectsBadPorts) {
  const Topology t(3, 2);
  EXPECT_THROW(t.up_neighbor(t.switch_code(3, 0), 0), ParameterError);
  EXPECT_THROW(t.up_neighbor(t.switch_code(1, 0), 2), ParameterError);
  EXPECT_THROW(t.down_neighbor(t.switch_code(1, 0), 0), ParameterError);
  EXPECT_THROW(t.down_neighbor(t.switch_code(3, 0), 4), ParameterError);
}

TEST(ResolveRoute, HighlightedPath) {
  const Topology t(3, 2);
  const RoutePath p = t.resolve_route(t.host_code(4), t.host_code(10), {0, 1});
  EXPECT_EQ(p.distance, 3);
  EXPECT_EQ(p.down_ports, (std::vector<int>{2, 1, 0}));
  ASSERT_EQ(p.switch_trace.size(), 5u);
  const SwitchCode& core = p.switch_trace[2];
  EXPECT_EQ(core.layer, 3);
  EXPECT_EQ(core.digit(1), 0);
  EXPECT_EQ(core.digit(2), 1);
  EXPECT_EQ(t.switch_label(core), 2);
}

// Breadth-first search over the switch graph built only from up_neighbor:
// the core reached by the highlighted walk lies on a shortest path between
// the two edge switches, and each consecutive pair in the trace is adjacent.
TEST(ResolveRoute, HighlightedPathAgreesWithBfs) {
  const Topology t(3, 2);
  std::map<std::pair<int, std::int64_t>, std::set<std::pair<int, std::int64_t>>> adj;
  for (int m = 1; m < 3; ++m) {
    for (std::int64_t s = 0; s < t.switches_at(m); ++s) {
      for (int p = 0; p < 2; ++p) {
        const auto [up, q] = t.up_neighbor(t.switch_code(m, s), p);
        adj[{m, s}].insert({up.layer, t.switch_label(up)});
        adj[{up.layer, t.switch_label(up)}].insert({m, s});
      }
    }
  }
  auto bfs = [&](std::pair<int, std::int64_t> from) {
    std::map<std::pair<int, std::int64_t>, int> dist{{from, 0}};
    std::queue<std::pair<int, std::int64_t>> q;
    q.push(from);
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (auto v : adj[u]) {
        if (dist.emplace(v, dist[u] + 1).second) q.push(v);
      }
    }
    return dist;
  };
  const std::pair<int, std::int64_t> src{1, 4 / 2}, dst{1, 10 / 2}, core{3, 2};
  const auto from_src = bfs(src);
  const auto from_dst = bfs(dst);
  EXPECT_EQ(from_src.at(dst), 4);
  EXPECT_EQ(from_src.at(core) + from_dst.at(core), 4);

  const RoutePath p = t.resolve_route(t.host_code(4), t.host_code(10), {0, 1});
  for (std::size_t i = 0; i + 1 < p.switch_trace.size(); ++i) {
    const std::pair<int, std::int64_t> a{p.switch_trace[i].layer,
                                         t.switch_label(p.switch_trace[i])};
    const std::pair<int, std::int64_t> b{p.switch_trace[i + 1].layer,
                                         t.switch_label(p.switch_trace[i + 1])};
    EXPECT_TRUE(adj[a].count(b));
  }
}

TEST(ResolveRoute, DistanceOneStaysOnEdgeSwitch) {
  const Topology t(3, 2);
  const RoutePath p = t.resolve_route(t.host_code(4), t.host_code(5), {});
  EXPECT_EQ(p.distance, 1);
  EXPECT_EQ(p.down_ports, (std::vector<int>{1}));
  ASSERT_EQ(p.switch_trace.size(), 1u);
  EXPECT_EQ(t.switch_label(p.switch_trace[0]), 2);
}

TEST(ResolveRoute, RejectsInvalid) {
  const Topology t(3, 2);
  EXPECT_THROW(t.resolve_route(t.host_code(3), t.host_code(3), {}), ParameterError);
  EXPECT_THROW(t.resolve_route(t.host_code(4), t.host_code(10), {0}), ParameterError);
  EXPECT_THROW(t.resolve_route(t.host_code(4), t.host_code(10), {0, 2}), ParameterError);
}

TEST(ResolveRoute, DistinctUpSequencesAreUpwardDisjoint) {
  const Topology t(3, 3);
  const HostCode s = t.host_code(0), dst = t.host_code(t.host_count() - 1);
  ASSERT_EQ(t.distance(s, dst), 3);
  std::set<std::pair<int, std::int64_t>> seen;
  int sequences = 0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const RoutePath p = t.resolve_route(s, dst, {a, b});
      const auto links = t.route_links(p);
      // links[1] leaves the source switch and is shared by every sequence
      // with the same first port; links[2] is the one above it.
      EXPECT_TRUE(seen.insert({links[2].layer, links[2].index}).second);
      ++sequences;
    }
  }
  EXPECT_EQ(sequences, 9);
}

TEST(Links, TwoLayerLinkCounts) {
  const Topology t(2, 2);
  EXPECT_EQ(t.links_per_layer(), 8);
  EXPECT_EQ(t.dense_link_count(), 2u * 2u * 8u);
}

TEST(Links, BothEndpointsAgree) {
  const Topology t(3, 3);
  for (int m = 1; m < 3; ++m) {
    for (std::int64_t s = 0; s < t.switches_at(m); ++s) {
      const SwitchCode sw = t.switch_code(m, s);
      for (int p = 0; p < 3; ++p) {
        const auto [up, q] = t.up_neighbor(sw, p);
        const LinkRef a = t.link_of(PortRef{sw, Direction::kUp, p});
        const LinkRef b = t.link_of(PortRef{up, Direction::kDown, q});
        ASSERT_EQ(a.layer, b.layer);
        ASSERT_EQ(a.index, b.index);
        ASSERT_EQ(a.direction, Direction::kUp);
        ASSERT_EQ(b.direction, Direction::kDown);
      }
    }
  }
}

TEST(Links, EnumerationIsABijection) {
  const Topology t(3, 2);
  std::set<std::size_t> up, down;
  for (int m = 1; m <= 3; ++m) {
    for (std::int64_t s = 0; s < t.switches_at(m); ++s) {
      const SwitchCode sw = t.switch_code(m, s);
      if (m < 3) {
        for (int p = 0; p < 2; ++p) {
          ASSERT_TRUE(up.insert(t.dense_index(t.link_of({sw, Direction::kUp, p}))).second);
        }
      }
      const int ports = m == 3 ? 4 : 2;
      for (int q = 0; q < ports; ++q) {
        ASSERT_TRUE(down.insert(t.dense_index(t.link_of({sw, Direction::kDown, q}))).second);
      }
    }
  }
  // Switch-to-switch up-links (layers 2, 3) plus host links per direction.
  for (std::int64_t h = 0; h < t.host_count(); ++h) {
    ASSERT_TRUE(up.insert(t.dense_index(t.host_link(h, Direction::kUp))).second);
  }
  EXPECT_EQ(up.size(), static_cast<std::size_t>(3 * t.host_count()));
  EXPECT_EQ(down.size(), static_cast<std::size_t>(3 * t.host_count()));
  for (std::size_t i = 0; i < t.dense_link_count(); ++i) {
    ASSERT_EQ(t.dense_index(t.link_at(i)), i);
  }
}

TEST(Links, RouteTouchesTwoLinksPerLevel) {
  const Topology t(3, 2);
  for (std::int64_t a = 0; a < t.host_count(); ++a) {
    for (std::int64_t b = 0; b < t.host_count(); ++b) {
      if (a == b) continue;
      const int k = t.distance(a, b);
      const RoutePath p =
          t.resolve_route(t.host_code(a), t.host_code(b), std::vector<int>(k - 1, 1));
      const auto links = t.route_links(p);
      ASSERT_EQ(links.size(), static_cast<std::size_t>(2 * k));
      EXPECT_EQ(links.front(), t.host_link(a, Direction::kUp));
      EXPECT_EQ(links.back(), (LinkRef{1, Direction::kDown, b}));
    }
  }
}

TEST(Topology, DescribeJson) {
  const Topology t(3, 8);
  EXPECT_NE(t.describe_json().find("\"layers\":3"), std::string::npos);
  EXPECT_NE(t.describe_json().find("\"radix_half\":8"), std::string::npos);
}
