#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "relay/errors.hpp"
#include "relay/hypergraph.hpp"

using namespace relay;

namespace {

// Independent prefix-set oracle: sort nodes by distance by hand and collect
// (transmitter, sorted set, last added) triples.
std::set<HyperarcKey> sampled_keys(const Topology& t, NodeId tx, const Point& relay) {
  struct Item {
    double d2;
    NodeId id;
  };
  std::vector<Item> items;
  const Point from = tx.is_relay() ? relay : t.source;
  for (int i = 0; i < t.n(); ++i) {
    items.push_back({(t.destinations[static_cast<std::size_t>(i)] - from).squaredNorm(), NodeId::dest(i)});
  }
  if (!tx.is_relay()) items.push_back({(relay - from).squaredNorm(), NodeId::relay()});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return a.id < b.id;  // relay sorts before destinations on ties
  });
  std::set<HyperarcKey> keys;
  std::vector<NodeId> set;
  for (const auto& it : items) {
    set.push_back(it.id);
    std::vector<NodeId> sorted = set;
    std::sort(sorted.begin(), sorted.end());
    keys.insert({tx, sorted, it.id});
  }
  return keys;
}

// Uniform point in a convex polygon via an area-weighted triangle fan.
Point uniform_in(const Polygon& hull, std::mt19937_64& rng) {
  std::vector<double> areas;
  for (std::size_t i = 1; i + 1 < hull.size(); ++i) {
    areas.push_back(polygon_area({hull[0], hull[i], hull[i + 1]}));
  }
  std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t i = pick(rng) + 1;
  double a = u(rng), b = u(rng);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  return hull[0] + a * (hull[i] - hull[0]) + b * (hull[i + 1] - hull[0]);
}

Topology random_topology(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Topology t;
  t.source = Point(u(rng), u(rng));
  for (int i = 0; i < n; ++i) t.destinations.emplace_back(u(rng), u(rng));
  return t;
}

std::set<HyperarcKey> keys_of(std::span<const Hyperarc> arcs) {
  std::set<HyperarcKey> out;
  for (const auto& a : arcs) out.insert(a.key);
  return out;
}

}  // namespace

TEST_CASE("switch value examples") {
  SwitchTerm term{{NodeId::source(), NodeId::relay(), Point(0, 0), Point(0, 0)},
                  {NodeId::source(), NodeId::dest(0), Point(0, 0), Point(0, 0)}};
  SwitchSpec spec{{term}};
  // z = D_sr - 0 = |relay|.
  CHECK(switch_value(spec, Point(0, 0), 100.0) == doctest::Approx(1.0 / 101.0));
  CHECK(switch_value(spec, Point(1, 0), 100.0) == doctest::Approx(1.0));
  // z = -0.1: swap the expressions.
  SwitchSpec neg{{{term.minus, term.plus}}};
  CHECK(switch_value(neg, Point(0.1, 0), 100.0) == doctest::Approx(1.0 / (1.0 + 100.0 * std::exp(10.0))));
  CHECK(switch_value(SwitchSpec{}, Point(3, 3), 100.0) == 1.0);
  CHECK_THROWS_AS(switch_value(spec, Point(0, 0), 0.0), InvalidInput);
  // Monotone in z (z = x for x >= 0).
  double prev = 0.0;
  for (double x = 0.0; x <= 1.0; x += 0.02) {
    const double v = switch_value(spec, Point(x, 0), 10.0);
    CHECK(v >= prev);
    prev = std::max(prev, v);
    CHECK(v > 0.0);
    CHECK(v < 1.0 + 1e-15);
  }
}

TEST_CASE("source hyperarcs for three distinct radii") {
  Topology t;
  t.source = Point(0, 0);
  t.destinations = {{1, 0}, {0, 2}, {-3, -1}};
  const auto arcs = build_source_hyperarcs(t);
  CHECK(arcs.size() == 8);
}

TEST_CASE("source hyperarcs for one destination") {
  Topology t;
  t.source = Point(0, 0);
  t.destinations = {{10, 0}};
  const auto arcs = build_source_hyperarcs(t);
  // Sampling oracle over the (inflated) hull.
  std::mt19937_64 rng(5);
  const Polygon hull = working_hull(fixed_nodes(t));
  std::set<HyperarcKey> seen;
  for (int s = 0; s < 2000; ++s) {
    for (const auto& k : sampled_keys(t, NodeId::source(), uniform_in(hull, rng))) seen.insert(k);
  }
  CHECK(seen.size() == 2);
  CHECK(keys_of(arcs) == seen);
}

TEST_CASE("equidistant destinations reduce the source count") {
  Topology t;
  t.source = Point(0, 0);
  t.destinations = {{3, 0}, {0, 3}, {-1, 1}};
  const auto arcs = build_source_hyperarcs(t);
  CHECK(arcs.size() < 8);
}

TEST_CASE("source hyperarcs match sampled prefix sets") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Topology t = random_topology(1 + trial % 4, rng);
    const auto arcs = build_source_hyperarcs(t);
    CHECK(arcs.size() == static_cast<std::size_t>(3 * t.n() - 1));
    const auto built = keys_of(arcs);
    const Polygon hull = working_hull(fixed_nodes(t));
    for (int s = 0; s < 300; ++s) {
      for (const auto& k : sampled_keys(t, NodeId::source(), uniform_in(hull, rng))) {
        CHECK(built.contains(k));
      }
    }
  }
}

TEST_CASE("relay hyperarcs") {
  SUBCASE("one destination gives a single always-on arc") {
    Topology t;
    t.source = Point(0, 0);
    t.destinations = {{4, 1}};
    const auto g = build_hypergraph(t);
    REQUIRE(g.relay_arcs().size() == 1);
    CHECK(g.relay_arcs()[0].activation.always_on());
  }
  SUBCASE("two destinations") {
    Topology t;
    t.source = Point(1, 3);
    t.destinations = {{0, 0}, {2, 0}};
    const auto g = build_hypergraph(t);
    const auto keys = keys_of(g.relay_arcs());
    CHECK(keys.size() == 4);
    std::set<std::vector<NodeId>> sets;
    for (const auto& k : keys) sets.insert(k.receivers);
    CHECK(sets.size() == 3);
  }
  SUBCASE("collinear destinations give n squared arcs") {
    for (int n = 2; n <= 6; ++n) {
      Topology t;
      double x = 0.0;
      for (int i = 0; i < n; ++i) {
        t.destinations.emplace_back(x, 0.0);
        x += std::pow(2.0, i);
      }
      t.source = Point(0.3 * x, 1.5);
      const auto g = build_hypergraph(t);
      CHECK(g.relay_arcs().size() == static_cast<std::size_t>(n * n));
    }
  }
}

TEST_CASE("paths respect containment") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Topology t = random_topology(1 + trial % 3, rng);
    const auto g = build_hypergraph(t);
    REQUIRE(g.paths.size() == static_cast<std::size_t>(t.n()));
    for (int i = 0; i < t.n(); ++i) {
      const NodeId d = NodeId::dest(i);
      const auto& paths = g.paths[static_cast<std::size_t>(i)];
      CHECK(paths.size() <= g.source_count + g.source_count * g.relay_arcs().size());
      for (const auto& p : paths) {
        CHECK(p.destination == d);
        REQUIRE((p.legs.size() == 1 || p.legs.size() == 2));
        CHECK(g.arcs[p.legs.back()].key.contains(d));
        if (p.legs.size() == 2) {
          CHECK(g.arcs[p.legs[0]].from_source());
          CHECK(g.arcs[p.legs[0]].key.contains(NodeId::relay()));
          CHECK(!g.arcs[p.legs[1]].from_source());
        } else {
          CHECK(g.arcs[p.legs[0]].from_source());
        }
      }
    }
  }
}

TEST_CASE("switches above one half reproduce the exact prefix sets") {
  std::mt19937_64 rng(13);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Topology t = random_topology(2 + trial % 3, rng);
    const auto g = build_hypergraph(t);
    const Polygon hull = working_hull(fixed_nodes(t));
    const double gamma = 40.0;
    for (int s = 0; s < 100; ++s) {
      const Point relay = uniform_in(hull, rng);
      // Skip positions whose distance differences are too small for the switch
      // sharpness to resolve.
      double margin = std::numeric_limits<double>::infinity();
      for (const auto& arc : g.arcs) {
        for (const auto& term : arc.activation.terms) margin = std::min(margin, std::abs(term(relay)));
      }
      if (gamma * margin < std::log(100.0 * t.n() * gamma)) continue;
      std::set<HyperarcKey> expected = sampled_keys(t, NodeId::source(), relay);
      for (const auto& k : sampled_keys(t, NodeId::relay(), relay)) expected.insert(k);
      std::set<HyperarcKey> on;
      for (const auto& arc : g.arcs) {
        const double v = switch_value(arc.activation, relay, gamma);
        if (v > 0.5) {
          on.insert(arc.key);
          CHECK(v >= 0.99);
        } else {
          CHECK(v <= 0.01);
        }
      }
      CHECK(on == expected);
      ++checked;
    }
  }
  CHECK(checked > 100);
}
