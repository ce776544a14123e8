#include "relay/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "relay/errors.hpp"

namespace relay {
namespace {

DistanceExpr dist_expr(const Topology& topology, NodeId a, NodeId b) {
  DistanceExpr e{a, b, Point::Zero(), Point::Zero()};
  if (!a.is_relay()) e.pa = topology.position(a);
  if (!b.is_relay()) e.pb = topology.position(b);
  return e;
}

// A term is dropped when it is nonnegative over the whole hull. The sign of a
// relay-relay difference is linear in the relay position and a constant minus
// a relay distance is concave, so checking the vertices suffices for both; a
// relay distance minus a constant is bounded by the distance to the hull.
bool always_satisfied(const SwitchTerm& term, const Polygon& hull) {
  const bool plus_var = term.plus.depends_on_relay();
  const bool minus_var = term.minus.depends_on_relay();
  if (plus_var && !minus_var) {
    const Point anchor = term.plus.a.is_relay() ? term.plus.pb : term.plus.pa;
    const double nearest = distance(project_onto_polygon(hull, anchor), anchor);
    return nearest - term.minus(anchor) >= -kGeomTol;
  }
  for (const auto& v : hull) {
    if (term(v) < -kGeomTol) return false;
  }
  return true;
}

SwitchSpec source_activation(const Topology& topology, const HyperarcKey& key, const Polygon& hull) {
  const NodeId s = NodeId::source();
  const NodeId r = NodeId::relay();
  const DistanceExpr d_sr = dist_expr(topology, s, r);
  SwitchSpec spec;
  const auto radius = [&](NodeId d) { return distance(topology.position(d), topology.source); };

  if (key.farthest.is_relay()) {
    // r is last: it lies beyond every destination in the set and before the rest.
    std::optional<NodeId> inner;
    for (const auto& v : key.receivers) {
      if (v.is_dest() && (!inner || radius(v) > radius(*inner))) inner = v;
    }
    std::optional<NodeId> outer;
    for (int i = 0; i < topology.n(); ++i) {
      const NodeId d = NodeId::dest(i);
      if (key.contains(d)) continue;
      if (!outer || radius(d) < radius(*outer)) outer = d;
    }
    if (inner) spec.terms.push_back({d_sr, dist_expr(topology, s, *inner)});
    if (outer) spec.terms.push_back({dist_expr(topology, s, *outer), d_sr});
  } else if (key.contains(r)) {
    spec.terms.push_back({dist_expr(topology, s, key.farthest), d_sr});
  } else {
    spec.terms.push_back({d_sr, dist_expr(topology, s, key.farthest)});
  }

  std::erase_if(spec.terms, [&](const SwitchTerm& t) { return always_satisfied(t, hull); });
  return spec;
}

SwitchSpec relay_activation(const Topology& topology, const HyperarcKey& key, const Polygon& hull) {
  const NodeId r = NodeId::relay();
  SwitchSpec spec;
  const DistanceExpr d_far = dist_expr(topology, r, key.farthest);
  for (int i = 0; i < topology.n(); ++i) {
    const NodeId d = NodeId::dest(i);
    if (d == key.farthest) continue;
    if (key.contains(d)) {
      spec.terms.push_back({d_far, dist_expr(topology, r, d)});
    } else {
      spec.terms.push_back({dist_expr(topology, r, d), d_far});
    }
  }
  std::erase_if(spec.terms, [&](const SwitchTerm& t) { return always_satisfied(t, hull); });
  return spec;
}

}  // namespace

double switch_penalty(double z, double gamma) {
  const double w = std::log(gamma) - gamma * z;
  return w > 30.0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w));
}

double switch_value(const SwitchSpec& spec, const Point& relay, double gamma) {
  if (!(gamma > 0.0)) throw InvalidInput("switch sharpness must be positive");
  double log_f = 0.0;
  for (const auto& term : spec.terms) log_f -= switch_penalty(term(relay), gamma);
  return std::exp(log_f);
}

bool HyperarcKey::contains(NodeId id) const {
  return std::binary_search(receivers.begin(), receivers.end(), id);
}

std::optional<std::size_t> Hypergraph::find(const HyperarcKey& key) const {
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    if (arcs[i].key == key) return i;
  }
  return std::nullopt;
}

std::vector<HyperarcKey> prefix_keys(NodeId transmitter, std::span<const NodeId> ordering) {
  std::vector<HyperarcKey> keys;
  keys.reserve(ordering.size());
  std::vector<NodeId> prefix;
  for (const auto& id : ordering) {
    prefix.insert(std::upper_bound(prefix.begin(), prefix.end(), id), id);
    keys.push_back({transmitter, prefix, id});
  }
  return keys;
}

std::vector<NodeId> source_ordering(const Topology& topology, const Point& relay) {
  std::vector<NodeId> order = distance_order(topology.source, topology.destinations);
  const double d_sr2 = (relay - topology.source).squaredNorm();
  auto slot = std::find_if(order.begin(), order.end(), [&](NodeId d) {
    return (topology.position(d) - topology.source).squaredNorm() >= d_sr2;
  });
  order.insert(slot, NodeId::relay());
  return order;
}

std::vector<HyperarcKey> active_keys(const Topology& topology, const Point& relay) {
  std::vector<HyperarcKey> keys = prefix_keys(NodeId::source(), source_ordering(topology, relay));
  const auto relay_order = distance_order(relay, topology.destinations);
  auto relay_keys = prefix_keys(NodeId::relay(), relay_order);
  keys.insert(keys.end(), relay_keys.begin(), relay_keys.end());
  return keys;
}

std::vector<Hyperarc> build_source_hyperarcs(const Topology& topology,
                                             const RegionDecomposition& source_regions) {
  std::vector<Hyperarc> arcs;
  std::set<HyperarcKey> seen;
  for (const auto& region : source_regions.regions) {
    for (auto& key : prefix_keys(NodeId::source(), region.ordering)) {
      if (!seen.insert(key).second) continue;
      SwitchSpec spec = source_activation(topology, key, source_regions.hull);
      arcs.push_back({std::move(key), std::move(spec)});
    }
  }
  return arcs;
}

std::vector<Hyperarc> build_source_hyperarcs(const Topology& topology, double hull_margin) {
  const auto nodes = fixed_nodes(topology);
  const Polygon hull = working_hull(nodes, hull_margin);
  return build_source_hyperarcs(topology,
                                source_order_regions(topology.source, topology.destinations, hull));
}

std::vector<Hyperarc> build_relay_hyperarcs(const Topology& topology,
                                            const RegionDecomposition& relay_regions) {
  std::vector<Hyperarc> arcs;
  std::set<HyperarcKey> seen;
  for (const auto& region : relay_regions.regions) {
    for (auto& key : prefix_keys(NodeId::relay(), region.ordering)) {
      if (!seen.insert(key).second) continue;
      SwitchSpec spec = relay_activation(topology, key, relay_regions.hull);
      arcs.push_back({std::move(key), std::move(spec)});
    }
  }
  return arcs;
}

std::vector<std::vector<Path>> enumerate_paths(std::span<const Hyperarc> source_arcs,
                                               std::span<const Hyperarc> relay_arcs, int n) {
  std::vector<std::vector<Path>> paths(static_cast<std::size_t>(n));
  const std::size_t offset = source_arcs.size();
  for (int i = 0; i < n; ++i) {
    const NodeId d = NodeId::dest(i);
    auto& out = paths[static_cast<std::size_t>(i)];
    for (std::size_t a = 0; a < source_arcs.size(); ++a) {
      if (source_arcs[a].key.contains(d)) out.push_back({d, {a}});
    }
    for (std::size_t a = 0; a < source_arcs.size(); ++a) {
      if (!source_arcs[a].key.contains(NodeId::relay())) continue;
      for (std::size_t b = 0; b < relay_arcs.size(); ++b) {
        if (relay_arcs[b].key.contains(d)) out.push_back({d, {a, offset + b}});
      }
    }
  }
  return paths;
}

Hypergraph build_hypergraph(const Topology& topology, double hull_margin) {
  validate(topology);
  const auto nodes = fixed_nodes(topology);
  const Polygon hull = working_hull(nodes, hull_margin);
  Hypergraph graph;
  graph.arcs = build_source_hyperarcs(
      topology, source_order_regions(topology.source, topology.destinations, hull));
  graph.source_count = graph.arcs.size();
  auto relay = build_relay_hyperarcs(topology, relay_order_regions(topology.destinations, hull));
  graph.arcs.insert(graph.arcs.end(), relay.begin(), relay.end());
  graph.paths = enumerate_paths(graph.source_arcs(), graph.relay_arcs(), topology.n());
  return graph;
}

}  // namespace relay
