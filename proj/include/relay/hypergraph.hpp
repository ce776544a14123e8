#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "relay/geometry.hpp"
#include "relay/topology.hpp"

namespace relay {

/// Distance between two nodes; a Relay endpoint is substituted by the relay
/// position at evaluation time.
struct DistanceExpr {
  NodeId a;
  NodeId b;
  Point pa = Point::Zero();
  Point pb = Point::Zero();

  bool depends_on_relay() const { return a.is_relay() || b.is_relay(); }
  double operator()(const Point& relay) const {
    return distance(a.is_relay() ? relay : pa, b.is_relay() ? relay : pb);
  }
};

/// z = plus - minus; the hyperarc wants z > 0.
struct SwitchTerm {
  DistanceExpr plus;
  DistanceExpr minus;

  double operator()(const Point& relay) const { return plus(relay) - minus(relay); }
};

/// Product of sigmoids (1 + gamma exp(-gamma z_l))^-1. Empty means always on.
struct SwitchSpec {
  std::vector<SwitchTerm> terms;

  bool always_on() const { return terms.empty(); }
};

/// log(1 + gamma exp(-gamma z)) evaluated without overflow.
double switch_penalty(double z, double gamma);

/// Switch value in (0, 1]; 1 for an empty spec.
double switch_value(const SwitchSpec& spec, const Point& relay, double gamma);

/// Hyperarc identity: transmitter, receiver set (sorted) and the receiver
/// farthest from the transmitter in the ordering that activates it.
struct HyperarcKey {
  NodeId transmitter;
  std::vector<NodeId> receivers;
  NodeId farthest;

  bool contains(NodeId id) const;
  friend auto operator<=>(const HyperarcKey&, const HyperarcKey&) = default;
  friend bool operator==(const HyperarcKey&, const HyperarcKey&) = default;
};

struct Hyperarc {
  HyperarcKey key;
  SwitchSpec activation;

  bool from_source() const { return key.transmitter.kind == NodeId::Kind::Source; }
};

/// Direct paths have one leg; relayed paths a source leg then a relay leg.
/// Legs index into Hypergraph::arcs.
struct Path {
  NodeId destination;
  std::vector<std::size_t> legs;
};

struct Hypergraph {
  /// Source hyperarcs first, then relay hyperarcs.
  std::vector<Hyperarc> arcs;
  std::size_t source_count = 0;
  /// paths[i] are the paths towards destination i.
  std::vector<std::vector<Path>> paths;

  std::span<const Hyperarc> source_arcs() const { return {arcs.data(), source_count}; }
  std::span<const Hyperarc> relay_arcs() const {
    return {arcs.data() + source_count, arcs.size() - source_count};
  }
  std::optional<std::size_t> find(const HyperarcKey& key) const;
};

/// Keys of the nested prefixes of a distance ordering.
std::vector<HyperarcKey> prefix_keys(NodeId transmitter, std::span<const NodeId> ordering);

/// Order of {relay, destinations} by distance from the source. A relay tied
/// with a destination comes first.
std::vector<NodeId> source_ordering(const Topology& topology, const Point& relay);

/// Hyperarc keys active for an exact relay position (source then relay arcs).
std::vector<HyperarcKey> active_keys(const Topology& topology, const Point& relay);

/// Distinct source hyperarcs over the radial regions. Destinations must have
/// distinct positions.
std::vector<Hyperarc> build_source_hyperarcs(const Topology& topology,
                                             const RegionDecomposition& source_regions);
std::vector<Hyperarc> build_source_hyperarcs(const Topology& topology,
                                             double hull_margin = kDefaultHullMargin);

/// Distinct relay hyperarcs over the order regions of the destinations.
std::vector<Hyperarc> build_relay_hyperarcs(const Topology& topology,
                                            const RegionDecomposition& relay_regions);

/// Direct and relayed paths per destination; legs index into the
/// concatenation source_arcs ++ relay_arcs.
std::vector<std::vector<Path>> enumerate_paths(std::span<const Hyperarc> source_arcs,
                                               std::span<const Hyperarc> relay_arcs, int n);

/// Full pre-processing on a topology with distinct destination positions.
Hypergraph build_hypergraph(const Topology& topology, double hull_margin = kDefaultHullMargin);

}  // namespace relay
