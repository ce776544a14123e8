#pragma once

#include <compare>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace relay {

/// Planar position in meters.
using Point = Eigen::Vector2d;

/// Node of the broadcast relay channel. Destination indices are 0-based
/// internally and rendered as d1..dn.
struct NodeId {
  enum class Kind : int { Source = 0, Relay = 1, Dest = 2 };

  Kind kind = Kind::Source;
  int index = 0;

  static constexpr NodeId source() { return {Kind::Source, 0}; }
  static constexpr NodeId relay() { return {Kind::Relay, 0}; }
  static constexpr NodeId dest(int i) { return {Kind::Dest, i}; }

  constexpr bool is_relay() const { return kind == Kind::Relay; }
  constexpr bool is_dest() const { return kind == Kind::Dest; }

  friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;
};

std::string to_string(NodeId id);

/// Node placement, power budgets and channel constants.
struct Topology {
  Point source = Point::Zero();
  std::vector<Point> destinations;
  double P_s = 1.0;   // W
  double P_r = 1.0;   // W
  double N0 = 1.0;    // W/Hz
  double alpha = 2.0; // pathloss exponent

  int n() const { return static_cast<int>(destinations.size()); }

  /// Position of a fixed node; the relay has no fixed position.
  const Point& position(NodeId id) const;
};

/// Throws InvalidInput when budgets, noise, exponent or coordinates are invalid.
void validate(const Topology& topology);

/// Sources and destinations, in that order.
std::vector<Point> fixed_nodes(const Topology& topology);

}  // namespace relay
