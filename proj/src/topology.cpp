#include "relay/topology.hpp"

#include <cmath>

#include "relay/errors.hpp"

namespace relay {

std::string to_string(NodeId id) {
  switch (id.kind) {
    case NodeId::Kind::Source:
      return "s";
    case NodeId::Kind::Relay:
      return "r";
    case NodeId::Kind::Dest:
      return "d" + std::to_string(id.index + 1);
  }
  return "?";
}

const Point& Topology::position(NodeId id) const {
  switch (id.kind) {
    case NodeId::Kind::Source:
      return source;
    case NodeId::Kind::Dest:
      if (id.index < 0 || id.index >= n()) throw InvalidInput("destination index out of range");
      return destinations[static_cast<std::size_t>(id.index)];
    case NodeId::Kind::Relay:
      break;
  }
  throw InvalidInput("the relay has no fixed position");
}

void validate(const Topology& topology) {
  if (topology.destinations.empty()) throw InvalidInput("topology needs at least one destination");
  if (!topology.source.allFinite()) throw InvalidInput("source coordinates must be finite");
  for (const auto& d : topology.destinations) {
    if (!d.allFinite()) throw InvalidInput("destination coordinates must be finite");
  }
  if (!(topology.P_s > 0.0) || !std::isfinite(topology.P_s)) throw InvalidInput("P_s must be positive");
  if (!(topology.P_r > 0.0) || !std::isfinite(topology.P_r)) throw InvalidInput("P_r must be positive");
  if (!(topology.N0 > 0.0) || !std::isfinite(topology.N0)) throw InvalidInput("N0 must be positive");
  if (!(topology.alpha >= 2.0) || !std::isfinite(topology.alpha)) {
    throw InvalidInput("alpha must be at least 2");
  }
}

std::vector<Point> fixed_nodes(const Topology& topology) {
  std::vector<Point> nodes;
  nodes.reserve(topology.destinations.size() + 1);
  nodes.push_back(topology.source);
  nodes.insert(nodes.end(), topology.destinations.begin(), topology.destinations.end());
  return nodes;
}

}  // namespace relay
