#pragma once

#include <map>
#include <utility>
#include <vector>

#include "relay/hypergraph.hpp"
#include "relay/topology.hpp"

namespace relay {

/// Smallest distance used in a capacity; closer receivers are clamped.
inline constexpr double kDistanceClamp = 1e-3;

/// Wideband hyperarc capacity f P / (D^alpha N0) in bits/s.
double hyperarc_capacity(double power, double d_far, double alpha, double N0, double f,
                         bool* clamped = nullptr);

/// Receiver farthest from the transmitter (ties go to the lowest id) and its
/// distance.
std::pair<NodeId, double> farthest_receiver(const HyperarcKey& key, const Topology& topology,
                                            const Point& relay);

struct Activation {
  enum class Mode { Hard, Soft };

  Mode mode = Mode::Hard;
  double gamma = 0.0;

  static Activation hard() { return {Mode::Hard, 0.0}; }
  static Activation soft(double gamma) { return {Mode::Soft, gamma}; }
};

/// Power per hyperarc in watts, keyed by hyperarc identity.
struct PowerAllocation {
  std::map<HyperarcKey, double> power;

  double source_total() const;
  double relay_total() const;
};

struct RateVector {
  /// Flow-carrying rate y per hyperarc (max over destinations of the
  /// destination's flow through it).
  std::map<HyperarcKey, double> arc_rate;
  /// path_rate[i][k] is the rate on the k-th path of destination i.
  std::vector<std::vector<double>> path_rate;
  std::vector<double> destination_rate;
  double R_m = 0.0;
  /// Receivers that were closer than kDistanceClamp.
  int clamped_distances = 0;
};

/// Max-min rates for a fixed allocation. Hard activations follow the exact
/// distance orderings at the relay, soft ones the switch functions. Throws
/// InfeasibleAllocation for negative powers or exceeded budgets.
RateVector evaluate_rate_lp(const Topology& topology, const Hypergraph& graph, const Point& relay,
                            const PowerAllocation& allocation, Activation activation);

struct AllocationResult {
  PowerAllocation allocation;
  RateVector rates;
  /// Hypergraph the rates refer to (path order of `rates.path_rate`).
  Hypergraph graph;
};

/// Jointly optimal powers and rates for a fixed relay over the given
/// hypergraph.
AllocationResult optimal_allocation(const Topology& topology, const Hypergraph& graph,
                                    const Point& relay, Activation activation);

/// Hyperarcs active at an exact relay position, all switches on.
Hypergraph local_hypergraph(const Topology& topology, const Point& relay);

/// Joint LP over the hyperarcs active at the relay position (hard switches).
AllocationResult optimal_allocation_fixed_relay(const Topology& topology, const Point& relay);

/// R_m only; cheaper entry point for grid searches.
double optimal_rate_fixed_relay(const Topology& topology, const Point& relay);

}  // namespace relay
