#include "relay/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "relay/errors.hpp"
#include "relay/simplex.hpp"

namespace relay {
namespace {

Point node_position(const Topology& topology, NodeId id, const Point& relay) {
  return id.is_relay() ? relay : topology.position(id);
}

// Activation factor of every arc at the relay position.
std::vector<double> activation_values(const Topology& topology, const Hypergraph& graph,
                                      const Point& relay, Activation activation) {
  std::vector<double> f(graph.arcs.size(), 0.0);
  if (activation.mode == Activation::Mode::Soft) {
    for (std::size_t a = 0; a < graph.arcs.size(); ++a) {
      f[a] = switch_value(graph.arcs[a].activation, relay, activation.gamma);
    }
    return f;
  }
  const auto keys = active_keys(topology, relay);
  const std::set<HyperarcKey> active(keys.begin(), keys.end());
  for (std::size_t a = 0; a < graph.arcs.size(); ++a) {
    f[a] = active.contains(graph.arcs[a].key) ? 1.0 : 0.0;
  }
  return f;
}

// Capacity per unit power, f / (D_far^alpha N0), with D_far measured to the
// arc's designated farthest receiver.
std::vector<double> unit_capacities(const Topology& topology, const Hypergraph& graph,
                                    const Point& relay, const std::vector<double>& f,
                                    int& clamped) {
  std::vector<double> k(graph.arcs.size(), 0.0);
  for (std::size_t a = 0; a < graph.arcs.size(); ++a) {
    if (f[a] <= 0.0) continue;
    const auto& key = graph.arcs[a].key;
    const double d = distance(node_position(topology, key.transmitter, relay),
                              node_position(topology, key.farthest, relay));
    bool c = false;
    k[a] = hyperarc_capacity(1.0, d, topology.alpha, topology.N0, f[a], &c);
    if (c) ++clamped;
  }
  return k;
}

// Shared LP skeleton over path rates and R (normalized by nu).
struct FlowLayout {
  // (destination, arc) pairs that carry at least one path, with their paths.
  struct Row {
    int destination;
    std::size_t arc;
    std::vector<Eigen::Index> path_vars;
  };
  std::vector<Row> rows;
  std::vector<std::vector<Eigen::Index>> path_var;  // [destination][k]
  Eigen::Index path_count = 0;
};

FlowLayout flow_layout(const Hypergraph& graph, Eigen::Index first_var) {
  FlowLayout layout;
  layout.path_var.resize(graph.paths.size());
  Eigen::Index next = first_var;
  for (std::size_t i = 0; i < graph.paths.size(); ++i) {
    std::vector<std::vector<Eigen::Index>> through(graph.arcs.size());
    for (const auto& path : graph.paths[i]) {
      layout.path_var[i].push_back(next);
      for (const auto leg : path.legs) through[leg].push_back(next);
      ++next;
    }
    for (std::size_t a = 0; a < graph.arcs.size(); ++a) {
      if (!through[a].empty()) layout.rows.push_back({static_cast<int>(i), a, std::move(through[a])});
    }
  }
  layout.path_count = next - first_var;
  return layout;
}

void fill_rates(const Hypergraph& graph, const FlowLayout& layout, const Eigen::VectorXd& x,
                double nu, RateVector& out) {
  const std::size_t n = graph.paths.size();
  out.path_rate.assign(n, {});
  out.destination_rate.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto v : layout.path_var[i]) {
      out.path_rate[i].push_back(nu * x(v));
      out.destination_rate[i] += nu * x(v);
    }
  }
  for (const auto& arc : graph.arcs) out.arc_rate[arc.key] = 0.0;
  for (const auto& row : layout.rows) {
    double flow = 0.0;
    for (const auto v : row.path_vars) flow += nu * x(v);
    double& y = out.arc_rate[graph.arcs[row.arc].key];
    y = std::max(y, flow);
  }
  out.R_m = n == 0 ? 0.0 : *std::min_element(out.destination_rate.begin(), out.destination_rate.end());
}

LpSolution solve_or_throw(const LinearProgram& lp) {
  LpSolution sol = solve_lp(lp);
  if (sol.status != LpSolution::Status::Optimal) {
    const char* why = sol.status == LpSolution::Status::Unbounded        ? "unbounded"
                      : sol.status == LpSolution::Status::IterationLimit ? "pivot limit"
                                                                         : "residual check failed";
    throw DegenerateProgram(std::string("rate LP did not reach an optimum (") + why + ")");
  }
  return sol;
}

}  // namespace

double hyperarc_capacity(double power, double d_far, double alpha, double N0, double f,
                         bool* clamped) {
  const bool clamp = !(d_far >= kDistanceClamp);
  if (clamped) *clamped = clamp;
  const double d = clamp ? kDistanceClamp : d_far;
  return f * power / (std::pow(d, alpha) * N0);
}

std::pair<NodeId, double> farthest_receiver(const HyperarcKey& key, const Topology& topology,
                                            const Point& relay) {
  if (key.receivers.empty()) throw InvalidInput("hyperarc without receivers");
  const Point from = node_position(topology, key.transmitter, relay);
  std::pair<NodeId, double> best{key.receivers.front(), -1.0};
  for (const auto& v : key.receivers) {
    const double d = distance(from, node_position(topology, v, relay));
    if (d > best.second) best = {v, d};
  }
  return best;
}

double PowerAllocation::source_total() const {
  double sum = 0.0;
  for (const auto& [key, p] : power) {
    if (key.transmitter == NodeId::source()) sum += p;
  }
  return sum;
}

double PowerAllocation::relay_total() const {
  double sum = 0.0;
  for (const auto& [key, p] : power) {
    if (key.transmitter == NodeId::relay()) sum += p;
  }
  return sum;
}

RateVector evaluate_rate_lp(const Topology& topology, const Hypergraph& graph, const Point& relay,
                            const PowerAllocation& allocation, Activation activation) {
  for (const auto& [key, p] : allocation.power) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InfeasibleAllocation("hyperarc power must be nonnegative");
    if (!graph.find(key)) throw InfeasibleAllocation("allocation names a hyperarc outside the hypergraph");
  }
  const double budget_tol = 1e-12;
  if (allocation.source_total() > topology.P_s * (1.0 + budget_tol)) {
    throw InfeasibleAllocation("source powers exceed P_s");
  }
  if (allocation.relay_total() > topology.P_r * (1.0 + budget_tol)) {
    throw InfeasibleAllocation("relay powers exceed P_r");
  }

  RateVector out;
  const auto f = activation_values(topology, graph, relay, activation);
  const auto unit = unit_capacities(topology, graph, relay, f, out.clamped_distances);
  std::vector<double> cap(graph.arcs.size(), 0.0);
  double nu = 0.0;
  for (std::size_t a = 0; a < graph.arcs.size(); ++a) {
    const auto it = allocation.power.find(graph.arcs[a].key);
    if (it != allocation.power.end()) cap[a] = unit[a] * it->second;
    nu = std::max(nu, cap[a]);
  }

  const FlowLayout layout = flow_layout(graph, 0);
  const Eigen::Index vars = layout.path_count + 1;
  const Eigen::Index r_var = layout.path_count;
  if (nu <= 0.0) {
    fill_rates(graph, layout, Eigen::VectorXd::Zero(vars), 0.0, out);
    return out;
  }
  const Eigen::Index m = static_cast<Eigen::Index>(layout.rows.size()) + topology.n();
  LinearProgram lp{Eigen::MatrixXd::Zero(m, vars), Eigen::VectorXd::Zero(m),
                   Eigen::VectorXd::Zero(vars)};
  Eigen::Index row = 0;
  for (const auto& r : layout.rows) {
    for (const auto v : r.path_vars) lp.A(row, v) = 1.0;
    lp.b(row) = cap[r.arc] / nu;
    ++row;
  }
  for (int i = 0; i < topology.n(); ++i, ++row) {
    lp.A(row, r_var) = 1.0;
    for (const auto v : layout.path_var[static_cast<std::size_t>(i)]) lp.A(row, v) = -1.0;
  }
  lp.c(r_var) = 1.0;
  fill_rates(graph, layout, solve_or_throw(lp).x, nu, out);
  return out;
}

AllocationResult optimal_allocation(const Topology& topology, const Hypergraph& graph,
                                    const Point& relay, Activation activation) {
  AllocationResult result;
  result.graph = graph;
  const auto f = activation_values(topology, graph, relay, activation);
  const auto unit = unit_capacities(topology, graph, relay, f, result.rates.clamped_distances);

  // Arc capacity with the whole budget of its transmitter; variables are
  // budget fractions so the LP is invariant under joint budget scaling.
  const Eigen::Index arcs = static_cast<Eigen::Index>(graph.arcs.size());
  std::vector<double> full(graph.arcs.size());
  double nu = 0.0;
  for (std::size_t a = 0; a < graph.arcs.size(); ++a) {
    full[a] = unit[a] * (graph.arcs[a].from_source() ? topology.P_s : topology.P_r);
    nu = std::max(nu, full[a]);
  }
  const FlowLayout layout = flow_layout(graph, arcs);
  const Eigen::Index vars = arcs + layout.path_count + 1;
  const Eigen::Index r_var = vars - 1;
  if (nu <= 0.0) {
    fill_rates(graph, layout, Eigen::VectorXd::Zero(vars), 0.0, result.rates);
    return result;
  }

  const Eigen::Index m = 2 + static_cast<Eigen::Index>(layout.rows.size()) + topology.n();
  LinearProgram lp{Eigen::MatrixXd::Zero(m, vars), Eigen::VectorXd::Zero(m),
                   Eigen::VectorXd::Zero(vars)};
  for (Eigen::Index a = 0; a < arcs; ++a) lp.A(graph.arcs[a].from_source() ? 0 : 1, a) = 1.0;
  lp.b(0) = 1.0;
  lp.b(1) = 1.0;
  Eigen::Index row = 2;
  for (const auto& r : layout.rows) {
    for (const auto v : r.path_vars) lp.A(row, v) = 1.0;
    lp.A(row, static_cast<Eigen::Index>(r.arc)) = -full[r.arc] / nu;
    ++row;
  }
  for (int i = 0; i < topology.n(); ++i, ++row) {
    lp.A(row, r_var) = 1.0;
    for (const auto v : layout.path_var[static_cast<std::size_t>(i)]) lp.A(row, v) = -1.0;
  }
  lp.c(r_var) = 1.0;
  const LpSolution sol = solve_or_throw(lp);

  for (Eigen::Index a = 0; a < arcs; ++a) {
    const auto& arc = graph.arcs[static_cast<std::size_t>(a)];
    const double budget = arc.from_source() ? topology.P_s : topology.P_r;
    result.allocation.power[arc.key] = std::min(1.0, sol.x(a)) * budget;
  }
  fill_rates(graph, layout, sol.x, nu, result.rates);
  return result;
}

Hypergraph local_hypergraph(const Topology& topology, const Point& relay) {
  validate(topology);
  Hypergraph graph;
  for (auto& key : active_keys(topology, relay)) graph.arcs.push_back({std::move(key), {}});
  graph.source_count = static_cast<std::size_t>(topology.n()) + 1;
  graph.paths = enumerate_paths(graph.source_arcs(), graph.relay_arcs(), topology.n());
  return graph;
}

AllocationResult optimal_allocation_fixed_relay(const Topology& topology, const Point& relay) {
  if (!relay.allFinite()) throw InvalidInput("relay coordinates must be finite");
  return optimal_allocation(topology, local_hypergraph(topology, relay), relay, Activation::hard());
}

double optimal_rate_fixed_relay(const Topology& topology, const Point& relay) {
  return optimal_allocation_fixed_relay(topology, relay).rates.R_m;
}

}  // namespace relay
