#pragma once

#include <cstddef>
#include <vector>

#include "relay/barrier.hpp"
#include "relay/geometry.hpp"
#include "relay/hypergraph.hpp"
#include "relay/topology.hpp"

namespace relay {

/// Parameters that shape the transformed program.
struct ProgramOptions {
  double gamma = 0.0;          // switch sharpness, 1/m
  double p = 5.0;              // surrogate exponent
  double penalty = 100.0;      // weight of the distance surrogate blocks
  double hull_margin = 1e-3;   // inflation of zero-area hulls, in units of the scale
};

/// Constraint families of the log-domain program.
enum class Family {
  Rate,
  SwitchProduct,
  Sigmoid,
  ZLink,
  Farthest,
  DistanceFloor,
  Hull,
  Budget,
  Bound,
  ObjectiveBound
};

struct ConstraintCounts {
  int rate = 0;
  int switch_product = 0;
  int sigmoid = 0;
  int z_link = 0;
  int farthest = 0;
  int distance_floor = 0;
  int hull = 0;
  int budget = 0;
  int bound = 0;  // box bounds on log variables
  int objective_bound = 0;
  int norm_blocks = 0;
};

/// Log-domain relay program over a fixed hypergraph. Coordinates are shifted
/// to the source and divided by `scale`; every variable index below refers to
/// `problem`.
struct ProgramC {
  struct NodeVars {
    NodeId node;
    Point position;  // scaled
    Eigen::Index d = 0;
  };
  /// Distance operand of a switch term: a relay distance (node >= 0) or a
  /// constant (scaled meters).
  struct Operand {
    int node = -1;
    double constant = 0.0;
  };
  struct Term {
    Operand plus;
    Operand minus;
    Eigen::Index f = 0, z = 0;
  };
  /// Capacity-sharing hyperarcs with the same transmitter and receiver set.
  struct Group {
    NodeId transmitter;
    std::vector<NodeId> receivers;
    Eigen::Index P = 0, M = 0;
    Eigen::Index f = -1;  // -1 when always on
    std::vector<Term> terms;
    /// Farthest-receiver candidates: relay distances and constant log radii.
    std::vector<int> member_nodes;
    std::vector<double> member_logs;
  };
  struct PathVars {
    int destination = 0;
    std::vector<int> groups;
    Eigen::Index r = 0;
  };

  BarrierProblem problem;
  std::vector<Family> family;  // parallel to problem.constraints
  ConstraintCounts counts;

  Point origin = Point::Zero();
  double scale = 1.0;
  double gamma = 0.0;  // scaled sharpness
  double log_noise = 0.0;
  double alpha = 2.0;
  double P_s = 1.0, P_r = 1.0;
  Polygon hull;  // scaled working hull
  bool degenerate_hull = false;

  Eigen::Index x = 0, y = 1, t = 0;
  std::vector<NodeVars> nodes;  // source first, then destinations
  std::vector<Group> groups;
  std::vector<PathVars> paths;
  std::vector<std::size_t> objective_rows;  // per destination

  int n() const { return static_cast<int>(nodes.size()) - 1; }
  Point to_scaled(const Point& p) const { return (p - origin) / scale; }
  Point to_world(const Point& p) const { return origin + scale * p; }
};

/// Builds the log-domain program. Throws DegenerateProgram when some
/// destination has no path, InvalidInput for a nonpositive gamma or p < 1.
ProgramC assemble_program_C(const Topology& topology, const Hypergraph& graph,
                            const ProgramOptions& options);

/// Strictly feasible point with the relay at `relay` (world coordinates,
/// strictly inside the working hull).
Eigen::VectorXd feasible_start(const ProgramC& program, const Point& relay);

/// Resets the per-destination linearization weights to the softmax of the
/// current path-rate logs.
void refresh_objective(ProgramC& program, const Eigen::VectorXd& v);
void refresh_objective(const ProgramC& program, BarrierProblem& problem, const Eigen::VectorXd& v);

/// Image of an untransformed point: true distances and switch values, the
/// given group powers (W) and path rates (bits/s), all positive.
Eigen::VectorXd transformed_point(const ProgramC& program, const Point& relay,
                                  const std::vector<double>& group_power,
                                  const std::vector<double>& path_rate);

Point relay_of(const ProgramC& program, const Eigen::VectorXd& v);

/// max_u |exp(D'_u) - |relay - u||, in meters.
double distance_violation(const ProgramC& program, const Eigen::VectorXd& v);

/// Per-destination sum of exp(r') (the program's own rate estimate).
std::vector<double> program_rates(const ProgramC& program, const Eigen::VectorXd& v);

}  // namespace relay
