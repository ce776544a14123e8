#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "relay/rate_model.hpp"
#include "relay/topology.hpp"

namespace relay {

struct SolverConfig {
  double gamma = 0.0;  // switch sharpness in 1/m; must be set (see io defaults)
  double p = 5.0;
  double kkt_tol = 1e-7;
  int max_iter = 500;  // Newton iterations per start
  double mu0 = 1.0;
  double mu_factor = 0.2;
  double penalty = 100.0;
  double hull_margin = 1e-3;  // relative inflation of zero-area hulls
  /// Extra uniformly drawn starts besides the centroid and region witnesses.
  int random_starts = 0;
  /// Compass search on the exact fixed-relay rate after the repair.
  bool polish = true;
  std::uint64_t seed = 0;
  /// Per-iteration CSV trace (start,iteration,mu,objective,kkt) when set.
  std::ostream* trace = nullptr;
};

/// Throws InvalidInput when a field is out of range.
void validate(const SolverConfig& config);

struct PlanDiagnostics {
  int iterations = 0;
  double kkt = 0.0;
  double p = 0.0;
  double gamma = 0.0;
  bool repair_applied = false;
  bool converged = false;
  int starts = 0;
  int starts_converged = 0;
  int best_start = -1;
  /// Multicast rate implied by the program's own path rates (before repair).
  double program_rate = 0.0;
  /// max_u |exp(D'_u) - D_u| in meters before repair.
  double distance_violation = 0.0;
  bool projected = false;
  /// Exact rate at the repaired relay before the polish.
  double repaired_rate = 0.0;
  int polish_evaluations = 0;
  int clamped_distances = 0;
  std::vector<std::string> warnings;
};

struct PlanResult {
  std::string method;
  Point relay = Point::Zero();
  PowerAllocation allocation;
  double R_m = 0.0;
  std::vector<double> destination_rates;
  PlanDiagnostics diagnostics;
};

/// Smooth log-domain program solved from several starts, then the LP repair
/// at each relay and an optional compass search on the exact rate. The best
/// repaired relay wins. Non-convergence is reported in diagnostics, not thrown.
PlanResult solve_program_C(const Topology& topology, const SolverConfig& config);

/// Runs the smooth program from one world-coordinate start, no repair.
/// Exposed for diagnostics and tests.
struct SingleStart {
  Point relay = Point::Zero();
  double program_rate = 0.0;
  double distance_violation = 0.0;
  int iterations = 0;
  double kkt = 0.0;
  bool converged = false;
};
SingleStart solve_from(const Topology& topology, const SolverConfig& config, const Point& start);

/// Exhaustive fixed-relay LP over the hull: grid points i/resolution along
/// each axis of the bounding box that lie in the hull, region witnesses and
/// hull vertices. Argmax with ties broken by lexicographic position.
PlanResult grid_oracle(const Topology& topology, int resolution);

struct CentroidComparison {
  double R_opt = 0.0;
  double R_centroid = 0.0;
  double relative_gain = 0.0;  // +inf when R_centroid == 0
  Point centroid = Point::Zero();
  PlanResult plan;
  double R_oracle = 0.0;
};

/// Relay at the hull centroid (powers optimized) against the planned relay.
/// R_opt is the best of the solver, the oracle at `resolution` and the
/// centroid itself.
CentroidComparison compare_centroid(const Topology& topology, const SolverConfig& config,
                                    int resolution);

}  // namespace relay
