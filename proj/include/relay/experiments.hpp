#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "relay/planner.hpp"

namespace relay {

struct BenchRow {
  double area = 0.0;
  double R_opt = 0.0;
  double R_centroid = 0.0;
  double gain = 0.0;
  /// Planned rate reaches 95% of the resolution-100 oracle.
  bool oracle_ok = true;
};

struct BenchOptions {
  int trials = 20;
  std::uint64_t seed = 0;
  int oracle_resolution = 100;
  /// Overrides the default p and KKT tolerance; gamma is derived per topology.
  SolverConfig solver;
};

/// Random n = 2 topologies with P_s = P_r = N0 = 1 and alpha = 2. The shape is
/// three vertices uniform in the unit square (rejected while the triangle
/// area is below 0.01), then scaled about its centroid to the target area.
/// Areas must be positive and ascending.
std::vector<BenchRow> bench_random_triangles(const std::vector<double>& areas, const BenchOptions& options);

/// Median gain per area, in the order of `areas`.
std::vector<double> median_gains(const std::vector<BenchRow>& rows, const std::vector<double>& areas);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Header plus one line per row, 17 significant digits.
void write_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace relay
