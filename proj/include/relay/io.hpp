#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "relay/geometry.hpp"
#include "relay/hypergraph.hpp"
#include "relay/planner.hpp"
#include "relay/topology.hpp"

namespace relay {

using Json = nlohmann::json;

/// Parsed topology file; solver.gamma is always resolved (never 0).
struct TopologyFile {
  Topology topology;
  SolverConfig solver;
};

/// Switch sharpness used when neither the file nor the environment sets it:
/// 100 over the median pairwise distance of the fixed nodes.
double default_gamma(const Topology& topology);

/// Median pairwise distance of the fixed nodes.
double median_distance(const Topology& topology);

/// Solver defaults with RELAY_PLANNER_{P,GAMMA,KKT_TOL,SEED,MAX_ITER} applied.
/// gamma stays 0 (meaning "derive from the topology") unless the environment
/// sets it. Malformed values throw ValidationError naming the variable.
SolverConfig solver_defaults_from_env();

/// Topology file reader. Precedence for solver fields: the file's solver
/// block, then the environment, then built-in defaults. Unknown keys,
/// non-finite numbers, an empty destination list and out-of-range values
/// throw ValidationError with the dotted field path and the 1-based
/// line/column of the offending key (or of the syntax error).
TopologyFile parse_topology(std::string_view text);
TopologyFile read_topology_file(const std::string& path);

/// Complete file with every default written out; parse_topology accepts it.
Json topology_to_json(const TopologyFile& file);

Json to_json(const Point& p);
Json to_json(const HyperarcKey& key);
Json to_json(const PlanResult& plan);
Json to_json(const CentroidComparison& comparison);
Json to_json(const RegionDecomposition& decomposition);
Json to_json(const Hypergraph& graph);

/// Cells of the relay decomposition, the source rings and the nodes.
std::string regions_svg(const Topology& topology, const RegionDecomposition& relay_regions,
                        const RegionDecomposition& source_regions);

}  // namespace relay
