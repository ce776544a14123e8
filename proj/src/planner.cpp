#include "relay/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "relay/errors.hpp"
#include "relay/geometry.hpp"
#include "relay/hypergraph.hpp"
#include "relay/program_c.hpp"

namespace relay {
namespace {

struct Reduced {
  Topology topology;
  MergedSites merged;
};

Reduced reduce(const Topology& topology) {
  validate(topology);
  Reduced r{topology, merge_coincident(topology.destinations)};
  r.topology.destinations = r.merged.sites;
  return r;
}

NodeId lift(NodeId id, const MergedSites& merged) {
  if (!id.is_dest()) return id;
  for (std::size_t i = 0; i < merged.alias.size(); ++i) {
    if (merged.alias[i] == id.index) return NodeId::dest(static_cast<int>(i));
  }
  return id;
}

// Rewrites reduced destination ids in terms of the original destinations.
void lift_result(const Reduced& r, const AllocationResult& alloc, PlanResult& out) {
  out.allocation.power.clear();
  for (const auto& [key, p] : alloc.allocation.power) {
    HyperarcKey k{key.transmitter, {}, lift(key.farthest, r.merged)};
    for (const auto& v : key.receivers) {
      if (!v.is_dest()) {
        k.receivers.push_back(v);
        continue;
      }
      for (std::size_t i = 0; i < r.merged.alias.size(); ++i) {
        if (r.merged.alias[i] == v.index) k.receivers.push_back(NodeId::dest(static_cast<int>(i)));
      }
    }
    std::sort(k.receivers.begin(), k.receivers.end());
    out.allocation.power[k] = p;
  }
  out.destination_rates.clear();
  for (const int site : r.merged.alias) {
    out.destination_rates.push_back(alloc.rates.destination_rate[static_cast<std::size_t>(site)]);
  }
  out.R_m = alloc.rates.R_m;
  out.diagnostics.clamped_distances = alloc.rates.clamped_distances;
  if (r.merged.has_duplicates()) out.diagnostics.warnings.push_back("coincident destinations merged");
}

bool lex_less(const Point& a, const Point& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

// Strictly better rate, or equal rate at a lexicographically smaller point.
bool better(double rate, const Point& p, double best_rate, const Point& best) {
  if (rate > best_rate) return true;
  return rate == best_rate && lex_less(p, best);
}

ProgramOptions program_options(const SolverConfig& config) {
  return {config.gamma, config.p, config.penalty, config.hull_margin};
}

SingleStart run_start(const ProgramC& program, const SolverConfig& config, const Point& start,
                      int start_index) {
  BarrierOptions options;
  options.mu0 = config.mu0;
  options.mu_factor = config.mu_factor;
  options.kkt_tol = config.kkt_tol;
  options.max_iter = config.max_iter;
  options.on_stage = [&program](BarrierProblem& problem, const Eigen::VectorXd& v) {
    refresh_objective(program, problem, v);
  };
  if (config.trace) {
    options.on_iteration = [&config, start_index](int it, double mu, double f, double kkt) {
      *config.trace << start_index << ',' << it << ',' << mu << ',' << f << ',' << kkt << '\n';
    };
  }
  // Linearize the objective at the start so the start is strictly feasible.
  const Eigen::VectorXd v0 = feasible_start(program, start);
  BarrierProblem problem = program.problem;
  refresh_objective(program, problem, v0);
  const BarrierResult res = solve_barrier(std::move(problem), v0, options);
  SingleStart out;
  out.relay = relay_of(program, res.v);
  const auto rates = program_rates(program, res.v);
  out.program_rate = *std::min_element(rates.begin(), rates.end());
  out.distance_violation = distance_violation(program, res.v);
  out.iterations = res.iterations;
  out.kkt = res.kkt;
  out.converged = res.converged;
  return out;
}

struct Polished {
  Point relay;
  double rate;
  int evaluations;
};

// Compass search over 8 directions on the exact fixed-relay rate, points kept
// in the hull by projection. The step halves whenever no direction improves.
Polished polish(const Topology& topology, const Polygon& hull, const Point& start, double scale) {
  Polished out{start, optimal_rate_fixed_relay(topology, start), 1};
  const double dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  double step = 0.05 * scale;
  const double min_step = 1e-6 * scale;
  while (step >= min_step) {
    bool moved = false;
    for (const auto& d : dirs) {
      const Point q = project_onto_polygon(hull, out.relay + step * Point(d[0], d[1]).normalized());
      if (distance(q, out.relay) <= 0.25 * step) continue;
      const double rate = optimal_rate_fixed_relay(topology, q);
      ++out.evaluations;
      if (rate > out.rate * (1.0 + 1e-12)) {
        out.relay = q;
        out.rate = rate;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  return out;
}

std::vector<Point> start_points(const Topology& topology, const ProgramC& program,
                                const SolverConfig& config) {
  const Polygon world_hull = [&] {
    Polygon h;
    for (const auto& v : program.hull) h.push_back(program.to_world(v));
    return h;
  }();
  std::vector<Point> starts{polygon_centroid(world_hull)};
  for (const auto& region : relay_order_regions(topology.destinations, world_hull).regions) {
    starts.push_back(region.cell.witness);
  }
  for (const auto& region :
       source_order_regions(topology.source, topology.destinations, world_hull).regions) {
    starts.push_back(region.cell.witness);
  }
  if (config.random_starts > 0) {
    std::mt19937_64 rng(config.seed);
    std::vector<double> areas;
    for (std::size_t i = 1; i + 1 < world_hull.size(); ++i) {
      areas.push_back(polygon_area({world_hull[0], world_hull[i], world_hull[i + 1]}));
    }
    std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
    const auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int k = 0; k < config.random_starts; ++k) {
      const std::size_t i = pick(rng) + 1;
      double a = unit(), b = unit();
      if (a + b >= 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
      }
      // Keep clear of the boundary.
      a = 0.01 + 0.98 * a;
      b = 0.01 + 0.98 * b * (1.0 - a) / std::max(1e-12, 1.0 - a);
      starts.push_back(world_hull[0] + a * (world_hull[i] - world_hull[0]) +
                       b * (world_hull[i + 1] - world_hull[0]) * 0.98);
    }
  }
  std::vector<Point> unique;
  for (const auto& p : starts) {
    if (!inside_polygon(program.hull, program.to_scaled(p), -1e-12)) continue;
    const bool dup = std::any_of(unique.begin(), unique.end(), [&](const Point& q) {
      return distance(p, q) <= 1e-9 * program.scale;
    });
    if (!dup) unique.push_back(p);
  }
  return unique;
}

}  // namespace

void validate(const SolverConfig& config) {
  if (!(config.gamma > 0.0) || !std::isfinite(config.gamma)) throw InvalidInput("gamma must be positive");
  if (!(config.p >= 1.0) || !std::isfinite(config.p)) throw InvalidInput("p must be at least 1");
  if (!(config.kkt_tol > 0.0)) throw InvalidInput("kkt_tol must be positive");
  if (config.max_iter < 1) throw InvalidInput("max_iter must be positive");
  if (!(config.mu0 > 0.0)) throw InvalidInput("mu0 must be positive");
  if (!(config.mu_factor > 0.0 && config.mu_factor < 1.0)) throw InvalidInput("mu_factor must lie in (0, 1)");
  if (!(config.penalty > 0.0)) throw InvalidInput("penalty must be positive");
  if (!(config.hull_margin > 0.0)) throw InvalidInput("hull_margin must be positive");
  if (config.random_starts < 0) throw InvalidInput("random_starts must be nonnegative");
}

SingleStart solve_from(const Topology& topology, const SolverConfig& config, const Point& start) {
  validate(config);
  const Reduced r = reduce(topology);
  const ProgramC program = assemble_program_C(r.topology, build_hypergraph(r.topology), program_options(config));
  return run_start(program, config, start, 0);
}

PlanResult solve_program_C(const Topology& topology, const SolverConfig& config) {
  validate(config);
  const Reduced r = reduce(topology);
  const ProgramC program =
      assemble_program_C(r.topology, build_hypergraph(r.topology), program_options(config));
  const Polygon true_hull = convex_hull(fixed_nodes(r.topology).size() >= 2
                                            ? fixed_nodes(r.topology)
                                            : std::vector<Point>{r.topology.source, r.topology.source});

  PlanResult out;
  out.method = "program_c";
  out.diagnostics.p = config.p;
  out.diagnostics.gamma = config.gamma;
  out.diagnostics.repair_applied = true;

  const auto starts = start_points(r.topology, program, config);
  out.diagnostics.starts = static_cast<int>(starts.size());
  double best_rate = -1.0;
  Point best_relay = Point::Zero();
  Point best_repaired = Point::Zero();
  SingleStart best_run;
  int converged_starts = 0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const SingleStart run = run_start(program, config, starts[s], static_cast<int>(s));
    out.diagnostics.iterations += run.iterations;
    if (run.converged) ++converged_starts;
    const Point repaired = project_onto_polygon(true_hull, run.relay);
    Polished polished{repaired, optimal_rate_fixed_relay(r.topology, repaired), 1};
    const double repaired_rate = polished.rate;
    if (config.polish) polished = polish(r.topology, true_hull, repaired, program.scale);
    out.diagnostics.polish_evaluations += polished.evaluations;
    if (better(polished.rate, polished.relay, best_rate, best_relay)) {
      best_rate = polished.rate;
      best_relay = polished.relay;
      best_run = run;
      best_repaired = repaired;
      out.diagnostics.repaired_rate = repaired_rate;
      out.diagnostics.best_start = static_cast<int>(s);
    }
  }
  const AllocationResult best_alloc = optimal_allocation_fixed_relay(r.topology, best_relay);
  out.relay = best_relay;
  out.diagnostics.kkt = best_run.kkt;
  out.diagnostics.converged = best_run.converged;
  out.diagnostics.starts_converged = converged_starts;
  out.diagnostics.program_rate = best_run.program_rate;
  out.diagnostics.distance_violation = best_run.distance_violation;
  out.diagnostics.projected = distance(best_run.relay, best_repaired) > kGeomTol * std::max(1.0, program.scale);
  lift_result(r, best_alloc, out);
  if (!best_run.converged) out.diagnostics.warnings.push_back("best start did not reach the KKT tolerance");
  return out;
}

PlanResult grid_oracle(const Topology& topology, int resolution) {
  if (resolution < 2) throw InvalidInput("oracle resolution must be at least 2");
  const Reduced r = reduce(topology);
  const std::vector<Point> nodes = fixed_nodes(r.topology);
  const Polygon hull = convex_hull(nodes);

  std::vector<Point> candidates(hull.begin(), hull.end());
  if (hull.size() >= 3) {
    Eigen::Vector2d lo = hull[0], hi = hull[0];
    for (const auto& v : hull) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    const double tol = 1e-12 * std::max(1.0, (hi - lo).norm());
    for (int i = 0; i <= resolution; ++i) {
      for (int j = 0; j <= resolution; ++j) {
        const Point p(lo.x() + (hi.x() - lo.x()) * i / resolution, lo.y() + (hi.y() - lo.y()) * j / resolution);
        if (inside_polygon(hull, p, tol)) candidates.push_back(p);
      }
    }
    for (const auto& region : relay_order_regions(r.topology.destinations, hull).regions) {
      candidates.push_back(region.cell.witness);
    }
    for (const auto& region : source_order_regions(r.topology.source, r.topology.destinations, hull).regions) {
      candidates.push_back(region.cell.witness);
    }
  } else if (hull.size() == 2) {
    for (int i = 0; i <= resolution; ++i) {
      candidates.push_back(hull[0] + (hull[1] - hull[0]) * (static_cast<double>(i) / resolution));
    }
  }

  double best_rate = -1.0;
  Point best = candidates.front();
  for (const auto& p : candidates) {
    const double rate = optimal_rate_fixed_relay(r.topology, p);
    if (better(rate, p, best_rate, best)) {
      best_rate = rate;
      best = p;
    }
  }
  PlanResult out;
  out.method = "grid";
  out.relay = best;
  out.diagnostics.converged = true;
  out.diagnostics.starts = static_cast<int>(candidates.size());
  lift_result(r, optimal_allocation_fixed_relay(r.topology, best), out);
  return out;
}

CentroidComparison compare_centroid(const Topology& topology, const SolverConfig& config,
                                    int resolution) {
  validate(topology);
  CentroidComparison out;
  const Polygon hull = convex_hull(fixed_nodes(topology));
  out.centroid = polygon_centroid(hull);
  out.R_centroid = optimal_rate_fixed_relay(topology, out.centroid);
  out.plan = solve_program_C(topology, config);
  out.R_oracle = grid_oracle(topology, resolution).R_m;
  out.R_opt = std::max({out.plan.R_m, out.R_oracle, out.R_centroid});
  out.relative_gain = out.R_centroid > 0.0 ? (out.R_opt - out.R_centroid) / out.R_centroid
                                           : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace relay
