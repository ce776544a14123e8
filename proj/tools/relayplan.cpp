// relayplan: command-line front end of the relay planner.
//
// Exit codes: 0 success, 1 usage, 2 invalid input, 3 solver did not reach
// its tolerance (the result is still printed).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relay/errors.hpp"
#include "relay/experiments.hpp"
#include "relay/geometry.hpp"
#include "relay/hypergraph.hpp"
#include "relay/io.hpp"
#include "relay/planner.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kInvalid = 2;
constexpr int kNotConverged = 3;

void print(const relay::Json& j) { std::cout << j.dump(2) << '\n'; }

void summarize(const relay::PlanResult& plan) {
  std::fprintf(stderr, "%s: relay (%.6g, %.6g), R_m = %.9g\n", plan.method.c_str(), plan.relay.x(),
               plan.relay.y(), plan.R_m);
  const auto& d = plan.diagnostics;
  if (plan.method == "program_c") {
    std::fprintf(stderr, "  %d/%d starts converged, best start %d, %d iterations, kkt %.3g, p %g\n",
                 d.starts_converged, d.starts, d.best_start, d.iterations, d.kkt, d.p);
  }
  for (const auto& w : d.warnings) std::fprintf(stderr, "  warning: %s\n", w.c_str());
}

int run_plan(const std::string& path, const std::string& trace_path) {
  const relay::TopologyFile f = relay::read_topology_file(path);
  relay::SolverConfig config = f.solver;
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw relay::ValidationError("--trace", "cannot write " + trace_path);
    trace << "start,iteration,mu,objective,kkt\n";
    config.trace = &trace;
  }
  const relay::PlanResult plan = relay::solve_program_C(f.topology, config);
  print(relay::to_json(plan));
  summarize(plan);
  return plan.diagnostics.converged ? 0 : kNotConverged;
}

int run_oracle(const std::string& path, int resolution) {
  const relay::TopologyFile f = relay::read_topology_file(path);
  const relay::PlanResult plan = relay::grid_oracle(f.topology, resolution);
  print(relay::to_json(plan));
  summarize(plan);
  return 0;
}

int run_regions(const std::string& path, const std::string& svg_path) {
  const relay::TopologyFile f = relay::read_topology_file(path);
  relay::Topology t = f.topology;
  const relay::MergedSites merged = relay::merge_coincident(t.destinations);
  if (merged.has_duplicates()) {
    std::fprintf(stderr, "warning: coincident destinations merged\n");
    t.destinations = merged.sites;
  }
  const relay::Polygon hull = relay::working_hull(relay::fixed_nodes(t), f.solver.hull_margin);
  const relay::RegionDecomposition rel = relay::relay_order_regions(t.destinations, hull);
  const relay::RegionDecomposition src = relay::source_order_regions(t.source, t.destinations, hull);
  const relay::Hypergraph graph = relay::build_hypergraph(t, f.solver.hull_margin);
  print({{"relay_regions", relay::to_json(rel)},
         {"source_regions", relay::to_json(src)},
         {"hypergraph", relay::to_json(graph)}});
  if (!svg_path.empty()) {
    std::ofstream out(svg_path);
    if (!out) throw relay::ValidationError("--svg", "cannot write " + svg_path);
    out << relay::regions_svg(t, rel, src);
  }
  std::fprintf(stderr, "%zu relay cells, %zu source regions, %zu source arcs, %zu relay arcs\n", rel.size(),
               src.size(), graph.source_count, graph.arcs.size() - graph.source_count);
  return 0;
}

int run_compare(const std::string& path, int resolution) {
  const relay::TopologyFile f = relay::read_topology_file(path);
  const relay::CentroidComparison c = relay::compare_centroid(f.topology, f.solver, resolution);
  print(relay::to_json(c));
  std::fprintf(stderr, "R_opt %.9g, R_centroid %.9g, relative gain %.4g\n", c.R_opt, c.R_centroid,
               c.relative_gain);
  return c.plan.diagnostics.converged ? 0 : kNotConverged;
}

int run_bench(const std::vector<double>& areas, int trials, std::uint64_t seed, int resolution) {
  relay::BenchOptions o;
  o.trials = trials;
  o.seed = seed;
  o.oracle_resolution = resolution;
  o.solver = relay::solver_defaults_from_env();
  const auto rows = relay::bench_random_triangles(areas, o);
  relay::write_csv(std::cout, rows);
  const auto medians = relay::median_gains(rows, areas);
  for (std::size_t i = 0; i < areas.size(); ++i) {
    std::fprintf(stderr, "area %-10g median gain %.6g\n", areas[i], medians[i]);
  }
  if (areas.size() >= 2) std::fprintf(stderr, "spearman(area, median gain) = %.4g\n", relay::spearman(areas, medians));
  int below = 0;
  for (const auto& r : rows) below += r.oracle_ok ? 0 : 1;
  if (below > 0) std::fprintf(stderr, "warning: %d rows below 95%% of the oracle\n", below);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relay position and power planning for the wideband broadcast relay channel"};
  app.require_subcommand(1);

  std::string file, trace, svg;
  int resolution = 200, centroid_resolution = 100, bench_resolution = 100, trials = 20;
  std::uint64_t seed = 0;
  std::vector<double> areas;

  auto* plan = app.add_subcommand("plan", "Plan relay position and powers");
  plan->add_option("file", file, "Topology JSON")->required();
  plan->add_option("--trace", trace, "Write per-iteration solver trace CSV");

  auto* oracle = app.add_subcommand("oracle", "Grid search with the exact fixed-relay LP");
  oracle->add_option("file", file, "Topology JSON")->required();
  oracle->add_option("--resolution", resolution, "Grid points per axis")->check(CLI::Range(2, 100000));

  auto* regions = app.add_subcommand("regions", "Distance-order regions and hyperarcs");
  regions->add_option("file", file, "Topology JSON")->required();
  regions->add_option("--svg", svg, "Write an SVG drawing of the regions");

  auto* compare = app.add_subcommand("compare-centroid", "Planned relay against the hull centroid");
  compare->add_option("file", file, "Topology JSON")->required();
  compare->add_option("--resolution", centroid_resolution, "Oracle grid for the cross-check")
      ->check(CLI::Range(2, 100000));

  auto* bench = app.add_subcommand("bench", "Centroid gain over random triangles (CSV)");
  bench->add_option("--areas", areas, "Ascending triangle areas")->delimiter(',')->required();
  bench->add_option("--trials", trials, "Triangles per area")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "Random seed");
  bench->add_option("--resolution", bench_resolution, "Oracle grid for the cross-check")
      ->check(CLI::Range(2, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*plan) return run_plan(file, trace);
    if (*oracle) return run_oracle(file, resolution);
    if (*regions) return run_regions(file, svg);
    if (*compare) return run_compare(file, centroid_resolution);
    if (*bench) return run_bench(areas, trials, seed, bench_resolution);
  } catch (const relay::ValidationError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kInvalid;
  } catch (const relay::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInvalid;
  }
  return kUsage;
}
