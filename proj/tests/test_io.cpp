#include <cstdlib>
#include <string>

#include "doctest.h"
#include "relay/errors.hpp"
#include "relay/io.hpp"

using namespace relay;

namespace {

const char* kMinimal = R"({
  "source": {"x": 0, "y": 0},
  "destinations": [{"x": 10, "y": 0}]
})";

ValidationError expect_error(const std::string& text) {
  try {
    parse_topology(text);
  } catch (const ValidationError& e) {
    return e;
  }
  FAIL("no ValidationError for: " << text);
  return ValidationError("", "");
}

}  // namespace

TEST_CASE("minimal file gets defaults") {
  const TopologyFile f = parse_topology(kMinimal);
  CHECK(f.topology.n() == 1);
  CHECK(f.topology.P_s == 1.0);
  CHECK(f.topology.P_r == 1.0);
  CHECK(f.topology.N0 == 1.0);
  CHECK(f.topology.alpha == 2.0);
  CHECK(f.solver.p == 5.0);
  CHECK(f.solver.kkt_tol == 1e-7);
  CHECK(f.solver.gamma == doctest::Approx(10.0));  // 100 / median distance 10
}

TEST_CASE("median distance and default gamma") {
  Topology t;
  t.destinations = {{3, 0}, {0, 4}};  // distances 3, 4, 5
  CHECK(median_distance(t) == 4.0);
  t.destinations.push_back({3, 4});  // adds 5, 4, 3: sorted 3 3 4 4 5 5
  CHECK(median_distance(t) == 4.0);
  CHECK(default_gamma(t) == 25.0);
}

TEST_CASE("solver block overrides defaults") {
  const TopologyFile f = parse_topology(R"({"source": {"x": 0, "y": 0}, "destinations": [{"x": 4, "y": 1}],
    "solver": {"gamma": 3.5, "p": 8, "kkt_tol": 1e-6, "seed": 42}})");
  CHECK(f.solver.gamma == 3.5);
  CHECK(f.solver.p == 8.0);
  CHECK(f.solver.kkt_tol == 1e-6);
  CHECK(f.solver.seed == 42);
}

TEST_CASE("validation errors name the field and its position") {
  const ValidationError neg = expect_error(R"({
  "source": {"x": 0, "y": 0},
  "destinations": [{"x": 10, "y": 0}],
  "P_s": -1
})");
  CHECK(neg.field() == "P_s");
  CHECK(neg.line() == 4);
  CHECK(neg.column() == 3);
  CHECK(std::string(neg.what()).find("P_s") != std::string::npos);

  const ValidationError unknown = expect_error(R"({"source": {"x": 0, "y": 0}, "destinations": [{"x": 1, "y": 0}], "Ps": 1})");
  CHECK(unknown.field() == "Ps");
  CHECK(unknown.line() == 1);
  CHECK(unknown.column() == 66);

  const ValidationError nested = expect_error(R"({"source": {"x": 0, "y": 0},
 "destinations": [{"x": 1, "y": 0}, {"x": 2, "z": 0}]})");
  CHECK(nested.field() == "destinations[1].z");
  CHECK(nested.line() == 2);

  CHECK(expect_error(R"({"source": {"x": 0, "y": 0}, "destinations": []})").field() == "destinations");
  CHECK(expect_error(R"({"destinations": [{"x": 1, "y": 0}]})").field() == "source");
  CHECK(expect_error(R"({"source": {"x": 0, "y": "1"}, "destinations": [{"x": 1, "y": 0}]})").field() == "source.y");
  CHECK(std::string(expect_error(R"({"source": {"x": 0, "y": 0}, "destinations": [{"x": 1, "y": 1e999}]})").what())
            .find("finite") != std::string::npos);
  CHECK(expect_error(R"({"source": {"x": 0, "y": 0}, "destinations": [{"x": 1, "y": 0}], "alpha": 1.5})").field() ==
        "alpha");
  CHECK(expect_error(R"({"source": {"x": 0, "y": 0}, "destinations": [{"x": 1, "y": 0}], "solver": {"p": 0.5}})")
            .field() == "solver.p");
  CHECK(expect_error(R"({"source": {"x": 0, "y": 0}, "destinations": [{"x": 1, "y": 0}], "solver": {"seed": -3}})")
            .field() == "solver.seed");
  CHECK(expect_error(R"({"source": {"x": 0, "y": 0}, "destinations": [{"x": 1, "y": 0}], "solver": {"mu": 1}})")
            .field() == "solver.mu");
}

TEST_CASE("syntax errors carry line and column") {
  const ValidationError e = expect_error("{\n  \"source\": {\"x\": 0, \"y\": 0},\n  \"destinations\": [,]\n}");
  CHECK(e.line() == 3);
  CHECK(e.column() == 20);
}

TEST_CASE("duplicate destinations are accepted") {
  const TopologyFile f = parse_topology(
      R"({"source": {"x": 0, "y": 0}, "destinations": [{"x": 5, "y": 1}, {"x": 5, "y": 1}]})");
  CHECK(f.topology.n() == 2);
}

TEST_CASE("round trip is field-order independent") {
  const std::string text = R"({"alpha": 3, "destinations": [{"y": 2, "x": 7.25}, {"x": -1e-3, "y": 0.1}],
    "solver": {"seed": 9, "p": 4}, "N0": 0.5, "P_r": 2, "source": {"y": 0.3, "x": 1}})";
  const TopologyFile a = parse_topology(text);
  const Json written = topology_to_json(a);
  const TopologyFile b = parse_topology(written.dump(2));
  CHECK(topology_to_json(b) == written);
  CHECK(b.topology.destinations[1] == a.topology.destinations[1]);
  CHECK(b.solver.gamma == a.solver.gamma);
  CHECK(b.topology.alpha == 3.0);
  CHECK(b.topology.P_s == 1.0);
}

TEST_CASE("environment overrides sit below the file") {
  setenv("RELAY_PLANNER_P", "4", 1);
  setenv("RELAY_PLANNER_SEED", "17", 1);
  TopologyFile f = parse_topology(kMinimal);
  CHECK(f.solver.p == 4.0);
  CHECK(f.solver.seed == 17);
  f = parse_topology(R"({"source": {"x": 0, "y": 0}, "destinations": [{"x": 10, "y": 0}], "solver": {"p": 2}})");
  CHECK(f.solver.p == 2.0);
  setenv("RELAY_PLANNER_P", "many", 1);
  CHECK_THROWS_AS(parse_topology(kMinimal), ValidationError);
  unsetenv("RELAY_PLANNER_P");
  unsetenv("RELAY_PLANNER_SEED");
}

TEST_CASE("result serialization") {
  const TopologyFile f = parse_topology(R"({"source": {"x": 0, "y": 0}, "destinations": [{"x": 8, "y": 3}, {"x": 6, "y": -5}]})");
  const PlanResult oracle = grid_oracle(f.topology, 10);
  const Json j = to_json(oracle);
  CHECK(j["method"] == "grid");
  CHECK(j["R_m"].get<double>() == oracle.R_m);
  CHECK(j["destination_rates"].size() == 2);
  double total = 0.0;
  for (const auto& a : j["allocation"]) total += a["power"].get<double>();
  CHECK(total <= 2.0 + 1e-12);
  CHECK(j.dump() == to_json(grid_oracle(f.topology, 10)).dump());  // deterministic bytes

  const Hypergraph g = build_hypergraph(f.topology);
  const Json hg = to_json(g);
  CHECK(hg["arcs"].size() == g.arcs.size());
  CHECK(hg["source_arcs"].get<std::size_t>() == g.source_count);

  const Polygon hull = working_hull(fixed_nodes(f.topology));
  const RegionDecomposition rel = relay_order_regions(f.topology.destinations, hull);
  const RegionDecomposition src = source_order_regions(f.topology.source, f.topology.destinations, hull);
  const Json rj = to_json(rel);
  CHECK(rj["regions"].size() == rel.size());
  CHECK(rj["reference"] == "r");
  CHECK(to_json(src)["regions"][0].contains("radial"));
  const std::string svg = regions_svg(f.topology, rel, src);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<circle") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
