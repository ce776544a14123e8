#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "relay/errors.hpp"
#include "relay/geometry.hpp"

using namespace relay;

namespace {

bool same_point(const Point& a, const Point& b) { return (a - b).norm() < 1e-12; }

Point uniform_in(const Polygon& hull, std::mt19937_64& rng) {
  double lo_x = hull[0].x(), hi_x = lo_x, lo_y = hull[0].y(), hi_y = lo_y;
  for (const auto& v : hull) {
    lo_x = std::min(lo_x, v.x());
    hi_x = std::max(hi_x, v.x());
    lo_y = std::min(lo_y, v.y());
    hi_y = std::max(hi_y, v.y());
  }
  std::uniform_real_distribution<double> ux(lo_x, hi_x), uy(lo_y, hi_y);
  while (true) {
    Point p(ux(rng), uy(rng));
    if (inside_polygon(hull, p, 0.0)) return p;
  }
}

}  // namespace

TEST_CASE("convex hull of a triangle keeps all vertices") {
  const std::vector<Point> pts{{0, 0}, {4, 0}, {2, 3}};
  const Polygon hull = convex_hull(pts);
  REQUIRE(hull.size() == 3);
  CHECK(same_point(hull[0], Point(0, 0)));
  CHECK(same_point(hull[1], Point(4, 0)));
  CHECK(same_point(hull[2], Point(2, 3)));
}

TEST_CASE("convex hull drops interior points") {
  const std::vector<Point> pts{{0, 0}, {2, 0}, {1, 0.5}, {2, 2}, {0, 2}};
  const Polygon hull = convex_hull(pts);
  CHECK(hull.size() == 4);
  CHECK(polygon_area(hull) == doctest::Approx(4.0));
}

TEST_CASE("collinear input gives a segment") {
  const std::vector<Point> pts{{0, 0}, {1, 0}, {2, 0}};
  const Polygon hull = convex_hull(pts);
  REQUIRE(hull.size() == 2);
  CHECK(same_point(hull[0], Point(0, 0)));
  CHECK(same_point(hull[1], Point(2, 0)));
}

TEST_CASE("convex hull rejects a single point") {
  const std::vector<Point> pts{{1, 1}};
  CHECK_THROWS_AS(convex_hull(pts), InvalidInput);
}

TEST_CASE("hull is idempotent") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point> pts;
    for (int i = 0; i < 12; ++i) pts.emplace_back(g(rng), g(rng));
    const Polygon once = convex_hull(pts);
    const Polygon twice = convex_hull(once);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(same_point(once[i], twice[i]));
  }
}

TEST_CASE("distance") {
  CHECK(distance(Point(0, 0), Point(3, 4)) == doctest::Approx(5.0));
  CHECK(distance(Point(1, 1), Point(1, 1)) == 0.0);
  CHECK(distance(Point(0, 0), Point(1, 1)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("perpendicular bisector examples") {
  const HalfPlane h1 = perpendicular_bisector(Point(0, 0), Point(2, 0));
  CHECK(h1.normal.x() == doctest::Approx(1.0));
  CHECK(h1.normal.y() == doctest::Approx(0.0));
  CHECK(h1.offset == doctest::Approx(1.0));

  const HalfPlane h2 = perpendicular_bisector(Point(0, 0), Point(0, 4));
  CHECK(h2.normal.y() == doctest::Approx(1.0));
  CHECK(h2.offset == doctest::Approx(2.0));

  // x + y <= 2 with a unit normal.
  const HalfPlane h3 = perpendicular_bisector(Point(0, 0), Point(2, 2));
  CHECK(h3.normal.x() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(h3.normal.y() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(h3.offset == doctest::Approx(2.0 / std::sqrt(2.0)));
  CHECK(std::abs(h3.normal.norm() - 1.0) < 1e-12);

  CHECK_THROWS_AS(perpendicular_bisector(Point(1, 1), Point(1, 1)), DegeneratePair);
}

TEST_CASE("bisector membership matches distance comparison") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const Point a(u(rng), u(rng));
    const Point b(u(rng), u(rng));
    const Point p(u(rng), u(rng));
    const HalfPlane h = perpendicular_bisector(a, b);
    if (std::abs(h.signed_distance(p)) < 1e-9) continue;
    CHECK(h.contains(p, 0.0) == (distance(p, a) <= distance(p, b)));
  }
}

TEST_CASE("two destinations split the square at x = 1") {
  const std::vector<Point> dests{{0, 0}, {2, 0}};
  const Polygon hull{{-1, -1}, {3, -1}, {3, 1}, {-1, 1}};
  const auto dec = relay_order_regions(dests, hull);
  REQUIRE(dec.size() == 2);
  std::set<std::vector<NodeId>> orders;
  for (const auto& r : dec.regions) orders.insert(r.ordering);
  CHECK(orders.contains(std::vector<NodeId>{NodeId::dest(0), NodeId::dest(1)}));
  CHECK(orders.contains(std::vector<NodeId>{NodeId::dest(1), NodeId::dest(0)}));

  const std::size_t at_origin = locate(dec, Point(0, 0));
  CHECK(dec.regions[at_origin].ordering.front() == NodeId::dest(0));
  CHECK(locate(dec, Point(1, 0.3)) == 0);
  CHECK_THROWS_AS(locate(dec, Point(5, 5)), OutOfHull);
}

TEST_CASE("collinear destinations give C(n,2)+1 cells") {
  for (int n = 2; n <= 6; ++n) {
    std::vector<Point> dests;
    // Distances 1, 2, 4, 8, ... keep every midpoint distinct.
    double x = 0.0;
    for (int i = 0; i < n; ++i) {
      dests.emplace_back(x, 0.0);
      x += std::pow(2.0, i);
    }
    std::vector<Point> nodes = dests;
    nodes.emplace_back(x / 3.0, 2.0);
    const auto dec = relay_order_regions(dests, convex_hull(nodes));
    CHECK(dec.size() == static_cast<std::size_t>(n * (n - 1) / 2 + 1));
  }
}

TEST_CASE("order regions partition the hull") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int n : {2, 3, 4, 5}) {
    std::vector<Point> dests;
    for (int i = 0; i < n; ++i) dests.emplace_back(u(rng), u(rng));
    std::vector<Point> nodes = dests;
    nodes.emplace_back(u(rng), u(rng));
    const Polygon hull = convex_hull(nodes);
    const auto dec = relay_order_regions(dests, hull);
    for (const auto& region : dec.regions) CHECK(region.cell.witness_margin() > 0.0);
    for (int s = 0; s < 2500; ++s) {
      const Point p = uniform_in(hull, rng);
      int owners = 0;
      std::size_t owner = 0;
      for (std::size_t c = 0; c < dec.size(); ++c) {
        if (dec.regions[c].cell.contains(p, 0.0)) {
          ++owners;
          owner = c;
        }
      }
      if (owners != 1) continue;  // boundary sample
      CHECK(dec.regions[owner].ordering == distance_order(p, dests));
      CHECK(locate(dec, p) == owner);
    }
  }
}

TEST_CASE("source rings") {
  const Point s(0, 0);
  SUBCASE("one destination gives a disc and its complement") {
    const std::vector<Point> dests{{4, 0}};
    const Polygon hull = convex_hull(std::vector<Point>{s, dests[0], {5, 3}});
    const auto dec = source_order_regions(s, dests, hull);
    REQUIRE(dec.size() == 2);
    CHECK(dec.regions[0].ordering == std::vector<NodeId>{NodeId::relay(), NodeId::dest(0)});
    CHECK(dec.regions[1].ordering == std::vector<NodeId>{NodeId::dest(0), NodeId::relay()});
  }
  SUBCASE("three distinct radii give four cells") {
    const std::vector<Point> dests{{1, 0}, {0, 2}, {-3, -3}};
    const Polygon hull = convex_hull(std::vector<Point>{s, dests[0], dests[1], dests[2], {6, 6}});
    const auto dec = source_order_regions(s, dests, hull);
    CHECK(dec.size() == 4);
    for (const auto& region : dec.regions) CHECK(region.cell.witness_margin() > 0.0);
  }
  SUBCASE("equidistant destinations merge their circles") {
    const std::vector<Point> dests{{3, 0}, {0, 3}, {-1, -1}};
    const Polygon hull = convex_hull(std::vector<Point>{s, dests[0], dests[1], dests[2], {5, 5}});
    const auto dec = source_order_regions(s, dests, hull);
    CHECK(dec.size() == 3);
  }
}

TEST_CASE("degenerate hulls are inflated") {
  const std::vector<Point> pts{{0, 0}, {1, 0}, {3, 0}};
  const Polygon hull = working_hull(pts, 1e-3);
  REQUIRE(hull.size() == 4);
  CHECK(polygon_area(hull) == doctest::Approx(3.0 * 2e-3));
  CHECK(inside_polygon(hull, Point(1.5, 0.0)));
}

TEST_CASE("projection onto a polygon") {
  const Polygon sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(same_point(project_onto_polygon(sq, Point(0.5, 0.5)), Point(0.5, 0.5)));
  CHECK(same_point(project_onto_polygon(sq, Point(2, 0.5)), Point(1, 0.5)));
  CHECK(same_point(project_onto_polygon(sq, Point(-1, -1)), Point(0, 0)));
  const Polygon seg{{0, 0}, {2, 0}};
  CHECK(same_point(project_onto_polygon(seg, Point(1, 3)), Point(1, 0)));
}

TEST_CASE("coincident destinations merge into one site") {
  const std::vector<Point> dests{{0, 0}, {2, 0}, {0, 0}};
  const auto merged = merge_coincident(dests);
  CHECK(merged.sites.size() == 2);
  CHECK(merged.alias == std::vector<int>{0, 1, 0});
  const Polygon hull{{-1, -1}, {3, -1}, {3, 1}, {-1, 1}};
  CHECK(relay_order_regions(dests, hull).size() == 2);
}
