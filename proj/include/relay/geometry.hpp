#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "relay/topology.hpp"

namespace relay {

/// Tolerance (meters) used by every geometric predicate.
inline constexpr double kGeomTol = 1e-9;

/// Default thickness used to inflate zero-area hulls.
inline constexpr double kDefaultHullMargin = 1e-6;

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar distance(const Eigen::MatrixBase<DerivedA>& p,
                                   const Eigen::MatrixBase<DerivedB>& q) {
  return (p - q).norm();
}

/// Closed half-plane {p : normal . p <= offset} with a unit normal.
struct HalfPlane {
  Eigen::Vector2d normal = Eigen::Vector2d::UnitX();
  double offset = 0.0;

  double signed_distance(const Point& p) const { return normal.dot(p) - offset; }
  bool contains(const Point& p, double tol = kGeomTol) const { return signed_distance(p) <= tol; }
  HalfPlane flipped() const { return {-normal, -offset}; }
};

/// CCW vertex list. Two vertices encode a segment, one a point.
using Polygon = std::vector<Point>;

/// Annulus r_lo <= |p - center| <= r_hi around a fixed center.
struct RadialBound {
  Point center = Point::Zero();
  double r_lo = 0.0;
  double r_hi = std::numeric_limits<double>::infinity();

  bool contains(const Point& p, double tol = kGeomTol) const {
    const double d = distance(p, center);
    return d >= r_lo - tol && d <= r_hi + tol;
  }
};

/// Intersection of half-planes and an optional annulus, with a point known to
/// lie strictly inside.
struct ConvexCell {
  std::vector<HalfPlane> halfplanes;
  std::optional<RadialBound> radial;
  Point witness = Point::Zero();
  /// Clipped polygon for polygonal cells; the hull for radial cells.
  Polygon polygon;

  bool contains(const Point& p, double tol = kGeomTol) const;
  /// Smallest slack of the witness against all constraints (positive when
  /// strictly inside).
  double witness_margin() const;
};

struct Region {
  ConvexCell cell;
  /// Node ids by increasing distance from the reference transmitter at the
  /// witness point; ties broken by destination index.
  std::vector<NodeId> ordering;
};

struct RegionDecomposition {
  NodeId reference = NodeId::relay();
  Polygon hull;
  std::vector<Region> regions;

  std::size_t size() const { return regions.size(); }
};

/// Andrew monotone chain. Collinear points are dropped; collinear input yields
/// the two-vertex segment. Throws InvalidInput for fewer than two points.
Polygon convex_hull(std::span<const Point> points);

double polygon_area(const Polygon& polygon);
Point polygon_centroid(const Polygon& polygon);

/// Edge half-planes of a CCW polygon with at least three vertices.
std::vector<HalfPlane> polygon_halfplanes(const Polygon& polygon);

bool inside_polygon(const Polygon& polygon, const Point& p, double tol = kGeomTol);

/// Euclidean projection onto a convex polygon (any vertex count).
Point project_onto_polygon(const Polygon& polygon, const Point& p);

/// Keeps the part of a convex polygon satisfying the half-plane.
Polygon clip(const Polygon& polygon, const HalfPlane& halfplane);

/// Convex hull of the points, inflated by `margin` perpendicular to the
/// supporting line when it has zero area.
Polygon working_hull(std::span<const Point> points, double margin = kDefaultHullMargin);

/// Half-plane of points at least as close to `a` as to `b`. Throws
/// DegeneratePair for coincident points.
HalfPlane perpendicular_bisector(const Point& a, const Point& b);

/// Destination ids sorted by distance from `from`, ties by index.
std::vector<NodeId> distance_order(const Point& from, std::span<const Point> destinations);

/// Coincident destinations collapse into one site; alias[i] is the site of
/// destination i and sites keep first-occurrence order.
struct MergedSites {
  std::vector<Point> sites;
  std::vector<int> alias;
  bool has_duplicates() const { return sites.size() != alias.size(); }
};
MergedSites merge_coincident(std::span<const Point> points, double tol = kGeomTol);

/// Splits the hull by the perpendicular bisector of every pair of distinct
/// destinations. Each cell carries the full destination ordering at its
/// witness (area centroid).
RegionDecomposition relay_order_regions(std::span<const Point> destinations, const Polygon& hull);

/// Disc and rings around the source through each destination radius, kept
/// when they meet the hull with positive area. Orderings include the relay.
RegionDecomposition source_order_regions(const Point& source, std::span<const Point> destinations,
                                         const Polygon& hull);

/// Index of the first cell containing p. Throws OutOfHull when p is outside
/// the decomposition hull.
std::size_t locate(const RegionDecomposition& decomposition, const Point& p);

}  // namespace relay
