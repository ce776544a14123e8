#include "relay/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relay/errors.hpp"

namespace relay {
namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// True when `a` lies within kGeomTol of the line through o and b (or o == b).
bool non_left_turn(const Point& o, const Point& a, const Point& b) {
  const double base = distance(o, b);
  return cross(o, a, b) <= kGeomTol * std::max(base, 1.0);
}

Point closest_on_segment(const Point& a, const Point& b, const Point& p) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

}  // namespace

bool ConvexCell::contains(const Point& p, double tol) const {
  for (const auto& h : halfplanes) {
    if (!h.contains(p, tol)) return false;
  }
  return !radial || radial->contains(p, tol);
}

double ConvexCell::witness_margin() const {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& h : halfplanes) margin = std::min(margin, -h.signed_distance(witness));
  if (radial) {
    const double d = distance(witness, radial->center);
    margin = std::min(margin, d - radial->r_lo);
    if (std::isfinite(radial->r_hi)) margin = std::min(margin, radial->r_hi - d);
  }
  return margin;
}

Polygon convex_hull(std::span<const Point> points) {
  if (points.size() < 2) throw InvalidInput("convex_hull needs at least two points");
  for (const auto& p : points) {
    if (!p.allFinite()) throw InvalidInput("convex_hull: non-finite coordinate");
  }
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point& a, const Point& b) { return distance(a, b) <= kGeomTol; }),
            pts.end());
  if (pts.size() == 1) return pts;

  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && non_left_turn(hull[k - 2], hull[k - 1], p)) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && non_left_turn(hull[k - 2], hull[k - 1], *it)) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(const Polygon& polygon) {
  if (polygon.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % polygon.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

Point polygon_centroid(const Polygon& polygon) {
  if (polygon.empty()) throw InvalidInput("centroid of an empty polygon");
  const double area = polygon_area(polygon);
  Point mean = Point::Zero();
  for (const auto& p : polygon) mean += p;
  mean /= static_cast<double>(polygon.size());
  if (std::abs(area) <= 0.0) return mean;
  // Shift to the vertex mean so the accumulation stays well conditioned.
  Point c = Point::Zero();
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point a = polygon[i] - mean;
    const Point b = polygon[(i + 1) % polygon.size()] - mean;
    const double w = a.x() * b.y() - b.x() * a.y();
    c += (a + b) * w;
  }
  return mean + c / (6.0 * area);
}

std::vector<HalfPlane> polygon_halfplanes(const Polygon& polygon) {
  if (polygon.size() < 3) throw InvalidInput("half-plane form needs a polygon with positive area");
  std::vector<HalfPlane> planes;
  planes.reserve(polygon.size());
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % polygon.size()];
    Eigen::Vector2d normal(b.y() - a.y(), a.x() - b.x());
    const double len = normal.norm();
    if (len == 0.0) continue;
    normal /= len;
    planes.push_back({normal, normal.dot(a)});
  }
  return planes;
}

bool inside_polygon(const Polygon& polygon, const Point& p, double tol) {
  if (polygon.size() < 3) {
    return distance(project_onto_polygon(polygon, p), p) <= tol;
  }
  for (const auto& h : polygon_halfplanes(polygon)) {
    if (!h.contains(p, tol)) return false;
  }
  return true;
}

Point project_onto_polygon(const Polygon& polygon, const Point& p) {
  if (polygon.empty()) throw InvalidInput("projection onto an empty polygon");
  if (polygon.size() == 1) return polygon.front();
  if (polygon.size() >= 3 && inside_polygon(polygon, p, 0.0)) return p;
  Point best = polygon.front();
  double best_d = std::numeric_limits<double>::infinity();
  const std::size_t edges = polygon.size() == 2 ? 1 : polygon.size();
  for (std::size_t i = 0; i < edges; ++i) {
    const Point q = closest_on_segment(polygon[i], polygon[(i + 1) % polygon.size()], p);
    const double d = distance(q, p);
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

Polygon clip(const Polygon& polygon, const HalfPlane& halfplane) {
  Polygon out;
  const std::size_t m = polygon.size();
  out.reserve(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % m];
    const double da = halfplane.signed_distance(a);
    const double db = halfplane.signed_distance(b);
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

Polygon working_hull(std::span<const Point> points, double margin) {
  Polygon hull = convex_hull(points);
  if (hull.size() >= 3) return hull;
  if (hull.size() == 1) {
    const Point& c = hull.front();
    return {c + Point(-margin, -margin), c + Point(margin, -margin), c + Point(margin, margin),
            c + Point(-margin, margin)};
  }
  const Point& a = hull[0];
  const Point& b = hull[1];
  const Eigen::Vector2d dir = (b - a).normalized();
  const Eigen::Vector2d off = margin * Eigen::Vector2d(-dir.y(), dir.x());
  return {a - off, b - off, b + off, a + off};
}

HalfPlane perpendicular_bisector(const Point& a, const Point& b) {
  const Eigen::Vector2d diff = b - a;
  const double len = diff.norm();
  if (len <= kGeomTol) throw DegeneratePair("perpendicular bisector of coincident points");
  const Eigen::Vector2d normal = diff / len;
  return {normal, normal.dot(0.5 * (a + b))};
}

std::vector<NodeId> distance_order(const Point& from, std::span<const Point> destinations) {
  std::vector<int> idx(destinations.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> d2(destinations.size());
  for (std::size_t i = 0; i < destinations.size(); ++i) d2[i] = (destinations[i] - from).squaredNorm();
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return d2[a] < d2[b]; });
  std::vector<NodeId> order;
  order.reserve(idx.size());
  for (int i : idx) order.push_back(NodeId::dest(i));
  return order;
}

MergedSites merge_coincident(std::span<const Point> points, double tol) {
  MergedSites merged;
  merged.alias.reserve(points.size());
  for (const auto& p : points) {
    int site = -1;
    for (std::size_t s = 0; s < merged.sites.size(); ++s) {
      if (distance(merged.sites[s], p) <= tol) {
        site = static_cast<int>(s);
        break;
      }
    }
    if (site < 0) {
      site = static_cast<int>(merged.sites.size());
      merged.sites.push_back(p);
    }
    merged.alias.push_back(site);
  }
  return merged;
}

RegionDecomposition relay_order_regions(std::span<const Point> destinations, const Polygon& hull) {
  if (destinations.empty()) throw InvalidInput("relay_order_regions needs a destination");
  const double hull_area = polygon_area(hull);
  if (hull.size() < 3 || hull_area <= 0.0) {
    throw InvalidInput("relay_order_regions needs a hull with positive area");
  }
  const MergedSites merged = merge_coincident(destinations);
  const double area_floor = 1e-12 * hull_area;

  struct Piece {
    Polygon polygon;
    std::vector<HalfPlane> planes;
  };
  std::vector<Piece> pieces{{hull, polygon_halfplanes(hull)}};

  for (std::size_t i = 0; i < merged.sites.size(); ++i) {
    for (std::size_t j = i + 1; j < merged.sites.size(); ++j) {
      const HalfPlane bisector = perpendicular_bisector(merged.sites[i], merged.sites[j]);
      std::vector<Piece> next;
      next.reserve(pieces.size() * 2);
      for (auto& piece : pieces) {
        double lo = 0.0;
        double hi = 0.0;
        for (const auto& v : piece.polygon) {
          const double s = bisector.signed_distance(v);
          lo = std::min(lo, s);
          hi = std::max(hi, s);
        }
        if (lo < -kGeomTol && hi > kGeomTol) {
          Polygon near = clip(piece.polygon, bisector);
          Polygon far = clip(piece.polygon, bisector.flipped());
          if (polygon_area(near) > area_floor && polygon_area(far) > area_floor) {
            Piece a{std::move(near), piece.planes};
            a.planes.push_back(bisector);
            Piece b{std::move(far), std::move(piece.planes)};
            b.planes.push_back(bisector.flipped());
            next.push_back(std::move(a));
            next.push_back(std::move(b));
            continue;
          }
        }
        next.push_back(std::move(piece));
      }
      pieces = std::move(next);
    }
  }

  RegionDecomposition out;
  out.reference = NodeId::relay();
  out.hull = hull;
  out.regions.reserve(pieces.size());
  for (auto& piece : pieces) {
    Region region;
    region.cell.witness = polygon_centroid(piece.polygon);
    region.cell.halfplanes = std::move(piece.planes);
    region.cell.polygon = std::move(piece.polygon);
    region.ordering = distance_order(region.cell.witness, destinations);
    out.regions.push_back(std::move(region));
  }
  return out;
}

RegionDecomposition source_order_regions(const Point& source, std::span<const Point> destinations,
                                         const Polygon& hull) {
  if (destinations.empty()) throw InvalidInput("source_order_regions needs a destination");
  if (hull.size() < 3 || polygon_area(hull) <= 0.0) {
    throw InvalidInput("source_order_regions needs a hull with positive area");
  }
  const std::vector<NodeId> by_radius = distance_order(source, destinations);
  std::vector<double> radii;
  for (const auto& id : by_radius) {
    const double r = distance(destinations[id.index], source);
    if (radii.empty() || r - radii.back() > kGeomTol) radii.push_back(r);
  }

  double reach = 0.0;
  for (const auto& v : hull) reach = std::max(reach, distance(v, source));
  const Point centroid = polygon_centroid(hull);
  const std::vector<HalfPlane> planes = polygon_halfplanes(hull);

  // Radial interval bounds: [0, r1], [r1, r2], ..., [rm, inf).
  std::vector<std::pair<double, double>> bands;
  bands.emplace_back(0.0, radii.front());
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) bands.emplace_back(radii[k], radii[k + 1]);
  bands.emplace_back(radii.back(), std::numeric_limits<double>::infinity());

  RegionDecomposition out;
  out.reference = NodeId::source();
  out.hull = hull;
  for (const auto& [lo, hi] : bands) {
    if (!(lo < reach - kGeomTol) || !(hi > kGeomTol)) continue;

    std::optional<Point> witness;
    for (double lambda : {1e-2, 1e-3, 1e-4, 1e-6, 1e-8}) {
      double best_len = -1.0;
      Point best_q = centroid;
      for (const auto& v : hull) {
        const Point q = (1.0 - lambda) * v + lambda * centroid;
        const double len = distance(q, source);
        if (len > best_len) {
          best_len = len;
          best_q = q;
        }
      }
      if (best_len > lo + kGeomTol) {
        const double t = 0.5 * (lo + std::min(hi, best_len));
        witness = source + t * (best_q - source) / best_len;
        break;
      }
    }
    if (!witness) continue;

    Region region;
    region.cell.halfplanes = planes;
    region.cell.radial = RadialBound{source, lo, hi};
    region.cell.witness = *witness;
    region.cell.polygon = hull;
    // Relay slot follows every destination at radius <= lo.
    for (const auto& id : by_radius) {
      if (distance(destinations[id.index], source) <= lo + kGeomTol) {
        region.ordering.push_back(id);
      }
    }
    region.ordering.push_back(NodeId::relay());
    for (const auto& id : by_radius) {
      if (distance(destinations[id.index], source) > lo + kGeomTol) region.ordering.push_back(id);
    }
    out.regions.push_back(std::move(region));
  }
  return out;
}

std::size_t locate(const RegionDecomposition& decomposition, const Point& p) {
  if (!inside_polygon(decomposition.hull, p)) throw OutOfHull("point lies outside the hull");
  for (std::size_t i = 0; i < decomposition.regions.size(); ++i) {
    if (decomposition.regions[i].cell.contains(p)) return i;
  }
  // Rounding can leave a point a hair outside every cell; pick the least violated.
  std::size_t best = 0;
  double best_violation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < decomposition.regions.size(); ++i) {
    const auto& cell = decomposition.regions[i].cell;
    double violation = 0.0;
    for (const auto& h : cell.halfplanes) violation = std::max(violation, h.signed_distance(p));
    if (cell.radial) {
      const double d = distance(p, cell.radial->center);
      violation = std::max({violation, cell.radial->r_lo - d, d - cell.radial->r_hi});
    }
    if (violation < best_violation) {
      best_violation = violation;
      best = i;
    }
  }
  return best;
}

}  // namespace relay
