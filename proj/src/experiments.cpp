#include "relay/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>

#include "relay/errors.hpp"
#include "relay/geometry.hpp"
#include "relay/io.hpp"

namespace relay {

namespace {

double triangle_area(const Point& a, const Point& b, const Point& c) {
  const Point u = b - a, v = c - a;
  return 0.5 * std::abs(u.x() * v.y() - u.y() * v.x());
}

Topology random_triangle(std::mt19937_64& rng, double area) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Point v[3];
  do {
    for (auto& p : v) p = Point(u(rng), u(rng));
  } while (triangle_area(v[0], v[1], v[2]) < 0.01);
  const Point g = (v[0] + v[1] + v[2]) / 3.0;
  const double k = std::sqrt(area / triangle_area(v[0], v[1], v[2]));
  Topology t;
  t.source = g + k * (v[0] - g);
  t.destinations = {g + k * (v[1] - g), g + k * (v[2] - g)};
  return t;
}

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

std::vector<BenchRow> bench_random_triangles(const std::vector<double>& areas, const BenchOptions& options) {
  if (areas.empty()) throw InvalidInput("bench needs at least one area");
  for (std::size_t i = 0; i < areas.size(); ++i) {
    if (!(areas[i] > 0.0) || !std::isfinite(areas[i])) throw InvalidInput("areas must be positive");
    if (i > 0 && !(areas[i] > areas[i - 1])) throw InvalidInput("areas must be ascending");
  }
  if (options.trials < 1) throw InvalidInput("trials must be positive");

  std::mt19937_64 rng(options.seed);
  std::vector<BenchRow> rows;
  for (const double area : areas) {
    for (int k = 0; k < options.trials; ++k) {
      const Topology t = random_triangle(rng, area);
      SolverConfig config = options.solver;
      config.gamma = default_gamma(t);
      const CentroidComparison c = compare_centroid(t, config, options.oracle_resolution);
      rows.push_back({area, c.R_opt, c.R_centroid, c.relative_gain, c.plan.R_m >= 0.95 * c.R_oracle});
    }
  }
  return rows;
}

std::vector<double> median_gains(const std::vector<BenchRow>& rows, const std::vector<double>& areas) {
  std::vector<double> out;
  for (const double area : areas) {
    std::vector<double> g;
    for (const auto& r : rows) {
      if (r.area == area) g.push_back(r.gain);
    }
    if (g.empty()) {
      out.push_back(std::nan(""));
      continue;
    }
    std::sort(g.begin(), g.end());
    const std::size_t m = g.size() / 2;
    out.push_back(g.size() % 2 ? g[m] : 0.5 * (g[m - 1] + g[m]));
  }
  return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("spearman needs two equal samples of size >= 2");
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

void write_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  const auto precision = out.precision(17);
  out << "area,R_opt,R_centroid,gain\n";
  for (const auto& r : rows) out << r.area << ',' << r.R_opt << ',' << r.R_centroid << ',' << r.gain << '\n';
  out.precision(precision);
}

}  // namespace relay
