#include "relay/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "relay/errors.hpp"

namespace relay {

namespace {

struct Location {
  int line = 0;
  int column = 0;
};

// Positions of every key and array element of a syntactically valid document,
// by dotted path ("destinations[1].x"). Keys map to their opening quote.
class KeyLocator {
 public:
  explicit KeyLocator(std::string_view text) : text_(text) {
    skip_ws();
    value("");
  }

  Location find(std::string path) const {
    // Fall back to the nearest recorded ancestor.
    while (true) {
      const auto it = at_.find(path);
      if (it != at_.end()) return it->second;
      const auto cut = path.find_last_of(".[");
      if (cut == std::string::npos) return {};
      path.resize(cut);
    }
  }

 private:
  Location here() const { return {line_, static_cast<int>(pos_ - line_start_) + 1}; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      line_start_ = pos_ + 1;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }

  std::string string_token() {
    std::string out;
    advance();  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') advance();
      if (pos_ < text_.size()) out += text_[pos_];
      advance();
    }
    advance();
    return out;
  }

  void value(const std::string& path) {
    if (pos_ >= text_.size()) return;
    const char c = text_[pos_];
    if (c == '{') {
      advance();
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] != '}') {
        const Location loc = here();
        const std::string key = string_token();
        const std::string child = path.empty() ? key : path + "." + key;
        at_.emplace(child, loc);
        skip_ws();
        advance();  // ':'
        skip_ws();
        value(child);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          advance();
          skip_ws();
        }
      }
      advance();
    } else if (c == '[') {
      advance();
      skip_ws();
      int i = 0;
      while (pos_ < text_.size() && text_[pos_] != ']') {
        const std::string child = path + "[" + std::to_string(i++) + "]";
        at_.emplace(child, here());
        value(child);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          advance();
          skip_ws();
        }
      }
      advance();
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < text_.size() && !std::strchr(",]} \t\r\n", text_[pos_])) advance();
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
  std::map<std::string, Location> at_;
};

Location offset_location(std::string_view text, std::size_t offset) {
  Location loc{1, 1};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : locator_(text) {}

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    const Location loc = locator_.find(field);
    std::ostringstream os;
    os << field << ": " << message;
    if (loc.line > 0) os << " (line " << loc.line << ", column " << loc.column << ")";
    throw ValidationError(field, os.str(), loc.line, loc.column);
  }

  void only_keys(const Json& object, const std::string& path, std::initializer_list<const char*> keys) const {
    if (!object.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [key, unused] : object.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
        fail(path.empty() ? key : path + "." + key, "unknown key");
      }
    }
  }

  double number(const Json& value, const std::string& field) const {
    if (!value.is_number()) fail(field, "expected a number");
    const double x = value.get<double>();
    if (!std::isfinite(x)) fail(field, "must be finite");
    return x;
  }

  double positive(const Json& object, const std::string& path, const char* key, double fallback) const {
    if (!object.contains(key)) return fallback;
    const std::string field = path.empty() ? key : path + "." + key;
    const double x = number(object.at(key), field);
    if (!(x > 0.0)) fail(field, "must be positive");
    return x;
  }

  Point point(const Json& value, const std::string& field) const {
    only_keys(value, field, {"x", "y"});
    if (!value.contains("x")) fail(field + ".x", "missing");
    if (!value.contains("y")) fail(field + ".y", "missing");
    return {number(value.at("x"), field + ".x"), number(value.at("y"), field + ".y")};
  }

 private:
  KeyLocator locator_;
};

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

double env_number(const char* name, double fallback) {
  const std::string v = env(name);
  if (v.empty()) return fallback;
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || !std::isfinite(x)) throw ValidationError(name, std::string(name) + ": not a finite number");
  return x;
}

long long env_integer(const char* name, long long fallback) {
  const std::string v = env(name);
  if (v.empty()) return fallback;
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || x < 0) throw ValidationError(name, std::string(name) + ": not a nonnegative integer");
  return x;
}

}  // namespace

double median_distance(const Topology& topology) {
  const auto pts = fixed_nodes(topology);
  std::vector<double> d;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) d.push_back(distance(pts[i], pts[j]));
  }
  if (d.empty()) return 0.0;
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size() / 2;
  return d.size() % 2 ? d[m] : 0.5 * (d[m - 1] + d[m]);
}

double default_gamma(const Topology& topology) {
  const double scale = median_distance(topology);
  return scale > 0.0 ? 100.0 / scale : 100.0;
}

SolverConfig solver_defaults_from_env() {
  SolverConfig c;
  c.p = env_number("RELAY_PLANNER_P", c.p);
  c.gamma = env_number("RELAY_PLANNER_GAMMA", c.gamma);
  c.kkt_tol = env_number("RELAY_PLANNER_KKT_TOL", c.kkt_tol);
  c.seed = static_cast<std::uint64_t>(env_integer("RELAY_PLANNER_SEED", static_cast<long long>(c.seed)));
  c.max_iter = static_cast<int>(env_integer("RELAY_PLANNER_MAX_ITER", c.max_iter));
  if (!(c.p >= 1.0)) throw ValidationError("RELAY_PLANNER_P", "RELAY_PLANNER_P: must be at least 1");
  if (c.gamma < 0.0) throw ValidationError("RELAY_PLANNER_GAMMA", "RELAY_PLANNER_GAMMA: must be positive");
  if (!(c.kkt_tol > 0.0)) throw ValidationError("RELAY_PLANNER_KKT_TOL", "RELAY_PLANNER_KKT_TOL: must be positive");
  if (c.max_iter < 1) throw ValidationError("RELAY_PLANNER_MAX_ITER", "RELAY_PLANNER_MAX_ITER: must be positive");
  return c;
}

TopologyFile parse_topology(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    const Location loc = offset_location(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream os;
    os << "syntax error at line " << loc.line << ", column " << loc.column;
    throw ValidationError("", os.str(), loc.line, loc.column);
  } catch (const Json::out_of_range& e) {
    // Only numeric overflow reaches here.
    throw ValidationError("", std::string("number is not finite: ") + e.what());
  }

  const Reader in(text);
  in.only_keys(doc, "", {"source", "destinations", "P_s", "P_r", "N0", "alpha", "solver"});

  TopologyFile out;
  Topology& t = out.topology;
  if (!doc.contains("source")) in.fail("source", "missing");
  t.source = in.point(doc.at("source"), "source");
  if (!doc.contains("destinations")) in.fail("destinations", "missing");
  const Json& dests = doc.at("destinations");
  if (!dests.is_array()) in.fail("destinations", "expected an array");
  if (dests.empty()) in.fail("destinations", "needs at least one destination");
  for (std::size_t i = 0; i < dests.size(); ++i) {
    t.destinations.push_back(in.point(dests[i], "destinations[" + std::to_string(i) + "]"));
  }
  t.P_s = in.positive(doc, "", "P_s", t.P_s);
  t.P_r = in.positive(doc, "", "P_r", t.P_r);
  t.N0 = in.positive(doc, "", "N0", t.N0);
  t.alpha = in.positive(doc, "", "alpha", t.alpha);
  if (t.alpha < 2.0) in.fail("alpha", "must be at least 2");

  SolverConfig& c = out.solver;
  c = solver_defaults_from_env();
  if (doc.contains("solver")) {
    const Json& s = doc.at("solver");
    in.only_keys(s, "solver", {"gamma", "p", "kkt_tol", "seed"});
    c.gamma = in.positive(s, "solver", "gamma", c.gamma);
    c.p = in.positive(s, "solver", "p", c.p);
    if (c.p < 1.0) in.fail("solver.p", "must be at least 1");
    c.kkt_tol = in.positive(s, "solver", "kkt_tol", c.kkt_tol);
    if (s.contains("seed")) {
      const Json& seed = s.at("seed");
      if (!seed.is_number_unsigned()) in.fail("solver.seed", "expected a nonnegative integer");
      c.seed = seed.get<std::uint64_t>();
    }
  }
  if (c.gamma == 0.0) c.gamma = default_gamma(t);
  try {
    validate(t);
    validate(c);
  } catch (const InvalidInput& e) {
    throw ValidationError("", e.what());
  }
  return out;
}

TopologyFile read_topology_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("", "cannot read " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_topology(buf.str());
}

Json to_json(const Point& p) { return {{"x", p.x()}, {"y", p.y()}}; }

Json topology_to_json(const TopologyFile& file) {
  const Topology& t = file.topology;
  Json dests = Json::array();
  for (const auto& d : t.destinations) dests.push_back(to_json(d));
  return {{"source", to_json(t.source)},
          {"destinations", dests},
          {"P_s", t.P_s},
          {"P_r", t.P_r},
          {"N0", t.N0},
          {"alpha", t.alpha},
          {"solver",
           {{"gamma", file.solver.gamma},
            {"p", file.solver.p},
            {"kkt_tol", file.solver.kkt_tol},
            {"seed", file.solver.seed}}}};
}

Json to_json(const HyperarcKey& key) {
  Json receivers = Json::array();
  for (const auto& r : key.receivers) receivers.push_back(to_string(r));
  return {{"transmitter", to_string(key.transmitter)},
          {"receivers", receivers},
          {"farthest", to_string(key.farthest)}};
}

namespace {

// JSON has no infinity; unbounded values are written as null.
Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json halfplane_json(const HalfPlane& h) {
  return {{"a", h.normal.x()}, {"b", h.normal.y()}, {"c", h.offset}};
}

Json polygon_json(const Polygon& polygon) {
  Json out = Json::array();
  for (const auto& p : polygon) out.push_back(to_json(p));
  return out;
}

Json distance_json(const DistanceExpr& d) {
  return Json::array({to_string(d.a), to_string(d.b)});
}

}  // namespace

Json to_json(const PlanResult& plan) {
  Json alloc = Json::array();
  for (const auto& [key, power] : plan.allocation.power) {
    Json entry = to_json(key);
    entry["power"] = power;
    alloc.push_back(entry);
  }
  const PlanDiagnostics& d = plan.diagnostics;
  return {{"method", plan.method},
          {"relay", to_json(plan.relay)},
          {"R_m", plan.R_m},
          {"destination_rates", plan.destination_rates},
          {"allocation", alloc},
          {"diagnostics",
           {{"iterations", d.iterations},
            {"kkt", d.kkt},
            {"p", d.p},
            {"gamma", d.gamma},
            {"repair_applied", d.repair_applied},
            {"converged", d.converged},
            {"starts", d.starts},
            {"starts_converged", d.starts_converged},
            {"best_start", d.best_start},
            {"program_rate", d.program_rate},
            {"distance_violation", d.distance_violation},
            {"projected", d.projected},
            {"repaired_rate", d.repaired_rate},
            {"polish_evaluations", d.polish_evaluations},
            {"clamped_distances", d.clamped_distances},
            {"warnings", d.warnings}}}};
}

Json to_json(const CentroidComparison& c) {
  return {{"R_opt", c.R_opt},
          {"R_centroid", c.R_centroid},
          {"relative_gain", finite_or_null(c.relative_gain)},
          {"centroid", to_json(c.centroid)},
          {"R_oracle", c.R_oracle},
          {"plan", to_json(c.plan)}};
}

Json to_json(const RegionDecomposition& decomposition) {
  Json regions = Json::array();
  for (const auto& region : decomposition.regions) {
    Json hp = Json::array();
    for (const auto& h : region.cell.halfplanes) hp.push_back(halfplane_json(h));
    Json ordering = Json::array();
    for (const auto& id : region.ordering) ordering.push_back(to_string(id));
    Json cell = {{"halfplanes", hp},
                 {"witness", to_json(region.cell.witness)},
                 {"polygon", polygon_json(region.cell.polygon)},
                 {"ordering", ordering}};
    if (region.cell.radial) {
      const RadialBound& r = *region.cell.radial;
      cell["radial"] = {{"center", to_json(r.center)}, {"r_lo", r.r_lo}, {"r_hi", finite_or_null(r.r_hi)}};
    }
    regions.push_back(cell);
  }
  return {{"reference", to_string(decomposition.reference)},
          {"hull", polygon_json(decomposition.hull)},
          {"regions", regions}};
}

Json to_json(const Hypergraph& graph) {
  Json arcs = Json::array();
  for (std::size_t k = 0; k < graph.arcs.size(); ++k) {
    const Hyperarc& arc = graph.arcs[k];
    Json entry = to_json(arc.key);
    entry["index"] = k;
    Json terms = Json::array();
    for (const auto& term : arc.activation.terms) {
      terms.push_back({{"plus", distance_json(term.plus)}, {"minus", distance_json(term.minus)}});
    }
    entry["switch"] = terms;
    arcs.push_back(entry);
  }
  Json paths = Json::array();
  for (const auto& per_dest : graph.paths) {
    for (const auto& path : per_dest) {
      paths.push_back({{"destination", to_string(path.destination)}, {"legs", path.legs}});
    }
  }
  return {{"source_arcs", graph.source_count},
          {"relay_arcs", graph.arcs.size() - graph.source_count},
          {"arcs", arcs},
          {"paths", paths}};
}

std::string regions_svg(const Topology& topology, const RegionDecomposition& relay_regions,
                        const RegionDecomposition& source_regions) {
  const Polygon& hull = relay_regions.hull;
  std::vector<Point> all = fixed_nodes(topology);
  all.insert(all.end(), hull.begin(), hull.end());
  Point lo = all.front(), hi = all.front();
  for (const auto& p : all) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});
  const double size = 600.0, pad = 30.0;
  const double k = (size - 2 * pad) / span;
  // SVG y grows downwards.
  auto sx = [&](double x) { return pad + (x - lo.x()) * k; };
  auto sy = [&](double y) { return size - pad - (y - lo.y()) * k; };

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
     << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
  auto points = [&](const Polygon& poly) {
    std::ostringstream ps;
    ps << std::setprecision(6);
    for (const auto& p : poly) ps << sx(p.x()) << ',' << sy(p.y()) << ' ';
    return ps.str();
  };
  os << "<defs><clipPath id=\"hull\"><polygon points=\"" << points(hull) << "\"/></clipPath></defs>\n";
  static const char* palette[] = {"#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3",
                                  "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd"};
  for (std::size_t i = 0; i < relay_regions.regions.size(); ++i) {
    const Region& r = relay_regions.regions[i];
    std::string label;
    for (const auto& id : r.ordering) label += to_string(id) + ' ';
    os << "<polygon points=\"" << points(r.cell.polygon) << "\" fill=\"" << palette[i % 10]
       << "\" stroke=\"#555\" stroke-width=\"0.5\"><title>" << label << "</title></polygon>\n";
  }
  os << "<g clip-path=\"url(#hull)\" fill=\"none\" stroke=\"#1f4e9e\" stroke-dasharray=\"4 3\">\n";
  for (const auto& r : source_regions.regions) {
    if (!r.cell.radial) continue;
    for (const double radius : {r.cell.radial->r_lo, r.cell.radial->r_hi}) {
      if (radius > 0.0 && std::isfinite(radius)) {
        os << "<circle cx=\"" << sx(r.cell.radial->center.x()) << "\" cy=\"" << sy(r.cell.radial->center.y())
           << "\" r=\"" << radius * k << "\"/>\n";
      }
    }
  }
  os << "</g>\n";
  os << "<polygon points=\"" << points(hull) << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto node = [&](const Point& p, const std::string& name, const char* color) {
    os << "<circle cx=\"" << sx(p.x()) << "\" cy=\"" << sy(p.y()) << "\" r=\"4\" fill=\"" << color << "\"/>"
       << "<text x=\"" << sx(p.x()) + 6 << "\" y=\"" << sy(p.y()) - 6 << "\" font-size=\"12\">" << name
       << "</text>\n";
  };
  node(topology.source, "s", "#c00");
  for (int i = 0; i < topology.n(); ++i) node(topology.destinations[static_cast<std::size_t>(i)], to_string(NodeId::dest(i)), "#000");
  os << "</svg>\n";
  return os.str();
}

}  // namespace relay
