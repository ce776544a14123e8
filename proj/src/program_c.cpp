#include "relay/program_c.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "relay/errors.hpp"
#include "relay/rate_model.hpp"

namespace relay {
namespace {

constexpr double kStartMargin = 0.1;   // log-domain slack of the start point
constexpr double kZSlack = 0.05;       // scaled meters
constexpr double kPowerRange = 15.0;   // log-range of admissible group powers

double median_pair_distance(const std::vector<Point>& pts) {
  std::vector<double> d;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double v = distance(pts[i], pts[j]);
      if (v > kGeomTol) d.push_back(v);
    }
  }
  if (d.empty()) return 1.0;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  return d[d.size() / 2];
}

double softplus(double w) { return w > 30.0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w)); }

int add_var(Eigen::Index& next) { return static_cast<int>(next++); }

void push(ProgramC& pc, SmoothFunction fn, Family fam) {
  pc.problem.constraints.push_back(std::move(fn));
  pc.family.push_back(fam);
  auto& c = pc.counts;
  switch (fam) {
    case Family::Rate: ++c.rate; break;
    case Family::SwitchProduct: ++c.switch_product; break;
    case Family::Sigmoid: ++c.sigmoid; break;
    case Family::ZLink: ++c.z_link; break;
    case Family::Farthest: ++c.farthest; break;
    case Family::DistanceFloor: ++c.distance_floor; break;
    case Family::Hull: ++c.hull; break;
    case Family::Budget: ++c.budget; break;
    case Family::Bound: ++c.bound; break;
    case Family::ObjectiveBound: ++c.objective_bound; break;
  }
}

double operand_value(const ProgramC& pc, const ProgramC::Operand& op, const Eigen::VectorXd& v) {
  return op.node >= 0 ? std::exp(v(pc.nodes[static_cast<std::size_t>(op.node)].d)) : op.constant;
}

double operand_true(const ProgramC& pc, const ProgramC::Operand& op, const Point& rho) {
  return op.node >= 0 ? distance(rho, pc.nodes[static_cast<std::size_t>(op.node)].position) : op.constant;
}

int node_index(NodeId id) { return id.is_dest() ? id.index + 1 : 0; }

// Set-level activation terms. A relay group needs its receivers to be the
// |S| nearest destinations; a source group needs the relay radius on the
// right side of the set's radii.
std::vector<ProgramC::Term> group_terms(const ProgramC& pc, const ProgramC::Group& g) {
  std::vector<ProgramC::Term> terms;
  const auto contains = [&](NodeId id) {
    return std::binary_search(g.receivers.begin(), g.receivers.end(), id);
  };
  const auto radius = [&](int node) { return pc.nodes[static_cast<std::size_t>(node)].position.norm(); };
  if (g.transmitter == NodeId::source()) {
    if (contains(NodeId::relay())) {
      double outer = std::numeric_limits<double>::infinity();
      for (int i = 1; i <= pc.n(); ++i) {
        if (!contains(NodeId::dest(i - 1))) outer = std::min(outer, radius(i));
      }
      if (std::isfinite(outer)) {
        double reach = 0.0;
        for (const auto& v : pc.hull) reach = std::max(reach, v.norm());
        if (reach > outer + kGeomTol) terms.push_back({{-1, outer}, {0, 0.0}});
      }
    } else {
      double inner = 0.0;
      for (const auto& id : g.receivers) inner = std::max(inner, radius(node_index(id)));
      if (inner > kGeomTol) terms.push_back({{0, 0.0}, {-1, inner}});
    }
    return terms;
  }
  for (int i = 1; i <= pc.n(); ++i) {
    if (!contains(NodeId::dest(i - 1))) continue;
    for (int j = 1; j <= pc.n(); ++j) {
      if (contains(NodeId::dest(j - 1))) continue;
      const Point& pi = pc.nodes[static_cast<std::size_t>(i)].position;
      const Point& pj = pc.nodes[static_cast<std::size_t>(j)].position;
      bool implied = true;
      for (const auto& v : pc.hull) {
        if (distance(v, pj) - distance(v, pi) < -kGeomTol) {
          implied = false;
          break;
        }
      }
      if (!implied) terms.push_back({{j, 0.0}, {i, 0.0}});
    }
  }
  return terms;
}

}  // namespace

ProgramC assemble_program_C(const Topology& topology, const Hypergraph& graph,
                            const ProgramOptions& options) {
  validate(topology);
  if (!(options.gamma > 0.0)) throw InvalidInput("switch sharpness must be positive");
  if (!(options.p >= 1.0)) throw InvalidInput("surrogate exponent must be at least 1");
  if (!(options.penalty > 0.0)) throw InvalidInput("surrogate penalty must be positive");

  ProgramC pc;
  const std::vector<Point> fixed = fixed_nodes(topology);
  pc.origin = topology.source;
  pc.scale = median_pair_distance(fixed);
  pc.gamma = options.gamma * pc.scale;
  pc.alpha = topology.alpha;
  pc.log_noise = std::log(topology.N0) + topology.alpha * std::log(pc.scale);
  pc.P_s = topology.P_s;
  pc.P_r = topology.P_r;

  std::vector<Point> scaled;
  for (const auto& p : fixed) scaled.push_back(pc.to_scaled(p));
  pc.degenerate_hull = polygon_area(convex_hull(scaled)) <= kGeomTol;
  pc.hull = working_hull(scaled, options.hull_margin);

  Eigen::Index next = 0;
  pc.x = add_var(next);
  pc.y = add_var(next);
  for (int i = 0; i <= topology.n(); ++i) {
    ProgramC::NodeVars nv;
    nv.node = i == 0 ? NodeId::source() : NodeId::dest(i - 1);
    nv.position = scaled[static_cast<std::size_t>(i)];
    nv.d = add_var(next);
    pc.nodes.push_back(nv);
  }

  // Groups by (transmitter, receiver set).
  std::map<std::pair<NodeId, std::vector<NodeId>>, int> group_of;
  std::vector<int> arc_group(graph.arcs.size());
  for (std::size_t a = 0; a < graph.arcs.size(); ++a) {
    const auto& key = graph.arcs[a].key;
    const auto k = std::make_pair(key.transmitter, key.receivers);
    auto it = group_of.find(k);
    if (it == group_of.end()) {
      it = group_of.emplace(k, static_cast<int>(pc.groups.size())).first;
      ProgramC::Group g;
      g.transmitter = key.transmitter;
      g.receivers = key.receivers;
      pc.groups.push_back(std::move(g));
    }
    arc_group[a] = it->second;
  }
  const double log_floor = std::log(kDistanceClamp / pc.scale);
  for (auto& g : pc.groups) {
    g.P = add_var(next);
    g.M = add_var(next);
    g.terms = group_terms(pc, g);
    if (!g.terms.empty()) g.f = add_var(next);
    for (auto& term : g.terms) {
      term.f = add_var(next);
      term.z = add_var(next);
    }
    for (const auto& id : g.receivers) {
      if (g.transmitter == NodeId::source() && id.is_dest()) {
        g.member_logs.push_back(std::max(log_floor, std::log(pc.nodes[static_cast<std::size_t>(id.index + 1)].position.norm())));
      } else {
        g.member_nodes.push_back(node_index(id));
      }
    }
  }

  // Paths on groups, deduplicated per destination.
  for (int i = 0; i < topology.n(); ++i) {
    std::set<std::vector<int>> seen;
    for (const auto& path : graph.paths[static_cast<std::size_t>(i)]) {
      std::vector<int> legs;
      for (const auto leg : path.legs) legs.push_back(arc_group[leg]);
      if (!seen.insert(legs).second) continue;
      pc.paths.push_back({i, legs, add_var(next)});
    }
    if (seen.empty()) throw DegenerateProgram("destination " + to_string(NodeId::dest(i)) + " has no path");
  }
  pc.t = add_var(next);

  pc.problem.size = next;
  pc.problem.cost = Eigen::VectorXd::Zero(next);
  pc.problem.cost(pc.t) = -1.0;

  // Rate constraints per (destination, group).
  for (int i = 0; i < topology.n(); ++i) {
    for (std::size_t gi = 0; gi < pc.groups.size(); ++gi) {
      SmoothFunction fn;
      for (const auto& path : pc.paths) {
        if (path.destination != i) continue;
        if (std::find(path.groups.begin(), path.groups.end(), static_cast<int>(gi)) == path.groups.end()) continue;
        fn.add_lse_term({{path.r, 1.0}}, 0.0);
      }
      if (fn.lse_A.rows() == 0) continue;
      const auto& g = pc.groups[gi];
      fn.add_linear(g.P, -1.0);
      if (g.f >= 0) fn.add_linear(g.f, -1.0);
      fn.add_linear(g.M, pc.alpha);
      fn.constant = pc.log_noise;
      push(pc, std::move(fn), Family::Rate);
    }
  }

  for (const auto& g : pc.groups) {
    if (g.f >= 0) {
      SmoothFunction prod;
      prod.add_linear(g.f, 1.0);
      for (const auto& term : g.terms) prod.add_linear(term.f, -1.0);
      push(pc, std::move(prod), Family::SwitchProduct);
    }
    for (const auto& term : g.terms) {
      SmoothFunction sig;
      sig.add_lse_term({{term.f, 1.0}}, 0.0);
      sig.add_lse_term({{term.f, 1.0}, {term.z, -pc.gamma}}, std::log(pc.gamma));
      push(pc, std::move(sig), Family::Sigmoid);

      SmoothFunction link;
      link.add_linear(term.z, 1.0);
      if (term.plus.node >= 0) {
        link.add_exp(pc.nodes[static_cast<std::size_t>(term.plus.node)].d, -1.0);
      } else {
        link.constant -= term.plus.constant;
      }
      if (term.minus.node >= 0) {
        link.add_exp(pc.nodes[static_cast<std::size_t>(term.minus.node)].d, 1.0);
      } else {
        link.constant += term.minus.constant;
      }
      push(pc, std::move(link), Family::ZLink);
    }
    for (const int u : g.member_nodes) {
      SmoothFunction far;
      far.add_linear(pc.nodes[static_cast<std::size_t>(u)].d, 1.0);
      far.add_linear(g.M, -1.0);
      push(pc, std::move(far), Family::Farthest);
    }
    for (const double c : g.member_logs) {
      SmoothFunction far;
      far.add_linear(g.M, -1.0);
      far.constant = c;
      push(pc, std::move(far), Family::Farthest);
    }
  }

  for (const auto& nv : pc.nodes) {
    SmoothFunction floor;
    floor.add_linear(nv.d, -1.0);
    floor.constant = log_floor;
    push(pc, std::move(floor), Family::DistanceFloor);
    const double eps = kDistanceClamp / pc.scale;
    pc.problem.penalties.push_back({pc.x, pc.y, nv.d, nv.position, eps * eps, options.p, options.penalty});
    ++pc.counts.norm_blocks;
  }

  // Box bounds implied by the hull diameter. They keep the barrier level sets
  // bounded when a group carries no weight in the objective.
  double diam = 1.0;
  for (const auto& u : pc.hull) {
    for (const auto& w : pc.hull) diam = std::max(diam, distance(u, w));
  }
  // Distances below the clamp are floored, so the floor may exceed the hull.
  const double reach = std::max(diam, std::exp(log_floor + kStartMargin));
  const double z_min = -reach - 1.0;
  const double f_min = -softplus(std::log(pc.gamma) - pc.gamma * z_min) - 1.0;
  const double M_max = std::log(reach) + 1.0;
  const double P_min = std::log(std::min(pc.P_s, pc.P_r)) - kPowerRange;
  std::size_t max_terms = 0;
  for (const auto& g : pc.groups) max_terms = std::max(max_terms, g.terms.size());
  const double r_min = P_min + static_cast<double>(max_terms) * f_min - pc.alpha * M_max - pc.log_noise -
                       std::log(static_cast<double>(pc.paths.size())) - 10.0;
  const auto bound = [&](Eigen::Index var, double sign, double limit) {
    SmoothFunction fn;  // sign * var <= sign * limit
    fn.add_linear(var, sign);
    fn.constant = -sign * limit;
    push(pc, std::move(fn), Family::Bound);
  };
  for (const auto& g : pc.groups) {
    bound(g.P, -1.0, P_min);
    bound(g.M, 1.0, M_max);
    for (const auto& term : g.terms) {
      bound(term.z, -1.0, z_min);
      bound(term.f, -1.0, f_min);
    }
  }
  for (const auto& path : pc.paths) bound(path.r, -1.0, r_min);

  for (const auto& h : polygon_halfplanes(pc.hull)) {
    SmoothFunction fn;
    fn.add_linear(pc.x, h.normal.x());
    fn.add_linear(pc.y, h.normal.y());
    fn.constant = -h.offset;
    push(pc, std::move(fn), Family::Hull);
  }

  for (const auto& [tx, budget] : {std::pair{NodeId::source(), topology.P_s}, std::pair{NodeId::relay(), topology.P_r}}) {
    SmoothFunction fn;
    for (const auto& g : pc.groups) {
      if (g.transmitter == tx) fn.add_lse_term({{g.P, 1.0}}, 0.0);
    }
    if (fn.lse_A.rows() == 0) continue;
    fn.constant = -std::log(budget);
    push(pc, std::move(fn), Family::Budget);
  }

  for (int i = 0; i < topology.n(); ++i) {
    SmoothFunction fn;
    fn.add_linear(pc.t, 1.0);
    for (const auto& path : pc.paths) {
      if (path.destination == i) fn.add_linear(path.r, 0.0);
    }
    pc.objective_rows.push_back(pc.problem.constraints.size());
    push(pc, std::move(fn), Family::ObjectiveBound);
  }
  return pc;
}

void refresh_objective(const ProgramC& program, BarrierProblem& problem, const Eigen::VectorXd& v) {
  for (int i = 0; i < program.n(); ++i) {
    SmoothFunction& row = problem.constraints[program.objective_rows[static_cast<std::size_t>(i)]];
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& path : program.paths) {
      if (path.destination == i) top = std::max(top, v(path.r));
    }
    double sum = 0.0;
    for (const auto& path : program.paths) {
      if (path.destination == i) sum += std::exp(v(path.r) - top);
    }
    row.lin.setZero();
    row.lin(row.local(program.t)) = 1.0;
    double neg_entropy = 0.0;
    for (const auto& path : program.paths) {
      if (path.destination != i) continue;
      const double w = std::exp(v(path.r) - top) / sum;
      row.lin(row.local(path.r)) = -w;
      if (w > 0.0) neg_entropy += w * std::log(w);
    }
    row.constant = neg_entropy;
  }
}

void refresh_objective(ProgramC& program, const Eigen::VectorXd& v) {
  refresh_objective(program, program.problem, v);
}

namespace {

// Fills the group, path and objective variables from the geometric ones.
void complete_point(const ProgramC& pc, Eigen::VectorXd& v, bool strict) {
  const double m = strict ? kStartMargin : 0.0;
  std::vector<double> cap(pc.groups.size());
  int source_groups = 0;
  int relay_groups = 0;
  for (const auto& g : pc.groups) (g.transmitter == NodeId::source() ? source_groups : relay_groups)++;
  for (std::size_t gi = 0; gi < pc.groups.size(); ++gi) {
    const auto& g = pc.groups[gi];
    double top = -std::numeric_limits<double>::infinity();
    for (const int u : g.member_nodes) top = std::max(top, v(pc.nodes[static_cast<std::size_t>(u)].d));
    for (const double c : g.member_logs) top = std::max(top, c);
    v(g.M) = top + m;
    double f = 0.0;
    for (const auto& term : g.terms) f += v(term.f);
    if (g.f >= 0) v(g.f) = f - m;
    if (strict) {
      const bool src = g.transmitter == NodeId::source();
      v(g.P) = std::log((src ? pc.P_s : pc.P_r) / ((src ? source_groups : relay_groups) + 1.0));
    }
    cap[gi] = v(g.P) + (g.f >= 0 ? v(g.f) : 0.0) - pc.alpha * v(g.M) - pc.log_noise;
  }
  if (strict) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& path : pc.paths) {
      for (const int g : path.groups) ++count[{path.destination, g}];
    }
    for (const auto& path : pc.paths) {
      double r = std::numeric_limits<double>::infinity();
      for (const int g : path.groups) {
        r = std::min(r, cap[static_cast<std::size_t>(g)] - std::log(count[{path.destination, g}]));
      }
      v(path.r) = r - m;
    }
  }
  BarrierProblem scratch = pc.problem;
  refresh_objective(pc, scratch, v);
  double t = std::numeric_limits<double>::infinity();
  for (int i = 0; i < pc.n(); ++i) {
    const auto& row = scratch.constraints[pc.objective_rows[static_cast<std::size_t>(i)]];
    t = std::min(t, v(pc.t) - row.value(v));
  }
  v(pc.t) = t - m;
}

}  // namespace

Eigen::VectorXd feasible_start(const ProgramC& program, const Point& relay) {
  const Point rho = program.to_scaled(relay);
  if (!inside_polygon(program.hull, rho, -1e-12)) throw InvalidInput("start point is not inside the hull");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(program.problem.size);
  v(program.x) = rho.x();
  v(program.y) = rho.y();
  const double log_floor = std::log(kDistanceClamp / program.scale);
  for (const auto& nv : program.nodes) {
    const double eps = kDistanceClamp / program.scale;
    v(nv.d) = std::max(0.5 * std::log((rho - nv.position).squaredNorm() + eps * eps), log_floor + kStartMargin);
  }
  for (const auto& g : program.groups) {
    for (const auto& term : g.terms) {
      const double z = operand_value(program, term.plus, v) - operand_value(program, term.minus, v) - kZSlack;
      v(term.z) = z;
      v(term.f) = -softplus(std::log(program.gamma) - program.gamma * z) - kStartMargin;
    }
  }
  complete_point(program, v, true);
  return v;
}

Eigen::VectorXd transformed_point(const ProgramC& program, const Point& relay,
                                  const std::vector<double>& group_power,
                                  const std::vector<double>& path_rate) {
  if (group_power.size() != program.groups.size() || path_rate.size() != program.paths.size()) {
    throw InvalidInput("transformed_point: size mismatch");
  }
  const Point rho = program.to_scaled(relay);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(program.problem.size);
  v(program.x) = rho.x();
  v(program.y) = rho.y();
  const double log_floor = std::log(kDistanceClamp / program.scale);
  for (const auto& nv : program.nodes) {
    v(nv.d) = std::max(log_floor, std::log(distance(rho, nv.position)));
  }
  for (std::size_t gi = 0; gi < program.groups.size(); ++gi) {
    const auto& g = program.groups[gi];
    for (const auto& term : g.terms) {
      const double z = operand_true(program, term.plus, rho) - operand_true(program, term.minus, rho);
      v(term.z) = z;
      v(term.f) = -softplus(std::log(program.gamma) - program.gamma * z);
    }
    v(g.P) = std::log(group_power[gi]);
  }
  for (std::size_t k = 0; k < program.paths.size(); ++k) v(program.paths[k].r) = std::log(path_rate[k]);
  complete_point(program, v, false);
  return v;
}

Point relay_of(const ProgramC& program, const Eigen::VectorXd& v) {
  return program.to_world(Point(v(program.x), v(program.y)));
}

double distance_violation(const ProgramC& program, const Eigen::VectorXd& v) {
  const Point rho(v(program.x), v(program.y));
  double worst = 0.0;
  for (const auto& nv : program.nodes) {
    worst = std::max(worst, std::abs(std::exp(v(nv.d)) - distance(rho, nv.position)));
  }
  return worst * program.scale;
}

std::vector<double> program_rates(const ProgramC& program, const Eigen::VectorXd& v) {
  std::vector<double> out(static_cast<std::size_t>(program.n()), 0.0);
  for (const auto& path : program.paths) out[static_cast<std::size_t>(path.destination)] += std::exp(v(path.r));
  return out;
}

}  // namespace relay
