#include "relay/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "relay/errors.hpp"

namespace relay {

constexpr double kCentering = 1e-2;
constexpr int kSocSteps = 4;  // full-step attempts with second-order corrections  // stage ends when the merit gap is below this times mu

int SmoothFunction::local(Eigen::Index global) {
  const auto it = std::find(vars.begin(), vars.end(), global);
  if (it != vars.end()) return static_cast<int>(it - vars.begin());
  vars.push_back(global);
  const Eigen::Index k = static_cast<Eigen::Index>(vars.size());
  lin.conservativeResize(k);
  lin(k - 1) = 0.0;
  if (lse_A.rows() > 0) {
    lse_A.conservativeResize(Eigen::NoChange, k);
    lse_A.col(k - 1).setZero();
  } else {
    lse_A.resize(0, k);
  }
  return static_cast<int>(k - 1);
}

void SmoothFunction::add_linear(Eigen::Index global, double coef) { lin(local(global)) += coef; }

void SmoothFunction::add_lse_term(const std::vector<std::pair<Eigen::Index, double>>& coefs,
                                  double offset) {
  for (const auto& [g, c] : coefs) local(g);
  const Eigen::Index row = lse_A.rows();
  lse_A.conservativeResize(row + 1, static_cast<Eigen::Index>(vars.size()));
  lse_A.row(row).setZero();
  for (const auto& [g, c] : coefs) lse_A(row, local(g)) += c;
  lse_b.conservativeResize(row + 1);
  lse_b(row) = offset;
}

void SmoothFunction::add_exp(Eigen::Index global, double scale) {
  exps.emplace_back(local(global), scale);
}

double SmoothFunction::value(const Eigen::VectorXd& v) const {
  const Eigen::Index k = static_cast<Eigen::Index>(vars.size());
  Eigen::VectorXd x(k);
  for (Eigen::Index i = 0; i < k; ++i) x(i) = v(vars[static_cast<std::size_t>(i)]);
  double g = constant + lin.dot(x);
  if (lse_A.rows() > 0) {
    const Eigen::VectorXd e = lse_A * x + lse_b;
    const double m = e.maxCoeff();
    g += m + std::log((e.array() - m).exp().sum());
  }
  for (const auto& [i, s] : exps) g += s * std::exp(x(i));
  return g;
}

double SmoothFunction::evaluate(const Eigen::VectorXd& v, Eigen::VectorXd& grad,
                                Eigen::MatrixXd& hess) const {
  const Eigen::Index k = static_cast<Eigen::Index>(vars.size());
  Eigen::VectorXd x(k);
  for (Eigen::Index i = 0; i < k; ++i) x(i) = v(vars[static_cast<std::size_t>(i)]);
  double g = constant + lin.dot(x);
  grad = lin;
  hess = Eigen::MatrixXd::Zero(k, k);
  if (lse_A.rows() > 0) {
    const Eigen::VectorXd e = lse_A * x + lse_b;
    const double m = e.maxCoeff();
    Eigen::VectorXd w = (e.array() - m).exp();
    const double sum = w.sum();
    g += m + std::log(sum);
    w /= sum;
    const Eigen::VectorXd mean = lse_A.transpose() * w;
    grad += mean;
    hess += lse_A.transpose() * w.asDiagonal() * lse_A - mean * mean.transpose();
  }
  for (const auto& [i, s] : exps) {
    const double ex = s * std::exp(x(i));
    g += ex;
    grad(i) += ex;
    hess(i, i) += ex;
  }
  return g;
}

double NormPenalty::ratio(const Eigen::VectorXd& v) const {
  const double dx = v(x) - anchor.x(), dy = v(y) - anchor.y();
  return (dx * dx + dy * dy + eps2) * std::exp(-2.0 * v(d));
}

double NormPenalty::value(const Eigen::VectorXd& v) const {
  return rho * (std::cosh(p * std::log(ratio(v))) - 1.0);
}

double NormPenalty::evaluate(const Eigen::VectorXd& v, Eigen::Vector3d& grad,
                             Eigen::Matrix3d& hess) const {
  const double dx = v(x) - anchor.x(), dy = v(y) - anchor.y();
  const double s = dx * dx + dy * dy + eps2;
  const double h = std::log(s) - 2.0 * v(d);
  const double value = rho * (std::cosh(p * h) - 1.0);
  const double dh = rho * p * std::sinh(p * h);
  const double d2h = rho * p * p * std::cosh(p * h);
  const Eigen::Vector3d gh(2.0 * dx / s, 2.0 * dy / s, -2.0);
  Eigen::Matrix3d hh = Eigen::Matrix3d::Zero();
  hh(0, 0) = 2.0 / s - 4.0 * dx * dx / (s * s);
  hh(1, 1) = 2.0 / s - 4.0 * dy * dy / (s * s);
  hh(0, 1) = hh(1, 0) = -4.0 * dx * dy / (s * s);
  grad = dh * gh;
  hess = d2h * gh * gh.transpose();
  // The log-distance curvature term is indefinite; keep it only where it is
  // positive semidefinite.
  const Eigen::Matrix3d curv = dh * hh;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(curv);
  hess += eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
  return value;
}

double BarrierProblem::objective(const Eigen::VectorXd& v) const {
  double f = cost.dot(v);
  for (const auto& pen : penalties) f += pen.value(v);
  return f;
}

double BarrierProblem::max_constraint(const Eigen::VectorXd& v) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) {
    const double g = c.value(v);
    if (!std::isfinite(g)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, g);
  }
  return worst;
}

namespace {

// Barrier merit f0 + mu * sum -log(-g); +inf outside the interior.
double merit(const BarrierProblem& problem, const Eigen::VectorXd& v, double mu) {
  double f = problem.objective(v);
  for (const auto& c : problem.constraints) {
    const double g = c.value(v);
    if (!(g < 0.0)) return std::numeric_limits<double>::infinity();
    f -= mu * std::log(-g);
  }
  return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
}

struct Linearization {
  double merit = 0.0;
  Eigen::VectorXd grad;  // gradient of the merit
  Eigen::MatrixXd hess;  // primal-dual Hessian
  std::vector<double> slack;
  std::vector<Eigen::VectorXd> cgrad;  // local constraint gradients
};

// Merit gradient uses mu / s; the Hessian uses the multiplier estimates
// (lambda / s for the outer products), which keeps it well scaled near the
// boundary.
void linearize(const BarrierProblem& problem, const Eigen::VectorXd& v, double mu,
               const Eigen::VectorXd& lambda, Linearization& lin) {
  lin.grad = problem.cost;
  lin.hess.setZero(problem.size, problem.size);
  lin.merit = problem.cost.dot(v);
  Eigen::Vector3d pg;
  Eigen::Matrix3d ph;
  for (const auto& pen : problem.penalties) {
    lin.merit += pen.evaluate(v, pg, ph);
    const Eigen::Index idx[3] = {pen.x, pen.y, pen.d};
    for (int i = 0; i < 3; ++i) {
      lin.grad(idx[i]) += pg(i);
      for (int j = 0; j < 3; ++j) lin.hess(idx[i], idx[j]) += ph(i, j);
    }
  }
  const std::size_t m = problem.constraints.size();
  lin.slack.resize(m);
  lin.cgrad.resize(m);
  Eigen::MatrixXd lh;
  for (std::size_t c = 0; c < m; ++c) {
    const auto& con = problem.constraints[c];
    const double s = -con.evaluate(v, lin.cgrad[c], lh);
    // Drop the concave exponential curvature.
    for (const auto& [i, sc] : con.exps) {
      if (sc < 0.0) lh(i, i) -= sc * std::exp(v(con.vars[static_cast<std::size_t>(i)]));
    }
    lin.slack[c] = s;
    lin.merit -= mu * std::log(s);
    const double lam = lambda(static_cast<Eigen::Index>(c));
    const Eigen::VectorXd& lg = lin.cgrad[c];
    const Eigen::Index k = static_cast<Eigen::Index>(con.vars.size());
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::Index gi = con.vars[static_cast<std::size_t>(i)];
      lin.grad(gi) += mu / s * lg(i);
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::Index gj = con.vars[static_cast<std::size_t>(j)];
        lin.hess(gi, gj) += lam / s * lg(i) * lg(j) + lam * lh(i, j);
      }
    }
  }
}

// Keeps each multiplier within a factor of the primal estimate mu / s.
void safeguard(Eigen::VectorXd& lambda, const std::vector<double>& slack, double mu) {
  constexpr double kappa = 1e10;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    const double primal = mu / slack[static_cast<std::size_t>(j)];
    lambda(j) = std::clamp(lambda(j), primal / kappa, primal * kappa);
  }
}

}  // namespace

BarrierResult solve_barrier(BarrierProblem problem, const Eigen::VectorXd& start,
                            const BarrierOptions& options) {
  if (start.size() != problem.size || problem.cost.size() != problem.size) {
    throw DegenerateProgram("barrier problem dimension mismatch");
  }
  if (!(problem.max_constraint(start) < 0.0)) {
    throw DegenerateProgram("barrier start is not strictly feasible");
  }

  BarrierResult out;
  out.v = start;
  double mu = options.mu0;
  const Eigen::Index m = static_cast<Eigen::Index>(problem.constraints.size());
  Eigen::VectorXd lambda(m);
  for (Eigen::Index j = 0; j < m; ++j) lambda(j) = -mu / problem.constraints[static_cast<std::size_t>(j)].value(start);
  Linearization lin;
  Eigen::LDLT<Eigen::MatrixXd> ldlt;

  while (true) {
    if (options.on_stage) options.on_stage(problem, out.v);
    bool stage_done = false;
    while (out.iterations < options.max_iter) {
      linearize(problem, out.v, mu, lambda, lin);
      const double scale = std::max(1.0, std::abs(problem.objective(out.v)));

      // Shift until the Newton system is positive definite and gives descent.
      Eigen::VectorXd step;
      const double diag = std::max(1.0, lin.hess.diagonal().cwiseAbs().maxCoeff());
      double shift = 0.0;
      for (int attempt = 0; attempt < 40; ++attempt) {
        Eigen::MatrixXd h = lin.hess;
        if (shift > 0.0) h.diagonal().array() += shift;
        ldlt.compute(h);
        if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
          step = ldlt.solve(-lin.grad);
          if (step.allFinite() && step.dot(lin.grad) < 0.0) break;
        }
        step.resize(0);
        shift = shift == 0.0 ? 1e-10 * diag : shift * 10.0;
      }
      if (step.size() == 0) break;
      // Half the squared Newton decrement estimates the merit gap to the
      // central point; together with mu it bounds the suboptimality.
      const double decrement = -step.dot(lin.grad);
      out.kkt = std::max(0.5 * decrement / scale, mu);
      if (0.5 * decrement <= std::max(options.kkt_tol, kCentering * mu) * scale) {
        stage_done = true;
        break;
      }

      // Multiplier step and the largest length keeping them positive.
      Eigen::VectorXd dlambda(m);
      double t_max = 1.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto& con = problem.constraints[static_cast<std::size_t>(j)];
        const Eigen::VectorXd& lg = lin.cgrad[static_cast<std::size_t>(j)];
        double dg = 0.0;
        for (std::size_t i = 0; i < con.vars.size(); ++i) dg += lg(static_cast<Eigen::Index>(i)) * step(con.vars[i]);
        const double s = lin.slack[static_cast<std::size_t>(j)];
        dlambda(j) = mu / s - lambda(j) + lambda(j) / s * dg;
        if (dlambda(j) < 0.0) t_max = std::min(t_max, -0.995 * lambda(j) / dlambda(j));
        // Fraction to the boundary on the linearized slack.
        if (dg > 0.0) t_max = std::min(t_max, 0.995 * s / dg);
      }

      // Second-order correction: when the full step fails, fold the
      // curvature excess of each constraint into the linearized slack and
      // solve again with the same factorization.
      double t = t_max;
      bool moved = false;
      Eigen::VectorXd soc = step;
      for (int k = 0; k < kSocSteps; ++k) {
        const Eigen::VectorXd trial = out.v + t_max * soc;
        if (merit(problem, trial, mu) <= lin.merit - 1e-4 * t_max * decrement) {
          lambda += t_max * dlambda;
          out.v = trial;
          moved = true;
          break;
        }
        Eigen::VectorXd rhs = lin.grad;
        bool any = false;
        for (Eigen::Index j = 0; j < m; ++j) {
          const auto& con = problem.constraints[static_cast<std::size_t>(j)];
          const Eigen::VectorXd& lg = lin.cgrad[static_cast<std::size_t>(j)];
          double dg = 0.0;
          for (std::size_t i = 0; i < con.vars.size(); ++i) dg += lg(static_cast<Eigen::Index>(i)) * t_max * soc(con.vars[i]);
          const double s = lin.slack[static_cast<std::size_t>(j)];
          const double excess = con.value(trial) + s - dg;  // g(trial) - linear model
          if (!(excess > 0.0)) continue;
          const double c = std::isfinite(excess) ? excess / t_max : s / t_max;
          any = true;
          for (std::size_t i = 0; i < con.vars.size(); ++i) {
            rhs(con.vars[i]) += lambda(j) / s * c * lg(static_cast<Eigen::Index>(i));
          }
        }
        if (!any) break;
        soc = ldlt.solve(-rhs);
        if (!soc.allFinite()) break;
      }
      for (int ls = 0; ls < 80 && !moved; ++ls) {
        const Eigen::VectorXd trial = out.v + t * step;
        const double ft = merit(problem, trial, mu);
        // Allow for rounding in the merit once the predicted decrease is tiny.
        const double slop = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(lin.merit);
        if (ft <= lin.merit - 1e-4 * t * decrement + slop) {
          out.v = trial;
          lambda += t * dlambda;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      ++out.iterations;
      if (options.on_iteration) options.on_iteration(out.iterations, mu, problem.objective(out.v), out.kkt);
      if (!moved) {
        stage_done = true;
        break;
      }
      std::vector<double> slack(static_cast<std::size_t>(m));
      for (Eigen::Index j = 0; j < m; ++j) slack[static_cast<std::size_t>(j)] = -problem.constraints[static_cast<std::size_t>(j)].value(out.v);
      safeguard(lambda, slack, mu);
      // A short step leaves the multipliers where they were, and stale
      // multipliers misjudge the barrier curvature that cut the step. Restart
      // them from the primal estimate.
      if (t < 0.1) {
        for (Eigen::Index j = 0; j < m; ++j) lambda(j) = mu / slack[static_cast<std::size_t>(j)];
      }
    }
    out.mu = mu;
    if (!stage_done) break;  // iteration budget exhausted
    if (mu <= options.kkt_tol) {
      out.converged = out.kkt <= options.kkt_tol;
      break;
    }
    mu *= options.mu_factor;
  }
  return out;
}

}  // namespace relay
