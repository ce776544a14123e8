#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace relay {

/// g(v) = log sum_m exp(A_m v + b_m) + sum_k s_k exp(v_{e_k}) + c'v + d over a
/// handful of local variables. Any part may be empty.
struct SmoothFunction {
  std::vector<Eigen::Index> vars;  // local -> global
  Eigen::MatrixXd lse_A;           // terms x locals
  Eigen::VectorXd lse_b;
  std::vector<std::pair<int, double>> exps;  // (local index, sign/scale)
  Eigen::VectorXd lin;                        // locals
  double constant = 0.0;

  /// Local index of a global variable, appended when new.
  int local(Eigen::Index global);
  void add_linear(Eigen::Index global, double coef);
  /// Adds one exponent term sum_j coef_j v_j + offset to the log-sum-exp.
  void add_lse_term(const std::vector<std::pair<Eigen::Index, double>>& coefs, double offset);
  void add_exp(Eigen::Index global, double scale);

  double value(const Eigen::VectorXd& v) const;
  /// Value, local gradient and local Hessian.
  double evaluate(const Eigen::VectorXd& v, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const;
};

/// Two-sided penalty rho (cosh(p h) - 1) with h = log(q), q = (|(x, y) - anchor|^2
/// + eps2) exp(-2 d). Zero iff d equals the log of the (smoothed) distance.
struct NormPenalty {
  Eigen::Index x = 0;
  Eigen::Index y = 0;
  Eigen::Index d = 0;
  Eigen::Vector2d anchor = Eigen::Vector2d::Zero();
  double eps2 = 0.0;
  double p = 1.0;
  double rho = 1.0;

  double ratio(const Eigen::VectorXd& v) const;  // q
  double value(const Eigen::VectorXd& v) const;
  /// Value, gradient and Hessian with respect to (x, y, d).
  double evaluate(const Eigen::VectorXd& v, Eigen::Vector3d& grad, Eigen::Matrix3d& hess) const;
};

/// minimize c'v + sum penalties  subject to  g_j(v) <= 0.
struct BarrierProblem {
  Eigen::Index size = 0;
  Eigen::VectorXd cost;
  std::vector<SmoothFunction> constraints;
  std::vector<NormPenalty> penalties;

  double objective(const Eigen::VectorXd& v) const;
  /// max_j g_j(v); strictly negative at interior points.
  double max_constraint(const Eigen::VectorXd& v) const;
};

struct BarrierOptions {
  double mu0 = 1.0;
  double mu_factor = 0.2;
  double kkt_tol = 1e-7;
  int max_iter = 500;
  /// Called at the start of every barrier stage with the current iterate; may
  /// rewrite constraint data as long as the iterate stays strictly feasible.
  std::function<void(BarrierProblem&, const Eigen::VectorXd&)> on_stage;
  /// Called after every Newton step (iteration, mu, objective, kkt).
  std::function<void(int, double, double, double)> on_iteration;
};

struct BarrierResult {
  Eigen::VectorXd v;
  int iterations = 0;
  double kkt = 0.0;
  double mu = 0.0;
  bool converged = false;
};

/// Primal-dual log-barrier method with damped Newton steps on the barrier
/// merit. The Hessian is shifted until positive definite, so nonconvex
/// constraints are tolerated (local solutions). `start` must be strictly
/// feasible.
BarrierResult solve_barrier(BarrierProblem problem, const Eigen::VectorXd& start,
                            const BarrierOptions& options);

}  // namespace relay
