#include <cmath>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "relay/barrier.hpp"
#include "relay/errors.hpp"

using namespace relay;

namespace {

BarrierOptions tight() {
  BarrierOptions o;
  o.kkt_tol = 1e-10;
  return o;
}

}  // namespace

TEST_CASE("log-sum-exp disk: symmetric optimum") {
  // min -x - y  s.t.  log(e^{2x} + e^{2y}) <= 0. By symmetry x = y and
  // 2 e^{2x} = 1.
  BarrierProblem prob;
  prob.size = 2;
  prob.cost = Eigen::Vector2d(-1.0, -1.0);
  SmoothFunction g;
  g.add_lse_term({{0, 2.0}}, 0.0);
  g.add_lse_term({{1, 2.0}}, 0.0);
  prob.constraints.push_back(g);

  const auto res = solve_barrier(prob, Eigen::Vector2d(-2.0, -1.0), tight());
  CHECK(res.converged);
  const double x = -0.5 * std::log(2.0);
  CHECK(res.v(0) == doctest::Approx(x).epsilon(1e-6));
  CHECK(res.v(1) == doctest::Approx(x).epsilon(1e-6));
}

TEST_CASE("exponential budget and linear bound") {
  // min -x - y  s.t.  e^x + e^y <= 3,  y <= 0. At the optimum y = 0 and
  // e^x = 2 (both multipliers positive).
  BarrierProblem prob;
  prob.size = 2;
  prob.cost = Eigen::Vector2d(-1.0, -1.0);
  SmoothFunction budget;
  budget.add_exp(0, 1.0);
  budget.add_exp(1, 1.0);
  budget.constant = -3.0;
  prob.constraints.push_back(budget);
  SmoothFunction cap;
  cap.add_linear(1, 1.0);
  prob.constraints.push_back(cap);

  const auto res = solve_barrier(prob, Eigen::Vector2d(-1.0, -1.0), tight());
  CHECK(res.converged);
  CHECK(res.v(0) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(res.v(1) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("smooth function derivatives match finite differences") {
  SmoothFunction g;
  g.add_lse_term({{0, 1.0}, {2, -0.5}}, 0.3);
  g.add_lse_term({{1, 2.0}}, -1.0);
  g.add_exp(2, -0.7);
  g.add_linear(1, 0.25);
  g.constant = 0.1;
  Eigen::VectorXd v(3);
  v << 0.2, -0.4, 0.9;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  const double f = g.evaluate(v, grad, hess);
  CHECK(f == doctest::Approx(g.value(v)));
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
    e(i) = h;
    CHECK(grad(g.local(i)) == doctest::Approx((g.value(v + e) - g.value(v - e)) / (2 * h)).epsilon(1e-6));
    Eigen::VectorXd gp, gm;
    Eigen::MatrixXd scratch;
    g.evaluate(v + e, gp, scratch);
    g.evaluate(v - e, gm, scratch);
    for (int j = 0; j < 3; ++j) {
      CHECK(hess(g.local(j), g.local(i)) == doctest::Approx((gp(g.local(j)) - gm(g.local(j))) / (2 * h)).epsilon(1e-5));
    }
  }
}

TEST_CASE("distance penalty: zero on the curve, gradient, p = 1 identity") {
  NormPenalty pen{0, 1, 2, Eigen::Vector2d(1.0, -2.0), 0.0, 1.0, 3.0};
  Eigen::VectorXd v(3);
  v << 4.0, 2.0, std::log(5.0);  // distance 5
  CHECK(pen.value(v) == doctest::Approx(0.0));

  v(2) = std::log(4.0);
  const double q = pen.ratio(v);
  CHECK(q == doctest::Approx(25.0 / 16.0));
  CHECK(pen.value(v) == doctest::Approx(0.5 * pen.rho * (q + 1.0 / q - 2.0)));

  pen.p = 4.0;
  Eigen::Vector3d grad;
  Eigen::Matrix3d hess;
  pen.evaluate(v, grad, hess);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
    e(i) = h;
    CHECK(grad(i) == doctest::Approx((pen.value(v + e) - pen.value(v - e)) / (2 * h)).epsilon(1e-6));
  }
  // The Hessian model is positive semidefinite.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(hess);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
}

TEST_CASE("infeasible start is rejected") {
  BarrierProblem prob;
  prob.size = 1;
  prob.cost = Eigen::VectorXd::Ones(1);
  SmoothFunction g;
  g.add_linear(0, 1.0);
  prob.constraints.push_back(g);
  CHECK_THROWS_AS(solve_barrier(prob, Eigen::VectorXd::Ones(1), {}), DegenerateProgram);
}

TEST_CASE("iteration budget is reported") {
  BarrierProblem prob;
  prob.size = 2;
  prob.cost = Eigen::Vector2d(-1.0, -1.0);
  SmoothFunction g;
  g.add_lse_term({{0, 2.0}}, 0.0);
  g.add_lse_term({{1, 2.0}}, 0.0);
  prob.constraints.push_back(g);
  BarrierOptions o = tight();
  o.max_iter = 3;
  const auto res = solve_barrier(prob, Eigen::Vector2d(-2.0, -1.0), o);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 3);
  CHECK(prob.max_constraint(res.v) < 0.0);
}
