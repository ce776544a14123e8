#include "relay/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/LU>

#include "relay/errors.hpp"

namespace relay {
namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Basis matrix of [A I] for the given basic columns.
Eigen::MatrixXd basis_matrix(const LinearProgram& program, const std::vector<Eigen::Index>& basis) {
  const Eigen::Index m = program.A.rows();
  const Eigen::Index n = program.A.cols();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = basis[static_cast<std::size_t>(i)];
    if (j < n) B.col(i) = program.A.col(j);
    else B(j - n, i) = 1.0;
  }
  return B;
}

// Rebuilds the tableau from the original data, discarding accumulated rounding.
void refactor(const LinearProgram& program, const std::vector<Eigen::Index>& basis, Tableau& t) {
  const Eigen::Index m = program.A.rows();
  const Eigen::Index n = program.A.cols();
  if (m == 0) return;
  Eigen::MatrixXd full(m, n + m + 1);
  full << program.A, Eigen::MatrixXd::Identity(m, m), program.b;
  const auto lu = basis_matrix(program, basis).partialPivLu();
  t.topRows(m) = lu.solve(full);
  t.col(n + m).head(m) = t.col(n + m).head(m).cwiseMax(0.0);
  Eigen::RowVectorXd cost = Eigen::RowVectorXd::Zero(n + m + 1);
  cost.head(n) = -program.c.transpose();
  Eigen::RowVectorXd cb(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = basis[static_cast<std::size_t>(i)];
    cb(i) = j < n ? program.c(j) : 0.0;
  }
  t.row(m) = cost + cb * t.topRows(m);
}

// Geometric-mean equilibration: alternately divide rows and columns by the
// square root of their largest and smallest significant magnitudes. Entries
// below 1e-12 of the largest one (switched-off capacities) are ignored so they
// cannot drive the factors. Factors are powers of two within 2^+-60, so
// scaling itself adds no rounding.
void equilibrate(const Eigen::MatrixXd& A, Eigen::VectorXd& row, Eigen::VectorXd& col) {
  row = Eigen::VectorXd::Ones(A.rows());
  col = Eigen::VectorXd::Ones(A.cols());
  const double floor = 1e-12 * A.cwiseAbs().maxCoeff();
  auto pow2 = [](double x) { return std::exp2(std::clamp(std::round(std::log2(x)), -60.0, 60.0)); };
  for (int pass = 0; pass < 4; ++pass) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      double lo = INFINITY, hi = 0.0;
      for (Eigen::Index j = 0; j < A.cols(); ++j) {
        if (std::abs(A(i, j)) < floor) continue;
        const double a = std::abs(A(i, j)) * row(i) * col(j);
        {
          lo = std::min(lo, a);
          hi = std::max(hi, a);
        }
      }
      if (hi > 0.0) row(i) *= pow2(1.0 / std::sqrt(lo * hi));
    }
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      double lo = INFINITY, hi = 0.0;
      for (Eigen::Index i = 0; i < A.rows(); ++i) {
        if (std::abs(A(i, j)) < floor) continue;
        const double a = std::abs(A(i, j)) * row(i) * col(j);
        {
          lo = std::min(lo, a);
          hi = std::max(hi, a);
        }
      }
      if (hi > 0.0) col(j) *= pow2(1.0 / std::sqrt(lo * hi));
    }
  }
}

LpSolution solve_scaled(const LinearProgram& program, int max_pivots) {
  const Eigen::Index m = program.A.rows();
  const Eigen::Index n = program.A.cols();

  // Rows 0..m-1 are constraints, row m the objective (reduced costs, negated).
  // Columns: n structural, m slack, then the right-hand side.
  Tableau t = Tableau::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = program.A;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = program.b;
  t.row(m).head(n) = -program.c.transpose();

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  const double scale = std::max(1.0, program.A.cwiseAbs().maxCoeff());
  const double eps = 1e-9 * scale;
  const double cost_eps = 1e-12 * std::max(1.0, program.c.cwiseAbs().maxCoeff());

  LpSolution out;
  int degenerate_run = 0;
  const Eigen::Index cols = n + m;
  while (true) {
    if (out.pivots >= max_pivots) {
      out.status = LpSolution::Status::IterationLimit;
      break;
    }
    const bool bland = degenerate_run > 50;
    Eigen::Index enter = -1;
    double best = -cost_eps;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double rc = t(m, j);
      if (rc < best) {
        enter = j;
        if (bland) break;
        best = rc;
      }
    }
    if (enter < 0) break;

    // Minimum ratio; among ties prefer the largest pivot (smallest basis index
    // under Bland's rule).
    Eigen::Index leave = -1;
    double ratio = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = t(i, enter);
      if (a <= eps) continue;
      const double r = t(i, cols) / a;
      const double tie = 1e-12 * std::max(1.0, std::abs(ratio));
      if (leave < 0 || r < ratio - tie) {
        leave = i;
        ratio = r;
      } else if (r <= ratio + tie) {
        const bool take = bland ? basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)]
                                : a > t(leave, enter);
        if (take) {
          leave = i;
          ratio = std::min(ratio, r);
        }
      }
    }
    if (leave < 0) {
      out.status = LpSolution::Status::Unbounded;
      break;
    }
    degenerate_run = ratio <= 0.0 ? degenerate_run + 1 : 0;

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f != 0.0) t.row(i) -= f * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
    ++out.pivots;
    if (out.pivots % 8 == 0) refactor(program, basis, t);
  }

  // Recompute the basic solution from the original data so that rounding
  // accumulated in the tableau does not leak into x.
  out.x = Eigen::VectorXd::Zero(n);
  if (m > 0) {
    const Eigen::VectorXd xb = basis_matrix(program, basis).partialPivLu().solve(program.b);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index j = basis[static_cast<std::size_t>(i)];
      if (j < n) out.x(j) = xb.allFinite() ? std::max(0.0, xb(i)) : std::max(0.0, t(i, cols));
    }
  }
  out.objective = program.c.dot(out.x);
  if (out.status == LpSolution::Status::Optimal && program.A.rows() > 0) {
    const double residual = (program.A * out.x - program.b).maxCoeff();
    const double tol = 1e-9 * std::max(1.0, program.b.cwiseAbs().maxCoeff()) * std::max(1.0, out.x.cwiseAbs().maxCoeff());
    if (residual > tol) out.status = LpSolution::Status::NumericalFailure;
  }
  return out;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& program, int max_pivots) {
  const Eigen::Index m = program.A.rows();
  const Eigen::Index n = program.A.cols();
  if (program.b.size() != m || program.c.size() != n) throw InvalidInput("LP dimension mismatch");
  if ((program.b.array() < 0.0).any()) throw InvalidInput("LP right-hand side must be nonnegative");

  // Solve R A C y <= R b, maximize (C c)'y, then x = C y.
  Eigen::VectorXd row, col;
  equilibrate(program.A, row, col);
  LinearProgram scaled{row.asDiagonal() * program.A * col.asDiagonal(), row.cwiseProduct(program.b),
                       col.cwiseProduct(program.c)};
  LpSolution out = solve_scaled(scaled, max_pivots);
  out.x = col.cwiseProduct(out.x);
  out.objective = program.c.dot(out.x);
  return out;
}

}  // namespace relay
