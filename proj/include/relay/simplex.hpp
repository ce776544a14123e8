#pragma once

#include <Eigen/Core>

namespace relay {

/// maximize c'x  subject to  A x <= b, x >= 0, with b >= 0 so the origin is a
/// feasible basis.
struct LinearProgram {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

struct LpSolution {
  enum class Status { Optimal, Unbounded, IterationLimit, NumericalFailure };

  Status status = Status::Optimal;
  Eigen::VectorXd x;
  double objective = 0.0;
  int pivots = 0;
};

/// Dense tableau simplex. Dantzig pricing, switching to Bland's rule after a
/// run of degenerate pivots; deterministic for a given program.
LpSolution solve_lp(const LinearProgram& program, int max_pivots = 20000);

}  // namespace relay
