#pragma once

#include <Eigen/LU>

#include <stdexcept>
#include <string>

#include "fluxmech/core/linalg.hpp"

namespace fluxmech {

struct LinearSolution {
  ComplexVector x;
  /// Ratio of largest to smallest LU pivot; a cheap order-of-magnitude
  /// condition estimate, not a rigorous condition number.
  double condition_estimate = 0.0;
};

inline LinearSolution solve_linear(const ComplexMatrix& a, const ComplexVector& b) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("solve_linear: matrix must be square");
  }
  if (a.rows() != b.size()) {
    throw std::invalid_argument("solve_linear: dimension mismatch between matrix and rhs");
  }
  Eigen::FullPivLU<ComplexMatrix> lu(a);
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs().eval();
  const double max_pivot = pivots.maxCoeff();
  const double min_pivot = pivots.minCoeff();
  if (lu.rank() < a.rows()) {
    throw std::runtime_error("solve_linear: matrix is singular to working precision (rank " +
                             std::to_string(lu.rank()) + " of " + std::to_string(a.rows()) +
                             ", pivot ratio " +
                             std::to_string(min_pivot > 0 ? max_pivot / min_pivot : 0.0) + ")");
  }
  LinearSolution sol;
  sol.x = lu.solve(b);
  sol.condition_estimate = min_pivot > 0.0 ? max_pivot / min_pivot
                                           : std::numeric_limits<double>::infinity();
  return sol;
}

} // namespace fluxmech
