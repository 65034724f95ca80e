#pragma once

#include <Eigen/Eigenvalues>

#include <stdexcept>
#include <string>

#include "fluxmech/core/linalg.hpp"

namespace fluxmech {

/// Eigendecomposition of a Hermitian operator. Values are sorted ascending,
/// vectors are the matching orthonormal columns with a fixed phase convention:
/// in every eigenvector the entry of largest magnitude is real and positive
/// (ties broken by lowest index), so matrix elements are reproducible run to run.
struct EigenSystem {
  RealVector values;
  ComplexMatrix vectors;
};

/// Applies the phase convention in place. Idempotent: the anchor entry is set
/// exactly real, so a second application multiplies by exactly one.
inline void apply_phase_convention(ComplexMatrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index anchor = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const double mag = std::abs(vectors(i, j));
      if (mag > best) {
        best = mag;
        anchor = i;
      }
    }
    if (best <= 0.0) continue;
    const Complex phase = std::conj(vectors(anchor, j)) / best;
    vectors.col(j) *= phase;
    vectors(anchor, j) = best;
  }
}

inline EigenSystem hermitian_eig(const ComplexMatrix& a, double herm_rel_tol = 1e-12) {
  require_hermitian(a, "hermitian_eig", herm_rel_tol);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eig: eigensolver failed to converge for dimension " +
                             std::to_string(a.rows()) + " (hermiticity defect " +
                             std::to_string(hermiticity_defect(a)) + ")");
  }
  EigenSystem sys{solver.eigenvalues(), solver.eigenvectors()};
  apply_phase_convention(sys.vectors);
  return sys;
}

/// Real symmetric fast path; returns the same EigenSystem contract.
inline EigenSystem symmetric_eig(const RealMatrix& a) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric_eig: eigensolver failed to converge for dimension " +
                             std::to_string(a.rows()));
  }
  EigenSystem sys{solver.eigenvalues(), solver.eigenvectors().cast<Complex>()};
  apply_phase_convention(sys.vectors);
  return sys;
}

/// f(A) = V f(Lambda) V^dag by spectral calculus.
template <class F>
ComplexMatrix operator_function(const EigenSystem& sys, F&& f) {
  RealVector fvals(sys.values.size());
  for (Eigen::Index i = 0; i < sys.values.size(); ++i) fvals(i) = f(sys.values(i));
  return sys.vectors * fvals.asDiagonal() * sys.vectors.adjoint();
}

template <class F>
ComplexMatrix operator_function(const ComplexMatrix& a, F&& f) {
  return operator_function(hermitian_eig(a), std::forward<F>(f));
}

} // namespace fluxmech
