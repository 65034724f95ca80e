#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace fluxmech {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("hermiticity_defect: matrix is not square");
  }
  return max_abs(a - a.adjoint());
}

/// A matrix counts as Hermitian when max|A - A^dag| <= rel_tol * max|A|.
inline bool is_hermitian(const ComplexMatrix& a, double rel_tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  const double scale = max_abs(a);
  if (scale == 0.0) return true;
  return hermiticity_defect(a) <= rel_tol * scale;
}

inline void require_hermitian(const ComplexMatrix& a, const char* where,
                              double rel_tol = 1e-12) {
  if (!is_hermitian(a, rel_tol)) {
    throw std::invalid_argument(std::string(where) +
                                ": input matrix is not Hermitian (defect " +
                                std::to_string(hermiticity_defect(a)) + ", scale " +
                                std::to_string(max_abs(a)) + ")");
  }
}

/// Kronecker product with the usual block convention, so that
/// (A kron B)(C kron D) = AC kron BD.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace ops {

inline ComplexMatrix identity(int n) { return ComplexMatrix::Identity(n, n); }

/// Bosonic annihilation operator on an n-dimensional Fock space.
inline ComplexMatrix destroy(int n) {
  ComplexMatrix b = ComplexMatrix::Zero(n, n);
  for (int k = 1; k < n; ++k) b(k - 1, k) = std::sqrt(double(k));
  return b;
}

inline ComplexMatrix create(int n) { return destroy(n).adjoint(); }

inline ComplexMatrix number(int n) {
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) m(k, k) = double(k);
  return m;
}

/// b + b^dag.
inline ComplexMatrix position(int n) {
  ComplexMatrix b = destroy(n);
  return b + ComplexMatrix(b.adjoint());
}

// Two-level operators in the basis (|g>, |e>), index 0 = ground.
inline ComplexMatrix sigma_z() {
  ComplexMatrix m(2, 2);
  m << -1, 0, 0, 1;
  return m;
}

inline ComplexMatrix sigma_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline ComplexMatrix sigma_y() {
  ComplexMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, 1), Complex(0, -1), Complex(0, 0);
  return m;
}

/// sigma_- = |g><e|.
inline ComplexMatrix sigma_minus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

inline ComplexMatrix sigma_plus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

inline ComplexVector basis_ket(int n, int k) {
  ComplexVector v = ComplexVector::Zero(n);
  v(k) = 1.0;
  return v;
}

inline ComplexMatrix projector(int n, int k) {
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  m(k, k) = 1.0;
  return m;
}

} // namespace ops
} // namespace fluxmech
