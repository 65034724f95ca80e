#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "fluxmech/core/eigen_system.hpp"
#include "fluxmech/core/linalg.hpp"
#include "fluxmech/core/linear_solve.hpp"
#include "fluxmech/core/ode.hpp"
#include "fluxmech/fluxonium.hpp"

using namespace fluxmech;

namespace {

ComplexMatrix random_hermitian(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ComplexMatrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = Complex(dist(rng), dist(rng));
  }
  return 0.5 * (a + ComplexMatrix(a.adjoint()));
}

ComplexMatrix random_complex(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ComplexMatrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = Complex(dist(rng), dist(rng));
  }
  return a;
}

} // namespace

TEST_CASE("hermitian_eig on diagonal Pauli-z") {
  ComplexMatrix pz(2, 2);
  pz << 1, 0, 0, -1;
  const EigenSystem sys = hermitian_eig(pz);
  CHECK(sys.values(0) == Approx(-1.0));
  CHECK(sys.values(1) == Approx(1.0));
  CHECK(std::abs(sys.vectors(1, 0)) == Approx(1.0));
  CHECK(std::abs(sys.vectors(0, 1)) == Approx(1.0));
}

TEST_CASE("hermitian_eig on a 1x1 real matrix") {
  ComplexMatrix a(1, 1);
  a << 3.25;
  const EigenSystem sys = hermitian_eig(a);
  CHECK(sys.values(0) == Approx(3.25));
  CHECK(sys.vectors(0, 0).real() == Approx(1.0));
}

TEST_CASE("position operator spectrum is symmetric about zero") {
  // Brute-force eigensolve of the tridiagonal (a + a^dag) in a 60-dim basis.
  const int n = 60;
  ComplexMatrix x = ops::position(n);
  const EigenSystem sys = hermitian_eig(x);
  for (int k = 0; k < n; ++k) {
    CHECK(sys.values(k) == Approx(-sys.values(n - 1 - k)).margin(1e-10));
  }
}

TEST_CASE("hermitian_eig rejects non-Hermitian input") {
  ComplexMatrix a(2, 2);
  a << 1, 2, 3, 4;
  CHECK_THROWS_AS(hermitian_eig(a), std::invalid_argument);
}

TEST_CASE("eigendecomposition reconstructs the input") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const ComplexMatrix a = random_hermitian(24, seed);
    const EigenSystem sys = hermitian_eig(a);
    const ComplexMatrix rebuilt =
        sys.vectors * sys.values.asDiagonal() * ComplexMatrix(sys.vectors.adjoint());
    CHECK(max_abs(rebuilt - a) <= 1e-10 * max_abs(a));
    // Orthonormality.
    const ComplexMatrix overlap = sys.vectors.adjoint() * sys.vectors;
    CHECK(max_abs(overlap - ops::identity(24)) < 1e-10);
    // Values ascending.
    for (int k = 1; k < 24; ++k) CHECK(sys.values(k) >= sys.values(k - 1));
  }
}

TEST_CASE("phase convention is exactly idempotent") {
  ComplexMatrix v = random_complex(12, 77);
  for (int j = 0; j < 12; ++j) v.col(j).normalize();
  apply_phase_convention(v);
  ComplexMatrix again = v;
  apply_phase_convention(again);
  CHECK(max_abs(again - v) == 0.0);
}

TEST_CASE("operator_function identity and cosine of zero") {
  const ComplexMatrix a = random_hermitian(8, 5);
  CHECK(max_abs(operator_function(a, [](double x) { return x; }) - a) < 1e-12 * max_abs(a));

  const ComplexMatrix zero = ComplexMatrix::Zero(6, 6);
  const ComplexMatrix cz = operator_function(zero, [](double x) { return std::cos(x); });
  CHECK(max_abs(cz - ops::identity(6)) < 1e-12);
}

TEST_CASE("operator cosine on a diagonal matrix matches entrywise cosine") {
  ComplexMatrix d = ComplexMatrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i) d(i, i) = 0.3 * i - 0.7;
  const ComplexMatrix c = operator_function(d, [](double x) { return std::cos(x); });
  for (int i = 0; i < 5; ++i) CHECK(c(i, i).real() == Approx(std::cos(0.3 * i - 0.7)).margin(1e-12));
}

TEST_CASE("spectral cosine converges in the oscillator basis") {
  // Lowest six circuit eigenvalues built through operator_function at two
  // basis sizes agree to better than 1 kHz.
  FluxoniumParams p;
  auto levels_at = [&](int basis) {
    PhaseOscillatorBasis b(p, basis);
    const ComplexMatrix phi = b.phi().cast<Complex>();
    const ComplexMatrix h = 4.0 * p.e_c * b.charge_sq().cast<Complex>() -
                            p.e_j * operator_function(phi, [](double x) { return std::cos(x); }) +
                            0.5 * p.e_l * b.phi_sq().cast<Complex>();
    return hermitian_eig(h).values.head(6).eval();
  };
  const RealVector small = levels_at(120);
  const RealVector large = levels_at(140);
  CHECK((small - large).cwiseAbs().maxCoeff() < 1e3);
}

TEST_CASE("operator_function composes") {
  const ComplexMatrix a = random_hermitian(10, 9);
  auto f = [](double x) { return std::cos(x); };
  auto g = [](double x) { return x * x; };
  const ComplexMatrix fg = operator_function(a, [&](double x) { return f(g(x)); });
  const ComplexMatrix two_step = operator_function(operator_function(a, g), f);
  CHECK(max_abs(fg - two_step) < 1e-10 * std::max(1.0, max_abs(fg)));
}

TEST_CASE("kron identities") {
  CHECK(max_abs(kron(ops::identity(2), ops::identity(3)) - ops::identity(6)) == 0.0);

  ComplexMatrix pz(2, 2);
  pz << 1, 0, 0, -1;
  ComplexMatrix expect = ComplexMatrix::Zero(4, 4);
  expect(0, 0) = 1;
  expect(1, 1) = 1;
  expect(2, 2) = -1;
  expect(3, 3) = -1;
  CHECK(max_abs(kron(pz, ops::identity(2)) - expect) == 0.0);
}

TEST_CASE("kron mixed product and associativity") {
  const ComplexMatrix a = random_complex(3, 11), b = random_complex(3, 12);
  const ComplexMatrix c = random_complex(3, 13), d = random_complex(3, 14);
  CHECK(max_abs(kron(a, b) * kron(c, d) - kron(ComplexMatrix(a * c), ComplexMatrix(b * d))) < 1e-12);
  CHECK(max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))) < 1e-12);
}

TEST_CASE("solve_linear basics") {
  const ComplexVector b = ComplexVector::Random(6);
  CHECK((solve_linear(ops::identity(6), b).x - b).norm() < 1e-14);

  ComplexMatrix d = ComplexMatrix::Zero(4, 4);
  ComplexVector rhs(4);
  for (int i = 0; i < 4; ++i) {
    d(i, i) = 1.0 + i;
    rhs(i) = Complex(i, -i);
  }
  const ComplexVector x = solve_linear(d, rhs).x;
  for (int i = 0; i < 4; ++i) CHECK(std::abs(x(i) - rhs(i) / d(i, i)) < 1e-14);
}

TEST_CASE("solve_linear matches the explicit inverse") {
  const ComplexMatrix a = random_complex(8, 21);
  const ComplexVector b = ComplexVector::Random(8);
  const LinearSolution sol = solve_linear(a, b);
  const ComplexVector via_inverse = a.inverse() * b;
  CHECK((sol.x - via_inverse).norm() < 1e-10 * via_inverse.norm());
  CHECK((a * sol.x - b).norm() <= 1e-10 * b.norm());
  CHECK(sol.condition_estimate >= 1.0);
}

TEST_CASE("solve_linear reports singular matrices") {
  ComplexMatrix a = ComplexMatrix::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;  // rank 2
  ComplexVector b = ComplexVector::Ones(3);
  CHECK_THROWS_AS(solve_linear(a, b), std::runtime_error);
}

TEST_CASE("integrate_ode reproduces exponential decay") {
  ComplexVector y0(1);
  y0(0) = 1.0;
  const std::vector<double> times{0.0, 1.0};
  const auto traj = integrate_ode(
      [](double, const ComplexVector& y) { return (-y).eval(); }, y0, times, OdeOptions{1e-10, 1e-14});
  CHECK(std::abs(traj.back()(0).real() - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("integrate_ode conserves oscillator energy over 100 cycles") {
  ComplexVector y0(2);
  y0 << 1.0, 0.0;  // (x, v)
  const double t_end = 100.0 * kTwoPi;
  const std::vector<double> times{0.0, t_end};
  const auto traj = integrate_ode(
      [](double, const ComplexVector& y) {
        ComplexVector d(2);
        d << y(1), -y(0);
        return d;
      },
      y0, times, OdeOptions{1e-10, 1e-14});
  const double energy = std::norm(traj.back()(0)) + std::norm(traj.back()(1));
  CHECK(std::abs(energy - 1.0) < 1e-6);
}

TEST_CASE("integrate_ode reports step underflow on hopeless stiffness") {
  ComplexVector y0(1);
  y0(0) = 1.0;
  const std::vector<double> times{0.0, 1.0};
  CHECK_THROWS_WITH(
      integrate_ode([](double, const ComplexVector& y) { return (1e300 * y).eval(); }, y0, times),
      Catch::Contains("stiff"));
}
