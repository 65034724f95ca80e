#include <catch2/catch.hpp>

#include <cmath>

#include "fluxmech/fluxonium.hpp"

using namespace fluxmech;

TEST_CASE("harmonic limit: evenly spaced levels at sqrt(8 E_L E_C)") {
  FluxoniumParams p;
  p.e_j = 0.0;
  const EigenSystem sys = fluxonium_eigensystem(p, FluxBias{0.23});
  const double spacing = p.harmonic_spacing();
  CHECK(spacing == Approx(0.894427e9).epsilon(1e-6));
  for (int k = 1; k < 6; ++k) {
    CHECK(sys.values(k) - sys.values(k - 1) == Approx(spacing).epsilon(1e-10));
  }
}

TEST_CASE("half-flux splitting lands in the few-MHz range") {
  FluxoniumParams p;
  const EigenSystem sys = fluxonium_eigensystem(p, FluxBias{0.5});
  const double splitting = sys.values(1) - sys.values(0);
  CHECK(splitting == Approx(4e6).epsilon(0.30));
}

TEST_CASE("spectra are periodic in one flux quantum") {
  FluxoniumParams p;
  PhaseOscillatorBasis basis(p);
  for (double f : {0.0, 0.17, 0.5, 0.83}) {
    const RealVector a = fluxonium_eigensystem(basis, FluxBias{f}).values.head(6);
    const RealVector b = fluxonium_eigensystem(basis, FluxBias{f + 1.0}).values.head(6);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6 * a.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("spectrum sweep is reflection symmetric about half flux") {
  FluxoniumParams p;
  const SpectrumTrace trace = spectrum_sweep(p, {FluxBias{0.4}, FluxBias{0.5}, FluxBias{0.6}});
  for (int k = 0; k < p.n_levels; ++k) {
    const auto& col = trace.column("level_" + std::to_string(k)).values;
    const double scale = std::max(std::abs(col[0]), 1.0);
    CHECK(std::abs(col[0] - col[2]) <= 1e-8 * scale);
  }
}

TEST_CASE("ground-to-f transition at the near-zero crossing flux") {
  // The e/f pair nearly touches at zero flux (their splitting is sub-MHz);
  // the manifold sits 3.772 GHz above the ground state at phi_e = 0.0004.
  FluxoniumParams p;
  PhaseOscillatorBasis basis(p);
  const RealVector at_zero = fluxonium_eigensystem(basis, FluxBias{0.0}).values;
  CHECK(at_zero(2) - at_zero(1) < 1e6);  // nearly touching pair
  const RealVector at_cross = fluxonium_eigensystem(basis, FluxBias{0.0004}).values;
  CHECK(at_cross(2) - at_cross(0) == Approx(3.772e9).epsilon(0.01));
}

TEST_CASE("single-point sweep reduces to the direct diagonalization") {
  FluxoniumParams p;
  const SpectrumTrace trace = spectrum_sweep(p, {FluxBias{0.31}});
  const EigenSystem direct = hermitian_eig(build_hamiltonian(p, FluxBias{0.31}));
  for (int k = 0; k < p.n_levels; ++k) {
    CHECK(trace.column("level_" + std::to_string(k)).values[0] ==
          Approx(direct.values(k) - direct.values(0)).margin(1e-3));
  }
}

TEST_CASE("flux gauges produce the same spectrum") {
  // Placing the external flux in the quadratic term instead of the cosine is a
  // unitary displacement; eigenvalues must agree far below the 1e-8 gate.
  FluxoniumParams p;
  PhaseOscillatorBasis b(p);
  const int n = p.basis_size;
  for (double f : {0.13, 0.3, 0.5}) {
    const double theta = kTwoPi * f;
    const RealMatrix h_quad = 4.0 * p.e_c * b.charge_sq() - p.e_j * b.shifted_cosine(0.0) +
                              0.5 * p.e_l *
                                  (b.phi_sq() - 2.0 * theta * b.phi() +
                                   theta * theta * RealMatrix::Identity(n, n));
    const RealVector e_cos = fluxonium_eigensystem(b, FluxBias{f}).values.head(6);
    const RealVector e_quad = symmetric_eig(h_quad).values.head(6);
    CHECK((e_cos - e_quad).cwiseAbs().maxCoeff() <= 1e-8 * e_cos.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("oscillator ground state is a Gaussian of width phi_zpf") {
  FluxoniumParams p;
  p.e_j = 0.0;
  const int n_pts = 801;
  std::vector<double> grid(n_pts);
  const double span = 8.0;
  for (int i = 0; i < n_pts; ++i) grid[i] = -span + 2.0 * span * i / (n_pts - 1);
  const WavefunctionSamples w = wavefunction_on_grid(p, FluxBias{0.0}, 0, grid);

  const double ell = p.phi_zpf();
  double norm = 0.0;
  for (int i = 0; i + 1 < n_pts; ++i) {
    norm += 0.5 * (w.psi[i] * w.psi[i] + w.psi[i + 1] * w.psi[i + 1]) * (grid[i + 1] - grid[i]);
  }
  CHECK(norm == Approx(1.0).margin(1e-6));
  for (int i = 0; i < n_pts; i += 100) {
    const double expected = std::exp(-grid[i] * grid[i] / (2.0 * ell * ell)) /
                            std::pow(kTwoPi / 2.0 * ell * ell, 0.25);
    CHECK(std::abs(w.psi[i]) - std::abs(expected) == Approx(0.0).margin(1e-6));
  }
}

TEST_CASE("half-flux wavefunctions have definite parity") {
  FluxoniumParams p;
  const int n_pts = 401;
  std::vector<double> grid(n_pts);
  for (int i = 0; i < n_pts; ++i) grid[i] = -6.0 + 12.0 * i / (n_pts - 1);
  const WavefunctionSamples g = wavefunction_on_grid(p, FluxBias{0.5}, 0, grid);
  const WavefunctionSamples e = wavefunction_on_grid(p, FluxBias{0.5}, 1, grid);
  double even_defect = 0.0, odd_defect = 0.0, scale_g = 0.0, scale_e = 0.0;
  for (int i = 0; i < n_pts; ++i) {
    const int j = n_pts - 1 - i;
    even_defect = std::max(even_defect, std::abs(g.psi[i] - g.psi[j]));
    odd_defect = std::max(odd_defect, std::abs(e.psi[i] + e.psi[j]));
    scale_g = std::max(scale_g, std::abs(g.psi[i]));
    scale_e = std::max(scale_e, std::abs(e.psi[i]));
  }
  CHECK(even_defect <= 1e-8 * scale_g);
  CHECK(odd_defect <= 1e-8 * scale_e);
}

TEST_CASE("retained wavefunctions are normalized on a dense grid") {
  FluxoniumParams p;
  const int n_pts = 2001;
  std::vector<double> grid(n_pts);
  for (int i = 0; i < n_pts; ++i) grid[i] = -14.0 + 28.0 * i / (n_pts - 1);
  for (int level = 0; level < p.n_levels; ++level) {
    const WavefunctionSamples w = wavefunction_on_grid(p, FluxBias{0.5}, level, grid);
    double norm = 0.0;
    for (int i = 0; i + 1 < n_pts; ++i) {
      norm += 0.5 * (w.psi[i] * w.psi[i] + w.psi[i + 1] * w.psi[i + 1]) * (grid[i + 1] - grid[i]);
    }
    CHECK(norm == Approx(1.0).margin(1e-4));
  }
}

TEST_CASE("wavefunction grid beyond the basis reach is rejected") {
  FluxoniumParams p;
  const double reach = 8.0 * p.phi_zpf() * std::sqrt(double(p.basis_size));
  CHECK_THROWS_AS(wavefunction_on_grid(p, FluxBias{0.5}, 0, {0.0, reach * 1.01}),
                  std::invalid_argument);
}

TEST_CASE("phase matrix elements at phi_e = 0.3") {
  FluxoniumParams p;
  const MatrixElementTable table = phase_matrix_elements(p, {FluxBias{0.3}}, 2);
  const ComplexMatrix& m = table.elements[0];
  CHECK(m(0, 0).real() == Approx(-1.801).epsilon(0.02));
  CHECK(m(1, 1).real() == Approx(4.2).epsilon(0.02));
  CHECK(std::abs(m(0, 1)) == Approx(0.008).epsilon(0.25));
  CHECK(m(0, 1) == std::conj(m(1, 0)));  // exact by construction
  CHECK(m(0, 0).imag() == 0.0);
  CHECK(m(1, 1).imag() == 0.0);
}

TEST_CASE("parity selection zeroes the diagonal elements at half flux") {
  FluxoniumParams p;
  const MatrixElementTable table = phase_matrix_elements(p, {FluxBias{0.5}}, 2);
  CHECK(std::abs(table.elements[0](0, 0)) < 1e-6);
  CHECK(std::abs(table.elements[0](1, 1)) < 1e-6);
}

TEST_CASE("matrix element sum rule converges from below") {
  FluxoniumParams p;
  p.n_levels = 12;
  PhaseOscillatorBasis basis(p);
  const EigenSystem sys = fluxonium_eigensystem(basis, FluxBias{0.3});
  const ComplexVector ground = sys.vectors.col(0);
  const RealMatrix phi = basis.phi();
  const double exact = (ground.adjoint() * (phi * phi).cast<Complex>() * ground)(0, 0).real();
  double partial = 0.0;
  double prev = -1.0;
  for (int k = 0; k < p.n_levels; ++k) {
    const Complex elem = (sys.vectors.col(k).adjoint() * phi.cast<Complex>() * ground)(0, 0);
    partial += std::norm(elem);
    CHECK(partial >= prev);          // monotone
    CHECK(partial <= exact * (1.0 + 1e-12));  // from below
    prev = partial;
  }
  CHECK(partial == Approx(exact).epsilon(1e-4));
}

TEST_CASE("coupling constant and zero-point displacement") {
  CouplingSetup setup;
  setup.b_field = 1e-3;
  CHECK(setup.g_phi() == Approx(1049.8).epsilon(0.005));
  CHECK(setup.mech.x_zp() == Approx(43e-15).epsilon(0.01));
}

TEST_CASE("coupling rates: g_z vanishes at half flux, g_x peaks there") {
  CouplingSetup setup;
  setup.b_field = 0.1;
  const auto grid = flux_grid(0.46, 0.54, 17);
  const SpectrumTrace trace = coupling_rates(setup, grid);
  const auto& gx = trace.column("g_x").values;
  const auto& gz = trace.column("g_z").values;
  const size_t mid = 8;  // phi_e = 0.5
  CHECK(std::abs(gz[mid]) <= 1e-6 * setup.g_phi());
  for (size_t i = 0; i < gx.size(); ++i) CHECK(gx[mid] >= gx[i] - 1e-9);
}

TEST_CASE("couplings are linear in the applied field") {
  CouplingSetup setup;
  setup.b_field = 0.05;
  CouplingSetup doubled = setup;
  doubled.b_field = 0.1;
  const auto grid = flux_grid(0.2, 0.4, 3);
  const SpectrumTrace a = coupling_rates(setup, grid);
  const SpectrumTrace b = coupling_rates(doubled, grid);
  CHECK(doubled.g_phi() == Approx(2.0 * setup.g_phi()).epsilon(1e-14));
  for (size_t i = 0; i < a.x.size(); ++i) {
    CHECK(b.column("g_x").values[i] == Approx(2.0 * a.column("g_x").values[i]).margin(1e-9));
    CHECK(b.column("g_z").values[i] == Approx(2.0 * a.column("g_z").values[i]).margin(1e-9));
  }
}

TEST_CASE("coupling rates match a recomputation from the element table") {
  CouplingSetup setup;
  setup.b_field = 0.1;
  const auto grid = flux_grid(0.1, 0.9, 9);
  const SpectrumTrace trace = coupling_rates(setup, grid);
  const MatrixElementTable table = phase_matrix_elements(setup.fluxonium, grid, 2);
  for (size_t i = 0; i < grid.size(); ++i) {
    const double gx = setup.g_phi() * std::abs(table.elements[i](0, 1));
    const double gz =
        setup.g_phi() * 0.5 * (table.elements[i](1, 1).real() - table.elements[i](0, 0).real());
    CHECK(trace.column("g_x").values[i] == gx);
    CHECK(trace.column("g_z").values[i] == gz);
  }
}

TEST_CASE("basis convergence report") {
  FluxoniumParams p;
  const ConvergenceReport good = check_convergence(p, FluxBias{0.5});
  CHECK(good.converged);
  CHECK(good.max_drift_hz < 1e3);

  FluxoniumParams exact = p;
  exact.e_j = 0.0;
  const ConvergenceReport harmonic = check_convergence(exact, FluxBias{0.2});
  CHECK(harmonic.max_drift_hz < 1e-3);

  FluxoniumParams tiny = p;
  tiny.basis_size = 8;
  tiny.n_levels = 2;
  const ConvergenceReport bad = check_convergence(tiny, FluxBias{0.5});
  CHECK_FALSE(bad.converged);
}

TEST_CASE("static mechanical frequency shift is a negligible diagnostic") {
  CouplingSetup setup;
  setup.b_field = 0.0;
  CHECK(mech_frequency_shift(setup) == 0.0);

  setup.b_field = 0.05;
  const double at_half = mech_frequency_shift(setup);
  setup.b_field = 0.1;
  const double at_full = mech_frequency_shift(setup);
  CHECK(at_full == Approx(4.0 * at_half).epsilon(1e-12));  // scales as B^2
  INFO("shift at 100 mT = " << at_full << " Hz");
  CHECK(at_full / setup.mech.omega_m < 1e-2);
}

TEST_CASE("qubit frequency is first-order flux-insensitive at half flux") {
  FluxoniumParams p;
  PhaseOscillatorBasis basis(p);
  auto gap = [&](double f) {
    const RealVector v = fluxonium_eigensystem(basis, FluxBias{f}).values;
    return v(1) - v(0);
  };
  const double d = 1e-4;
  const double first = gap(0.5 + d) - gap(0.5 - d);
  const double second = gap(0.5 + d) - 2.0 * gap(0.5) + gap(0.5 - d);
  CHECK(std::abs(first) < std::abs(second));
}
