#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluxmech/core/constants.hpp"
#include "fluxmech/core/eigen_system.hpp"
#include "fluxmech/core/linalg.hpp"
#include "fluxmech/core/parallel.hpp"
#include "fluxmech/core/trace.hpp"

namespace fluxmech {

/// Circuit energies of the bare qubit, all divided by h (Hz). The kinetic term
/// is 4 E_C n^2, the inductive term E_L phi^2 / 2, the junction -E_J cos(...).
struct FluxoniumParams {
  double e_j = 5.5e9;
  double e_c = 0.5e9;
  double e_l = 0.2e9;
  int basis_size = 120;
  int n_levels = 6;

  void validate() const {
    if (e_j < 0.0 || !(e_c > 0.0) || !(e_l > 0.0)) {
      throw std::invalid_argument("FluxoniumParams: circuit energies must be positive");
    }
    if (basis_size < 4 * n_levels || n_levels < 1) {
      throw std::invalid_argument("FluxoniumParams: basis_size must be at least 4 * n_levels");
    }
  }

  /// Zero-point spread of the phase in the linearized circuit.
  double phi_zpf() const { return std::pow(8.0 * e_c / e_l, 0.25); }

  /// Level spacing of the E_L/E_C oscillator, sqrt(8 E_L E_C), in Hz.
  double harmonic_spacing() const { return std::sqrt(8.0 * e_l * e_c); }
};

/// External flux as a fraction of the flux quantum.
struct FluxBias {
  double phi_e = 0.0;
  double angle() const { return kTwoPi * phi_e; }
};

struct MechanicalParams {
  double omega_m = 6e6;     // mode frequency / 2pi, Hz
  double gamma_m = 5.0;     // energy decay rate / 2pi, Hz
  double mass = 0.75e-15;   // kg
  double length = 40e-6;    // suspended arm, m
  double n_bath = 0.0;      // thermal occupation of the mechanical bath

  void validate() const {
    if (!(omega_m > 0.0) || !(mass > 0.0) || !(length > 0.0)) {
      throw std::invalid_argument("MechanicalParams: omega_m, mass and length must be positive");
    }
    if (gamma_m < 0.0 || n_bath < 0.0) {
      throw std::invalid_argument("MechanicalParams: gamma_m and n_bath must be non-negative");
    }
  }

  /// Zero-point displacement sqrt(hbar / 2 m omega), meters.
  double x_zp() const { return std::sqrt(kHbar / (2.0 * mass * kTwoPi * omega_m)); }
};

/// In-plane field plus the circuit and resonator it couples.
struct CouplingSetup {
  double b_field = 0.1;  // Tesla
  FluxoniumParams fluxonium;
  MechanicalParams mech;

  /// Single-photon coupling g_Phi = E_L * (B l x0 / phi0), Hz. Linear in B.
  double g_phi() const {
    return fluxonium.e_l * b_field * mech.length * mech.x_zp() / kReducedFluxQuantum;
  }
};

/// Harmonic-oscillator basis of the linearized circuit together with the
/// spectral factorization of the phase operator. The factorization is what
/// makes cos(phi + theta) cheap at every flux point: phi is diagonalized once
/// and only the node-wise cosine changes with theta.
class PhaseOscillatorBasis {
 public:
  explicit PhaseOscillatorBasis(const FluxoniumParams& p, int basis_size = 0)
      : params_(p), n_(basis_size > 0 ? basis_size : p.basis_size) {
    params_.validate();
    const double s = p.phi_zpf() / std::sqrt(2.0);  // phi = s (a + a^dag)
    const double t = 0.5 / s;                       // n = i t (a^dag - a)

    phi_ = RealMatrix::Zero(n_, n_);
    for (int k = 1; k < n_; ++k) {
      phi_(k - 1, k) = s * std::sqrt(double(k));
      phi_(k, k - 1) = phi_(k - 1, k);
    }

    // Exact matrix elements of n^2 and phi^2 projected onto the basis.
    charge_sq_ = RealMatrix::Zero(n_, n_);
    phi_sq_ = RealMatrix::Zero(n_, n_);
    for (int k = 0; k < n_; ++k) {
      charge_sq_(k, k) = t * t * (2.0 * k + 1.0);
      phi_sq_(k, k) = s * s * (2.0 * k + 1.0);
      if (k + 2 < n_) {
        const double off = std::sqrt(double(k + 1) * double(k + 2));
        charge_sq_(k, k + 2) = -t * t * off;
        charge_sq_(k + 2, k) = charge_sq_(k, k + 2);
        phi_sq_(k, k + 2) = s * s * off;
        phi_sq_(k + 2, k) = phi_sq_(k, k + 2);
      }
    }

    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(phi_);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("PhaseOscillatorBasis: phase operator diagonalization failed");
    }
    phi_nodes_ = solver.eigenvalues();
    phi_vecs_ = solver.eigenvectors();
  }

  int size() const { return n_; }
  const FluxoniumParams& params() const { return params_; }
  const RealMatrix& phi() const { return phi_; }
  const RealMatrix& phi_sq() const { return phi_sq_; }
  const RealMatrix& charge_sq() const { return charge_sq_; }

  /// cos(phi + theta) via the spectral factorization of phi.
  RealMatrix shifted_cosine(double theta) const {
    RealVector c(n_);
    for (int i = 0; i < n_; ++i) c(i) = std::cos(phi_nodes_(i) + theta);
    return phi_vecs_ * c.asDiagonal() * phi_vecs_.transpose();
  }

  /// H(phi_e) = 4 E_C n^2 - E_J cos(phi + 2 pi phi_e) + E_L phi^2 / 2, Hz.
  RealMatrix hamiltonian(const FluxBias& bias) const {
    return 4.0 * params_.e_c * charge_sq_ - params_.e_j * shifted_cosine(bias.angle()) +
           0.5 * params_.e_l * phi_sq_;
  }

 private:
  FluxoniumParams params_;
  int n_;
  RealMatrix phi_, phi_sq_, charge_sq_;
  RealVector phi_nodes_;
  RealMatrix phi_vecs_;
};

inline ComplexMatrix build_hamiltonian(const FluxoniumParams& p, const FluxBias& bias) {
  return PhaseOscillatorBasis(p).hamiltonian(bias).cast<Complex>();
}

inline EigenSystem fluxonium_eigensystem(const PhaseOscillatorBasis& basis, const FluxBias& bias) {
  return symmetric_eig(basis.hamiltonian(bias));
}

inline EigenSystem fluxonium_eigensystem(const FluxoniumParams& p, const FluxBias& bias) {
  return fluxonium_eigensystem(PhaseOscillatorBasis(p), bias);
}

/// Potential curve V(phi) = -E_J cos(phi + 2 pi phi_e) + E_L phi^2 / 2, Hz.
inline double potential(const FluxoniumParams& p, const FluxBias& bias, double phi) {
  return -p.e_j * std::cos(phi + bias.angle()) + 0.5 * p.e_l * phi * phi;
}

/// Level energies relative to the ground state over a flux grid.
inline SpectrumTrace spectrum_sweep(const FluxoniumParams& p, const std::vector<FluxBias>& grid,
                                    int threads = 1) {
  if (grid.empty()) throw std::invalid_argument("spectrum_sweep: empty flux grid");
  PhaseOscillatorBasis basis(p);
  std::vector<RealVector> levels(grid.size());
  parallel_for(
      grid.size(),
      [&](size_t i) {
        const EigenSystem sys = fluxonium_eigensystem(basis, grid[i]);
        levels[i] = sys.values.head(p.n_levels).array() - sys.values(0);
      },
      threads);

  SpectrumTrace trace;
  trace.x_name = "phi_e";
  trace.x_unit = "Phi0";
  trace.add_metadata("generator", "fluxonium.spectrum_sweep");
  trace.add_metadata("version", kVersion);
  for (const auto& b : grid) trace.x.push_back(b.phi_e);
  for (int k = 0; k < p.n_levels; ++k) {
    auto& col = trace.add_column("level_" + std::to_string(k), "Hz");
    for (size_t i = 0; i < grid.size(); ++i) col.values.push_back(levels[i](k));
  }
  return trace;
}

/// Eigenfunction samples on a phase grid, reconstructed from the oscillator
/// basis (Hermite functions with length scale phi_zpf), plus the potential.
struct WavefunctionSamples {
  std::vector<double> phi;
  std::vector<double> psi;        // real in this gauge once the phase convention is applied
  std::vector<double> potential;  // Hz
  double energy = 0.0;            // Hz, absolute
};

namespace detail {

/// Normalized Hermite functions h_k(xi) = H_k(xi) e^{-xi^2/2} / sqrt(2^k k! sqrt(pi)),
/// evaluated by the stable three-term recurrence.
inline std::vector<double> hermite_functions(int n_max, double xi) {
  std::vector<double> h(n_max);
  h[0] = std::exp(-0.5 * xi * xi) / std::pow(kTwoPi / 2.0, 0.25);
  if (n_max > 1) h[1] = std::sqrt(2.0) * xi * h[0];
  for (int k = 2; k < n_max; ++k) {
    h[k] = std::sqrt(2.0 / k) * xi * h[k - 1] - std::sqrt(double(k - 1) / k) * h[k - 2];
  }
  return h;
}

} // namespace detail

inline WavefunctionSamples wavefunction_on_grid(const FluxoniumParams& p, const FluxBias& bias,
                                                int level, const std::vector<double>& phi_grid) {
  p.validate();
  if (level < 0 || level >= p.n_levels) {
    throw std::invalid_argument("wavefunction_on_grid: level index out of range");
  }
  const double reach = 8.0 * p.phi_zpf() * std::sqrt(double(p.basis_size));
  for (double phi : phi_grid) {
    if (std::abs(phi) > reach) {
      throw std::invalid_argument(
          "wavefunction_on_grid: grid extends beyond +-" + std::to_string(reach) +
          " where the truncated basis is unreliable");
    }
  }
  PhaseOscillatorBasis basis(p);
  const EigenSystem sys = fluxonium_eigensystem(basis, bias);
  const double ell = p.phi_zpf();

  WavefunctionSamples out;
  out.phi = phi_grid;
  out.energy = sys.values(level);
  out.psi.reserve(phi_grid.size());
  out.potential.reserve(phi_grid.size());
  for (double phi : phi_grid) {
    const auto h = detail::hermite_functions(p.basis_size, phi / ell);
    double acc = 0.0;
    for (int k = 0; k < p.basis_size; ++k) acc += sys.vectors(k, level).real() * h[k];
    out.psi.push_back(acc / std::sqrt(ell));
    out.potential.push_back(potential(p, bias, phi));
  }
  return out;
}

/// Phase-operator matrix elements phi_ij over a flux grid, Hermitian by
/// construction, diagonal entries real. Off-diagonal signs follow the
/// eigenvector phase convention; downstream physics uses |phi_ij| or
/// gauge-invariant combinations.
struct MatrixElementTable {
  std::vector<double> phi_e;
  std::vector<ComplexMatrix> elements;  // n_levels x n_levels per flux point
  std::vector<RealVector> energies;     // absolute level energies, Hz
  int n_levels = 0;
};

inline MatrixElementTable phase_matrix_elements(const FluxoniumParams& p,
                                                const std::vector<FluxBias>& grid, int n_levels,
                                                int threads = 1) {
  FluxoniumParams q = p;
  if (n_levels > 0) q.n_levels = n_levels;
  q.validate();
  PhaseOscillatorBasis basis(q);
  MatrixElementTable table;
  table.n_levels = q.n_levels;
  table.phi_e.resize(grid.size());
  table.elements.resize(grid.size());
  table.energies.resize(grid.size());
  const ComplexMatrix phi_full = basis.phi().cast<Complex>();
  parallel_for(
      grid.size(),
      [&](size_t i) {
        const EigenSystem sys = fluxonium_eigensystem(basis, grid[i]);
        const ComplexMatrix v = sys.vectors.leftCols(q.n_levels);
        ComplexMatrix elems = v.adjoint() * phi_full * v;
        elems = 0.5 * (elems + ComplexMatrix(elems.adjoint())).eval();  // exact Hermiticity
        table.phi_e[i] = grid[i].phi_e;
        table.elements[i] = elems;
        table.energies[i] = sys.values.head(q.n_levels);
      },
      threads);
  return table;
}

/// g_x = g_Phi |phi_ge| and g_z = g_Phi (phi_ee - phi_gg)/2 versus flux, Hz.
inline SpectrumTrace coupling_rates(const CouplingSetup& setup, const std::vector<FluxBias>& grid,
                                    int threads = 1) {
  const MatrixElementTable table = phase_matrix_elements(setup.fluxonium, grid, 2, threads);
  const double g = setup.g_phi();
  SpectrumTrace trace;
  trace.x_name = "phi_e";
  trace.x_unit = "Phi0";
  trace.add_metadata("generator", "fluxonium.coupling_rates");
  trace.add_metadata("version", kVersion);
  trace.add_metadata("g_phi_hz", detail::format_full(g));
  trace.add_metadata("x_zp_m", detail::format_full(setup.mech.x_zp()));
  trace.x = table.phi_e;
  auto& gx = trace.add_column("g_x", "Hz");
  auto& gz = trace.add_column("g_z", "Hz");
  for (const auto& m : table.elements) {
    gx.values.push_back(g * std::abs(m(0, 1)));
    gz.values.push_back(g * 0.5 * (m(1, 1).real() - m(0, 0).real()));
  }
  return trace;
}

/// Lowest-level drift between basis_size and 1.25 * basis_size. Report only;
/// converged means every retained level moves by less than 1 kHz.
struct ConvergenceReport {
  int basis_small = 0;
  int basis_large = 0;
  std::vector<double> drift_hz;
  double max_drift_hz = 0.0;
  bool converged = false;
};

inline ConvergenceReport check_convergence(const FluxoniumParams& p, const FluxBias& bias) {
  p.validate();
  ConvergenceReport report;
  report.basis_small = p.basis_size;
  report.basis_large = (p.basis_size * 5 + 3) / 4;
  const EigenSystem small = fluxonium_eigensystem(PhaseOscillatorBasis(p, report.basis_small), bias);
  const EigenSystem large = fluxonium_eigensystem(PhaseOscillatorBasis(p, report.basis_large), bias);
  for (int k = 0; k < p.n_levels; ++k) {
    report.drift_hz.push_back(std::abs(small.values(k) - large.values(k)));
  }
  report.max_drift_hz = *std::max_element(report.drift_hz.begin(), report.drift_hz.end());
  report.converged = report.max_drift_hz < 1e3;
  return report;
}

/// Static shift of the mechanical frequency induced by the coupling,
/// hbar^2 g^2 / (2 E_L m omega_m x0^2) expressed in Hz. Diagnostic only; it is
/// orders of magnitude below omega_m for realistic fields.
inline double mech_frequency_shift(const CouplingSetup& setup) {
  const double g_ang = kTwoPi * setup.g_phi();
  const double omega_ang = kTwoPi * setup.mech.omega_m;
  const double e_l_joule = kPlanck * setup.fluxonium.e_l;
  const double x0 = setup.mech.x_zp();
  const double shift_ang =
      kHbar * kHbar * g_ang * g_ang / (2.0 * e_l_joule * setup.mech.mass * omega_ang * x0 * x0);
  return shift_ang / kTwoPi;
}

/// Uniformly spaced flux grid, inclusive of both ends.
inline std::vector<FluxBias> flux_grid(double lo, double hi, int points) {
  if (points < 1) throw std::invalid_argument("flux_grid: need at least one point");
  std::vector<FluxBias> grid;
  grid.reserve(points);
  if (points == 1) {
    grid.push_back({lo});
    return grid;
  }
  for (int i = 0; i < points; ++i) {
    grid.push_back({lo + (hi - lo) * double(i) / double(points - 1)});
  }
  return grid;
}

} // namespace fluxmech
