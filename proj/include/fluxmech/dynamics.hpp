#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluxmech/core/constants.hpp"
#include "fluxmech/core/eigen_system.hpp"
#include "fluxmech/core/linalg.hpp"
#include "fluxmech/core/linear_solve.hpp"
#include "fluxmech/core/ode.hpp"
#include "fluxmech/core/parallel.hpp"
#include "fluxmech/core/trace.hpp"
#include "fluxmech/fluxonium.hpp"

namespace fluxmech {

/// Hamiltonian (Hz) plus weighted collapse operators. Rates are quoted the
/// same way every frequency is: as rate / 2pi in Hz. The generator produced by
/// build_liouvillian carries the 2pi, so propagation times are plain seconds.
struct CollapseChannel {
  ComplexMatrix op;
  double rate = 0.0;  // Hz
};

struct LindbladModel {
  ComplexMatrix hamiltonian;
  std::vector<CollapseChannel> collapse;
  std::vector<int> dims;  // subsystem factorization, product must equal dim

  int dim() const { return int(hamiltonian.rows()); }

  void validate() const {
    require_hermitian(hamiltonian, "LindbladModel");
    for (const auto& c : collapse) {
      if (c.rate < 0.0) throw std::invalid_argument("LindbladModel: negative collapse rate");
      if (c.op.rows() != dim() || c.op.cols() != dim()) {
        throw std::invalid_argument("LindbladModel: collapse operator dimension mismatch");
      }
    }
    if (!dims.empty()) {
      int prod = 1;
      for (int d : dims) prod *= d;
      if (prod != dim()) {
        throw std::invalid_argument("LindbladModel: subsystem dims do not factor the dimension");
      }
    }
  }
};

/// Column-stacking vectorization (Eigen's native storage order).
inline ComplexVector vectorize(const ComplexMatrix& rho) {
  return Eigen::Map<const ComplexVector>(rho.data(), rho.size());
}

inline ComplexMatrix unvectorize(const ComplexVector& v, int d) {
  if (v.size() != Eigen::Index(d) * d) {
    throw std::invalid_argument("unvectorize: length is not a perfect square of the dimension");
  }
  return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

/// Direct evaluation of the master equation right-hand side, in 1/s.
inline ComplexMatrix lindblad_rhs(const LindbladModel& model, const ComplexMatrix& rho) {
  const Complex i_unit(0.0, 1.0);
  ComplexMatrix out = -i_unit * (model.hamiltonian * rho - rho * model.hamiltonian);
  for (const auto& c : model.collapse) {
    if (c.rate == 0.0) continue;
    const ComplexMatrix cdc = c.op.adjoint() * c.op;
    out += c.rate * (c.op * rho * ComplexMatrix(c.op.adjoint()) - 0.5 * (cdc * rho + rho * cdc));
  }
  return kTwoPi * out;
}

/// Superoperator matrix acting on vectorized density matrices, in 1/s.
/// vec(A rho B) = (B^T kron A) vec(rho).
inline ComplexMatrix build_liouvillian(const LindbladModel& model) {
  model.validate();
  const int d = model.dim();
  const ComplexMatrix id = ops::identity(d);
  const Complex i_unit(0.0, 1.0);
  ComplexMatrix l = -i_unit * (kron(id, model.hamiltonian) -
                               kron(model.hamiltonian.transpose(), id));
  for (const auto& c : model.collapse) {
    if (c.rate == 0.0) continue;
    const ComplexMatrix cdc = c.op.adjoint() * c.op;
    l += c.rate * (kron(c.op.conjugate(), c.op) - 0.5 * kron(id, cdc) -
                   0.5 * kron(cdc.transpose(), id));
  }
  return kTwoPi * l;
}

inline void require_valid_state(const ComplexMatrix& rho, const char* where,
                                double herm_tol = 1e-10, double trace_tol = 1e-8,
                                double psd_floor = -1e-10) {
  if (hermiticity_defect(rho) > herm_tol * std::max(1.0, max_abs(rho))) {
    throw std::invalid_argument(std::string(where) + ": state is not Hermitian");
  }
  if (std::abs(rho.trace().real() - 1.0) > trace_tol || std::abs(rho.trace().imag()) > trace_tol) {
    throw std::invalid_argument(std::string(where) + ": state trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + ComplexMatrix(rho.adjoint())));
  if (es.eigenvalues().minCoeff() < psd_floor) {
    throw std::invalid_argument(std::string(where) + ": state has eigenvalue " +
                                std::to_string(es.eigenvalues().minCoeff()) +
                                " below the positivity floor");
  }
}

struct EvolveOptions {
  OdeOptions ode{1e-9, 1e-12};
};

/// Density-matrix trajectory at the requested times (seconds). rho0 must be a
/// valid state; trace and Hermiticity ride along exactly up to roundoff since
/// the generator preserves both.
inline std::vector<ComplexMatrix> evolve(const LindbladModel& model, const ComplexMatrix& rho0,
                                         const std::vector<double>& times,
                                         const EvolveOptions& opt = {}) {
  model.validate();
  require_valid_state(rho0, "evolve");
  const ComplexMatrix l = build_liouvillian(model);
  const auto traj = integrate_ode([&](double, const ComplexVector& v) { return (l * v).eval(); },
                                  vectorize(rho0), times, opt.ode);
  std::vector<ComplexMatrix> out;
  out.reserve(traj.size());
  for (const auto& v : traj) out.push_back(unvectorize(v, model.dim()));
  return out;
}

/// Unique stationary state of the Liouvillian. The kernel dimension is checked
/// through the full superoperator spectrum; the state itself comes from a
/// bordered solve that pins the trace to one.
inline ComplexMatrix steady_state(const LindbladModel& model, double residual_tol = 1e-10) {
  model.validate();
  const int d = model.dim();
  const ComplexMatrix l = build_liouvillian(model);

  Eigen::ComplexEigenSolver<ComplexMatrix> es(l);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("steady_state: Liouvillian eigendecomposition failed");
  }
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  int n_zero = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i)) <= 1e-9 * std::max(scale, 1.0)) ++n_zero;
  }
  if (n_zero != 1) {
    throw std::runtime_error("steady_state: Liouvillian kernel is " +
                             std::string(n_zero == 0 ? "empty" : "degenerate") + " (" +
                             std::to_string(n_zero) + " near-zero eigenvalues)");
  }

  // [ L, s vec(I)/d ; s vec(I)^dag, 0 ] [rho; mu/s] = [0; s]; the border is
  // scaled to the Liouvillian magnitude so the pivots stay balanced.
  const int n = d * d;
  const double scale_l = std::max(max_abs(l), 1.0);
  ComplexMatrix bordered = ComplexMatrix::Zero(n + 1, n + 1);
  bordered.topLeftCorner(n, n) = l;
  const ComplexVector trace_row = vectorize(ops::identity(d));
  bordered.block(0, n, n, 1) = scale_l * trace_row / double(d);
  bordered.block(n, 0, 1, n) = scale_l * trace_row.adjoint();
  ComplexVector rhs = ComplexVector::Zero(n + 1);
  rhs(n) = scale_l;
  const LinearSolution sol = solve_linear(bordered, rhs);
  ComplexMatrix rho = unvectorize(sol.x.head(n), d);
  rho = 0.5 * (rho + ComplexMatrix(rho.adjoint())).eval();
  rho /= rho.trace().real();

  const double residual = (l * vectorize(rho)).norm();
  const double l_scale = std::max(max_abs(l), 1.0);
  if (residual > residual_tol * l_scale) {
    throw std::runtime_error("steady_state: residual " + std::to_string(residual / l_scale) +
                             " exceeds tolerance");
  }
  return rho;
}

/// One-sided fluctuation spectrum of a Hermitian observable in steady state:
///   S(nu) = integral_0^inf dtau e^{i 2 pi nu tau} < dA(tau) dA(0) >_ss,
/// dA = A - <A>_ss, computed by quantum regression through the resolvent of
/// the Liouvillian. The returned values have units of seconds; the grid is an
/// ordinary-frequency grid in Hz.
inline SpectrumTrace correlation_spectrum(const LindbladModel& model, const ComplexMatrix& obs,
                                          const std::vector<double>& freq_grid,
                                          const ComplexMatrix* steady = nullptr, int threads = 1) {
  model.validate();
  require_hermitian(obs, "correlation_spectrum", 1e-10);
  const int d = model.dim();
  const ComplexMatrix rho_ss = steady ? *steady : steady_state(model);
  const ComplexMatrix l = build_liouvillian(model);

  const Complex mean = (obs * rho_ss).trace();
  const ComplexMatrix d_obs = obs - mean * ops::identity(d);
  const ComplexVector source = vectorize((d_obs * rho_ss).eval());
  const ComplexVector weight = vectorize(d_obs.adjoint().eval());

  const int n = d * d;
  const ComplexVector trace_row = vectorize(ops::identity(d));
  const double scale_l = std::max(max_abs(l), 1.0);
  std::vector<Complex> values(freq_grid.size());
  parallel_for(
      freq_grid.size(),
      [&](size_t i) {
        const double omega = kTwoPi * freq_grid[i];
        // Bordered resolvent: deflates the stationary mode so the solve stays
        // well conditioned through omega = 0. The border carries the
        // Liouvillian magnitude to keep the pivots balanced.
        ComplexMatrix bordered = ComplexMatrix::Zero(n + 1, n + 1);
        bordered.topLeftCorner(n, n) = l + Complex(0.0, omega) * ComplexMatrix::Identity(n, n);
        bordered.block(0, n, n, 1) = scale_l * vectorize(rho_ss);
        bordered.block(n, 0, 1, n) = scale_l * trace_row.adjoint();
        ComplexVector rhs = ComplexVector::Zero(n + 1);
        rhs.head(n) = source;
        LinearSolution sol;
        try {
          sol = solve_linear(bordered, rhs);
        } catch (const std::runtime_error& e) {
          throw std::runtime_error("correlation_spectrum: resolvent solve failed at " +
                                   std::to_string(freq_grid[i]) + " Hz: " + e.what());
        }
        values[i] = -(weight.dot(sol.x.head(n)));
      },
      threads);

  SpectrumTrace trace;
  trace.x_name = "omega";
  trace.x_unit = "Hz";
  trace.add_metadata("generator", "dynamics.correlation_spectrum");
  trace.add_metadata("version", kVersion);
  trace.x = freq_grid;
  auto& re = trace.add_column("re_s", "s");
  auto& im = trace.add_column("im_s", "s");
  for (const auto& v : values) {
    re.values.push_back(v.real());
    im.values.push_back(v.imag());
  }
  return trace;
}

/// Driven two-level qubit in the rotating frame of its drive:
///   H = -(delta_q / 2) sigma_z + (eps_r / 2) sigma_x
/// with thermal relaxation Gamma(n_q + 1) D[sigma_-] + Gamma n_q D[sigma_+]
/// and pure dephasing Gamma_phi D[sigma_z / 2]. The dephasing normalization
/// makes the total coherence decay Gamma_q / 2 with
/// Gamma_q = Gamma(2 n_q + 1) + Gamma_phi, matching the mean-field module.
/// The drive amplitude convention makes sqrt(delta_q^2 + eps_r^2) the dressed
/// splitting, so the optimal sideband point delta_q = -sqrt(omega_m^2 -
/// eps_r^2) puts the spectral peaks at exactly +-omega_m.
inline LindbladModel make_driven_qubit_model(double gamma, double gamma_phi, double n_q,
                                             double delta_q, double eps_r) {
  LindbladModel model;
  model.hamiltonian = -0.5 * delta_q * ops::sigma_z() + 0.5 * eps_r * ops::sigma_x();
  model.collapse = {{ops::sigma_minus(), gamma * (n_q + 1.0)},
                    {ops::sigma_plus(), gamma * n_q},
                    {ComplexMatrix(0.5 * ops::sigma_z()), gamma_phi}};
  model.dims = {2};
  return model;
}

inline SpectrumTrace qubit_spectral_density(const LindbladModel& model,
                                            const std::vector<double>& freq_grid,
                                            int threads = 1) {
  if (model.dim() != 2) {
    throw std::invalid_argument("qubit_spectral_density: expected a two-level model");
  }
  return correlation_spectrum(model, ops::sigma_z(), freq_grid, nullptr, threads);
}

/// Inputs for the adiabatic-elimination cooling pipeline. All rates in Hz.
struct CoolingInput {
  double gamma = 2e6;        // qubit energy relaxation Gamma
  double gamma_phi = 0.9e6;  // qubit pure dephasing
  double n_q = 0.0;          // qubit bath occupation
  double eps_r = 0.0;        // red-detuned drive amplitude
  double delta_q = 0.0;      // drive detuning omega_r - omega_q
  double g_z = 0.0;          // longitudinal coupling
  double omega_m = 6e6;      // mechanical frequency
  double gamma_m = 5.0;      // mechanical decay
  double n_m = 0.0;          // mechanical bath occupation
};

/// Qubit-induced rates and the resulting steady phonon number:
///   Gamma_q^-+ = g_z^2 Re S(+-omega_m),   delta omega_m from Im S,
///   n_ss = (Gamma_q^+ + gamma_m n_m) / (Gamma_q^- - Gamma_q^+ + gamma_m).
struct CoolingReport {
  double gamma_q_minus = 0.0;   // Hz
  double gamma_q_plus = 0.0;    // Hz
  double delta_omega_m = 0.0;   // Hz
  double n_steady = 0.0;
  bool heating = false;         // set when the denominator is non-positive
  double s_re_plus = 0.0;       // Re S(+omega_m), seconds
  double s_re_minus = 0.0;      // Re S(-omega_m), seconds
};

inline CoolingReport cooling_rates(const CoolingInput& in) {
  const LindbladModel qubit =
      make_driven_qubit_model(in.gamma, in.gamma_phi, in.n_q, in.delta_q, in.eps_r);
  const SpectrumTrace s = qubit_spectral_density(qubit, {-in.omega_m, in.omega_m});
  const double re_minus = s.column("re_s").values[0];  // S(-omega_m)
  const double re_plus = s.column("re_s").values[1];
  const double im_minus = s.column("im_s").values[0];
  const double im_plus = s.column("im_s").values[1];

  // The golden-rule rates carry the two-sided spectrum 2 Re S of the
  // one-sided transform computed above; a further 2pi appears because both
  // g_z and the reported rates are /2pi values.
  CoolingReport report;
  report.s_re_plus = re_plus;
  report.s_re_minus = re_minus;
  report.gamma_q_minus = 2.0 * kTwoPi * in.g_z * in.g_z * re_plus;
  report.gamma_q_plus = 2.0 * kTwoPi * in.g_z * in.g_z * re_minus;
  report.delta_omega_m = kTwoPi * in.g_z * in.g_z * (im_plus - im_minus);
  const double denom = report.gamma_q_minus - report.gamma_q_plus + in.gamma_m;
  if (denom > 0.0) {
    report.n_steady = (report.gamma_q_plus + in.gamma_m * in.n_m) / denom;
  } else {
    report.heating = true;
    report.n_steady = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

/// Mean phonon number under dn/dt = -(G- - G+ + gamma_m) n + G+ + gamma_m n_m,
/// integrated with the shared adaptive integrator.
inline SpectrumTrace cooling_trajectory(const CoolingReport& rates, const CoolingInput& in,
                                        double n0, const std::vector<double>& times) {
  const double decay = kTwoPi * (rates.gamma_q_minus - rates.gamma_q_plus + in.gamma_m);  // 1/s
  const double feed = kTwoPi * (rates.gamma_q_plus + in.gamma_m * in.n_m);                // 1/s
  ComplexVector y0(1);
  y0(0) = n0;
  const auto traj = integrate_ode(
      [&](double, const ComplexVector& y) {
        ComplexVector dy(1);
        dy(0) = -decay * y(0) + feed;
        return dy;
      },
      y0, times, OdeOptions{1e-10, 1e-14});
  SpectrumTrace trace;
  trace.x_name = "time";
  trace.x_unit = "s";
  trace.add_metadata("generator", "dynamics.cooling_trajectory");
  trace.add_metadata("version", kVersion);
  trace.x = times;
  auto& col = trace.add_column("mean_phonon", "1");
  for (const auto& y : traj) col.values.push_back(y(0).real());
  return trace;
}

/// Two-level qubit exchanging a single excitation with the phonon mode.
/// The exchange (Jaynes-Cummings) coupling form is the idealized resonant
/// model; the full form keeps every phase matrix element against (b + b^dag).
struct RabiSetup {
  double omega_q = 6e6;   // qubit splitting, Hz
  double omega_m = 6e6;   // mechanical frequency, Hz
  double g_x = 0.0;       // exchange coupling, Hz
  bool full_coupling = false;
  ComplexMatrix phi;      // 2x2 phase matrix elements (full form only)
  double g_phi = 0.0;     // Hz (full form only)
  double drive_amp = 0.0; // Omega_d, Hz; cosine drive at omega_q when nonzero
  double gamma = 0.0;     // qubit relaxation, Hz
  double gamma_phi = 0.0; // qubit dephasing, Hz
  double n_q = 0.0;       // qubit bath occupation
  double gamma_m = 0.0;   // mechanical decay, Hz
  double n_m = 0.0;       // mechanical bath occupation
  int n_fock = 4;
};

inline LindbladModel make_rabi_model(const RabiSetup& setup) {
  const int m = setup.n_fock;
  const ComplexMatrix id_q = ops::identity(2);
  const ComplexMatrix id_m = ops::identity(m);
  const ComplexMatrix b = ops::destroy(m);

  LindbladModel model;
  model.hamiltonian = kron(setup.omega_q * ops::projector(2, 1), id_m) +
                      kron(id_q, setup.omega_m * ops::number(m));
  if (setup.full_coupling) {
    if (setup.phi.rows() != 2 || setup.phi.cols() != 2) {
      throw std::invalid_argument("make_rabi_model: full coupling needs a 2x2 phi table");
    }
    model.hamiltonian += setup.g_phi * kron(setup.phi, ops::position(m));
  } else {
    model.hamiltonian +=
        setup.g_x * (kron(ops::sigma_plus(), b) + kron(ops::sigma_minus(), ComplexMatrix(b.adjoint())));
  }
  model.collapse = {{kron(ops::sigma_minus(), id_m), setup.gamma * (setup.n_q + 1.0)},
                    {kron(ops::sigma_plus(), id_m), setup.gamma * setup.n_q},
                    {kron(ComplexMatrix(0.5 * ops::sigma_z()), id_m), setup.gamma_phi},
                    {kron(id_q, b), setup.gamma_m * (setup.n_m + 1.0)},
                    {kron(id_q, ComplexMatrix(b.adjoint())), setup.gamma_m * setup.n_m}};
  model.dims = {2, m};
  return model;
}

/// Excited-state population P_e(t) starting from |e, 0>. The optional probe
/// drive is the plain cosine Omega_d cos(2 pi omega_q t) sigma_x, integrated
/// without a rotating-wave approximation.
inline SpectrumTrace rabi_simulation(const RabiSetup& setup, const std::vector<double>& times,
                                     const OdeOptions& ode = {1e-9, 1e-13}) {
  const LindbladModel model = make_rabi_model(setup);
  const int d = model.dim();
  const ComplexMatrix l0 = build_liouvillian(model);

  ComplexMatrix drive_super;
  const bool driven = setup.drive_amp != 0.0;
  if (driven) {
    const ComplexMatrix hd = kron(setup.drive_amp * ops::sigma_x(), ops::identity(setup.n_fock));
    const ComplexMatrix id = ops::identity(d);
    drive_super = Complex(0.0, -kTwoPi) * (kron(id, hd) - kron(hd.transpose(), id));
  }

  ComplexMatrix rho0 = ComplexMatrix::Zero(d, d);
  const int e0 = 1 * setup.n_fock + 0;
  rho0(e0, e0) = 1.0;

  const double drive_angular = kTwoPi * setup.omega_q;
  const auto traj = integrate_ode(
      [&](double t, const ComplexVector& v) {
        ComplexVector dv = l0 * v;
        if (driven) dv += std::cos(drive_angular * t) * (drive_super * v);
        return dv;
      },
      vectorize(rho0), times, ode);

  SpectrumTrace trace;
  trace.x_name = "time";
  trace.x_unit = "s";
  trace.add_metadata("generator", "dynamics.rabi_simulation");
  trace.add_metadata("version", kVersion);
  trace.x = times;
  auto& pe = trace.add_column("p_e", "1");
  auto& n_ph = trace.add_column("mean_phonon", "1");
  for (const auto& v : traj) {
    const ComplexMatrix rho = unvectorize(v, d);
    double pop = 0.0;
    for (int n = 0; n < setup.n_fock; ++n) {
      pop += rho(setup.n_fock + n, setup.n_fock + n).real();
    }
    pe.values.push_back(pop);
    double phonons = 0.0;
    for (int q = 0; q < 2; ++q) {
      for (int n = 0; n < setup.n_fock; ++n) {
        phonons += n * rho(q * setup.n_fock + n, q * setup.n_fock + n).real();
      }
    }
    n_ph.values.push_back(phonons);
  }
  return trace;
}

/// Diabatic flux sweep bookkeeping: the sweep is modeled as instantaneous, so
/// the state is re-expressed as |e, 0> in the end-point eigenbasis. The rate
/// check guards that assumption: the sweep must finish well inside the
/// relaxation times of both subsystems.
struct FluxSweepProtocol {
  FluxBias start;
  FluxBias end;
  double rate_phi0_per_s = 0.0;
  double sweep_time_s = 0.0;
  bool diabatic_ok = true;
  std::string note;
};

inline FluxSweepProtocol flux_sweep_protocol(FluxBias start, FluxBias end, double rate_phi0_per_s,
                                             double gamma_m_hz, double gamma_q_hz) {
  if (!(rate_phi0_per_s > 0.0)) {
    throw std::invalid_argument("flux_sweep_protocol: sweep rate must be positive");
  }
  FluxSweepProtocol p;
  p.start = start;
  p.end = end;
  p.rate_phi0_per_s = rate_phi0_per_s;
  p.sweep_time_s = std::abs(end.phi_e - start.phi_e) / rate_phi0_per_s;
  const double fastest_decay = kTwoPi * std::max(gamma_m_hz, gamma_q_hz);  // 1/s
  p.diabatic_ok = p.sweep_time_s * fastest_decay < 0.01;
  if (!p.diabatic_ok) {
    p.note = "sweep time " + std::to_string(p.sweep_time_s) +
             " s is not fast against the decay time " + std::to_string(1.0 / fastest_decay) +
             " s; adiabatic corrections are not modeled";
  }
  return p;
}

} // namespace fluxmech
