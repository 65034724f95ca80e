#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluxmech/core/constants.hpp"
#include "fluxmech/core/linalg.hpp"
#include "fluxmech/core/linear_solve.hpp"
#include "fluxmech/core/parallel.hpp"
#include "fluxmech/core/trace.hpp"

namespace fluxmech {

/// Pump-probe configuration for the longitudinal regime. Every frequency and
/// rate is the /2pi value in Hz. The mechanical mode is a classical degree of
/// freedom here: the factorization <sigma (b + b^dag)> = <sigma><b + b^dag> is
/// baked into the equations of motion, so no Fock truncation appears.
struct PumpProbeConfig {
  double phi_gg = 0.0;   // diagonal phase matrix elements at the working flux
  double phi_ee = 0.0;
  double g_phi = 60e3;   // Hz
  double eps_d = 5e3;    // pump amplitude, Hz
  double eps_p = 5e3;    // probe amplitude, Hz
  double delta_q = -4e6; // pump detuning omega_d - omega_q, Hz
  double gamma = 2e6;    // qubit relaxation Gamma, Hz
  double gamma_phi = 0.9e6;
  double n_q = 0.0;
  double omega_m = 4e6;  // mechanical frequency, Hz
  double gamma_m = 5.0;  // mechanical decay, Hz

  /// Total qubit decoherence rate Gamma(2 n_q + 1) + Gamma_phi.
  double gamma_q() const { return gamma * (2.0 * n_q + 1.0) + gamma_phi; }
  /// phi_- = sqrt(2) g_phi (phi_gg - phi_ee), Hz.
  double phi_minus() const { return std::sqrt(2.0) * g_phi * (phi_gg - phi_ee); }
  /// phi_+ = sqrt(2) g_phi (phi_gg + phi_ee), Hz.
  double phi_plus() const { return std::sqrt(2.0) * g_phi * (phi_gg + phi_ee); }
  /// Weak-drive regime used for the linear sideband expansion.
  bool weak_drive() const { return eps_d < 0.1 * gamma_q() && eps_p < 0.1 * gamma_q(); }
};

/// Mean-field state layout used by the integrator: (Q, P, sigma_-, sigma_+,
/// sigma_z). On physical trajectories Q, P, sigma_z stay real and
/// sigma_+ = conj(sigma_-); the complex container keeps the integrator generic.
inline ComplexVector mean_field_state(double q, double p, Complex sm, Complex sp, Complex sz) {
  ComplexVector v(5);
  v << q, p, sm, sp, sz;
  return v;
}

/// Time-domain mean-field equations with the probe beating at delta_p.
/// Returns d/dt in 1/s; time in seconds.
inline ComplexVector mean_field_rhs(const ComplexVector& state, const PumpProbeConfig& c,
                                    double delta_p, double t) {
  const Complex i_unit(0.0, 1.0);
  const Complex q = state(0), p = state(1), sm = state(2), sp = state(3), sz = state(4);
  const double omega = c.omega_m;
  const double gq = c.gamma_q();
  const double pm = c.phi_minus(), pp = c.phi_plus();
  const Complex probe_m = c.eps_p * std::exp(Complex(0.0, -kTwoPi * delta_p * t));
  const Complex probe_p = std::conj(probe_m);

  ComplexVector d(5);
  d(0) = omega * p;
  d(1) = -omega * q - c.gamma_m * p - 0.5 * pp + 0.5 * pm * sz;
  d(2) = (i_unit * c.delta_q - 0.5 * gq) * sm + i_unit * pm * sm * q + i_unit * c.eps_d * sz +
         i_unit * probe_m * sz;
  d(3) = (-i_unit * c.delta_q - 0.5 * gq) * sp - i_unit * pm * sp * q - i_unit * c.eps_d * sz -
         i_unit * probe_p * sz;
  d(4) = -c.gamma * (2.0 * c.n_q + 1.0) * sz - c.gamma -
         2.0 * i_unit * c.eps_d * (sp - sm) - 2.0 * i_unit * (probe_m * sp - probe_p * sm);
  return kTwoPi * d;
}

/// Self-consistent pump-only fixed point. The qubit inversion shifts the
/// static displacement Q_0, which in turn detunes the qubit through
/// phi_- Q_0, so the pair is iterated to convergence.
struct ZeroOrderSolution {
  double q0 = 0.0;
  double sigma_z0 = 0.0;
  Complex sigma_m0{0.0, 0.0};
  Complex sigma_p0{0.0, 0.0};
  int iterations = 0;
  double residual = 0.0;
};

inline ZeroOrderSolution steady_state_zero_order(const PumpProbeConfig& c,
                                                 double tol = 1e-12, int max_iter = 10000) {
  const double gq = c.gamma_q();
  const double pm = c.phi_minus(), pp = c.phi_plus();
  const double gamma_tot = c.gamma * (2.0 * c.n_q + 1.0);

  ZeroOrderSolution sol;
  sol.sigma_z0 = -1.0 / (2.0 * c.n_q + 1.0);
  sol.q0 = -(pp - pm * sol.sigma_z0) / (2.0 * c.omega_m);
  int it = 0;
  for (; it < max_iter; ++it) {
    const double detuned = c.delta_q + pm * sol.q0;
    const double eta = detuned * detuned + 0.25 * gq * gq;
    const double denom = 2.0 * c.eps_d * c.eps_d * gq + gamma_tot * eta;
    const double sz_new = -c.gamma * eta / denom;
    const double q_new = -(pp - pm * sz_new) / (2.0 * c.omega_m);
    const double step = std::abs(sz_new - sol.sigma_z0) + std::abs(q_new - sol.q0);
    // Damped update keeps the loop stable when phi_- Q0 feedback is strong.
    sol.sigma_z0 = 0.5 * (sol.sigma_z0 + sz_new);
    sol.q0 = 0.5 * (sol.q0 + q_new);
    if (step < tol * std::max(1.0, std::abs(sol.q0))) break;
  }
  sol.iterations = it;
  if (it >= max_iter) {
    throw std::runtime_error(
        "steady_state_zero_order: fixed-point iteration did not converge; "
        "fall back to time integration of mean_field_rhs");
  }

  const double detuned = c.delta_q + pm * sol.q0;
  const double eta = detuned * detuned + 0.25 * gq * gq;
  const double denom = 2.0 * c.eps_d * c.eps_d * gq + gamma_tot * eta;
  sol.sigma_m0 = Complex(0.0, -1.0) * c.eps_d * c.gamma * Complex(0.5 * gq, detuned) / denom;
  sol.sigma_p0 = std::conj(sol.sigma_m0);

  // Residuals of the pump-only steady equations, scaled by the largest rate.
  const Complex i_unit(0.0, 1.0);
  const double scale =
      std::max({gq, std::abs(c.delta_q), c.omega_m, std::abs(pm), std::abs(pp), 1.0});
  const Complex r_sm = (i_unit * c.delta_q - 0.5 * gq) * sol.sigma_m0 +
                       i_unit * pm * sol.sigma_m0 * sol.q0 + i_unit * c.eps_d * sol.sigma_z0;
  const Complex r_sz = -gamma_tot * sol.sigma_z0 - c.gamma -
                       2.0 * i_unit * c.eps_d * (sol.sigma_p0 - sol.sigma_m0);
  const double r_q = -c.omega_m * sol.q0 - 0.5 * pp + 0.5 * pm * sol.sigma_z0;
  sol.residual = std::max({std::abs(r_sm), std::abs(r_sz), std::abs(r_q)}) / scale;
  return sol;
}

/// Sideband amplitudes at the probe beat: the five coefficients of
/// e^{-i delta_p t} in (Q, P, sigma_-, sigma_+, sigma_z).
struct SidebandAmplitudes {
  Complex q, p, sigma_m, sigma_p, sigma_z;
  double condition_estimate = 0.0;
};

inline SidebandAmplitudes solve_probe_sidebands(const PumpProbeConfig& c,
                                                const ZeroOrderSolution& zero, double delta_p) {
  const Complex i_unit(0.0, 1.0);
  const double gq = c.gamma_q();
  const double pm = c.phi_minus();
  const double gamma_tot = c.gamma * (2.0 * c.n_q + 1.0);
  const double detuned = c.delta_q + pm * zero.q0;

  // Uniform rate units cancel row by row, so the system is assembled in Hz.
  ComplexMatrix m = ComplexMatrix::Zero(5, 5);
  ComplexVector rhs = ComplexVector::Zero(5);
  // -i dp Q- = omega P-
  m(0, 0) = -i_unit * delta_p;
  m(0, 1) = -c.omega_m;
  // -i dp P- = -omega Q- - gamma_m P- + (phi_-/2) sz-
  m(1, 0) = c.omega_m;
  m(1, 1) = c.gamma_m - i_unit * delta_p;
  m(1, 4) = -0.5 * pm;
  // (i(dq + pm Q0) + i dp - gq/2) sm- + i pm sm0 Q- + i ed sz- = -i ep sz0
  m(2, 2) = i_unit * (detuned + delta_p) - 0.5 * gq;
  m(2, 0) = i_unit * pm * zero.sigma_m0;
  m(2, 4) = i_unit * c.eps_d;
  rhs(2) = -i_unit * c.eps_p * zero.sigma_z0;
  // (-i(dq + pm Q0) + i dp - gq/2) sp- - i pm sp0 Q- - i ed sz- = 0
  m(3, 3) = i_unit * (delta_p - detuned) - 0.5 * gq;
  m(3, 0) = -i_unit * pm * zero.sigma_p0;
  m(3, 4) = -i_unit * c.eps_d;
  // (i dp - Gamma(2nq+1)) sz- + 2 i ed sm- - 2 i ed sp- = 2 i ep sp0
  m(4, 4) = i_unit * delta_p - gamma_tot;
  m(4, 2) = 2.0 * i_unit * c.eps_d;
  m(4, 3) = -2.0 * i_unit * c.eps_d;
  rhs(4) = 2.0 * i_unit * c.eps_p * zero.sigma_p0;

  LinearSolution sol;
  try {
    sol = solve_linear(m, rhs);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("solve_probe_sidebands: singular system at delta_p = " +
                             std::to_string(delta_p) + " Hz: " + e.what());
  }
  return {sol.x(0), sol.x(1), sol.x(2), sol.x(3), sol.x(4), sol.condition_estimate};
}

/// Zero-order solution under the fast plotting approximations: fully polarized
/// qubit, no static detuning shift. Emitted next to the full solve so the
/// approximation error is visible.
inline ZeroOrderSolution zero_order_approximation(const PumpProbeConfig& c) {
  ZeroOrderSolution sol;
  sol.sigma_z0 = -1.0;
  sol.q0 = 0.0;
  const Complex i_unit(0.0, 1.0);
  sol.sigma_m0 = -i_unit * c.eps_d * sol.sigma_z0 / (i_unit * c.delta_q - 0.5 * c.gamma_q());
  sol.sigma_p0 = std::conj(sol.sigma_m0);
  return sol;
}

/// Probe coherence amplitude |<sigma_-^->| versus probe beat. The transparency
/// dip sits where the beat matches the mechanical frequency.
inline SpectrumTrace probe_response(const PumpProbeConfig& c, const std::vector<double>& delta_p,
                                    bool include_approximation = true, int threads = 1) {
  const ZeroOrderSolution zero = steady_state_zero_order(c);
  const ZeroOrderSolution approx = zero_order_approximation(c);
  std::vector<double> amp(delta_p.size()), amp_approx(delta_p.size());
  parallel_for(
      delta_p.size(),
      [&](size_t i) {
        amp[i] = std::abs(solve_probe_sidebands(c, zero, delta_p[i]).sigma_m);
        if (include_approximation) {
          amp_approx[i] = std::abs(solve_probe_sidebands(c, approx, delta_p[i]).sigma_m);
        }
      },
      threads);

  SpectrumTrace trace;
  trace.x_name = "delta_p";
  trace.x_unit = "Hz";
  trace.add_metadata("generator", "semiclassical.probe_response");
  trace.add_metadata("version", kVersion);
  trace.add_metadata("weak_drive", c.weak_drive() ? "true" : "false");
  trace.add_metadata("sigma_z0", detail::format_full(zero.sigma_z0));
  trace.add_metadata("q0", detail::format_full(zero.q0));
  trace.x = delta_p;
  trace.add_column("amp", "1").values = amp;
  if (include_approximation) trace.add_column("amp_approx", "1").values = amp_approx;
  return trace;
}

/// Transverse (exchange-coupled) probe configuration at the flux sweet spot.
/// gamma_q_total is an explicit knob: the thermal occupation always sets the
/// inversion -1/(2 n_q + 1) and the sigma_z relaxation, while the coherence
/// linewidth may either follow Gamma(2 n_q + 1) + Gamma_phi or be pinned, so
/// thermal amplitude suppression and thermal broadening can be separated.
struct TransverseConfig {
  double omega_q = 4e6;  // Hz
  double omega_m = 4e6;  // Hz
  double gamma = 1e3;    // qubit relaxation Gamma, Hz
  double gamma_phi = 1e3;
  double n_q = 0.0;
  double gamma_m = 5.0;  // Hz
  double g_x = 0.0;      // exchange coupling, Hz
  double eps_p = 1e3;    // probe amplitude, Hz
  double gamma_q_total = -1.0;  // negative = derive as Gamma(2 n_q + 1) + Gamma_phi

  double gamma_q() const {
    return gamma_q_total > 0.0 ? gamma_q_total : gamma * (2.0 * n_q + 1.0) + gamma_phi;
  }
  double sigma_z0() const { return -1.0 / (2.0 * n_q + 1.0); }
};

/// Steady qubit coherence in linear response,
///   |sigma_-(omega_p)| = |eps_p sigma_z0| /
///     |i(omega_q - omega_p) + Gamma_q/2 + g_x^2 |sigma_z0| / (i(omega_m - omega_p) + gamma_m/2)|.
/// Validated against direct integration of the transverse mean-field equations.
inline SpectrumTrace transverse_response(const TransverseConfig& c,
                                         const std::vector<double>& omega_p) {
  const Complex i_unit(0.0, 1.0);
  const double sz0 = c.sigma_z0();
  SpectrumTrace trace;
  trace.x_name = "omega_p";
  trace.x_unit = "Hz";
  trace.add_metadata("generator", "semiclassical.transverse_response");
  trace.add_metadata("version", kVersion);
  trace.add_metadata("gamma_q_hz", detail::format_full(c.gamma_q()));
  trace.add_metadata("sigma_z0", detail::format_full(sz0));
  trace.x = omega_p;
  auto& amp = trace.add_column("amp", "1");
  for (double wp : omega_p) {
    const Complex mech = Complex(0.5 * c.gamma_m, c.omega_m - wp);
    const Complex denom = Complex(0.5 * c.gamma_q(), c.omega_q - wp) +
                          c.g_x * c.g_x * std::abs(sz0) / mech;
    amp.values.push_back(std::abs(c.eps_p * sz0 / denom));
  }
  return trace;
}

} // namespace fluxmech
