#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluxmech/core/eigen_system.hpp"
#include "fluxmech/core/linalg.hpp"
#include "fluxmech/core/parallel.hpp"
#include "fluxmech/core/trace.hpp"
#include "fluxmech/fluxonium.hpp"

namespace fluxmech {

/// Composite qubit(K levels) x phonon(M Fock states) model at one flux point.
/// The coupling term is g_phi * [phi_ij] kron (b + b^dag); all energies Hz.
struct HybridModel {
  RealVector qubit_levels;  // K energies relative to the fluxonium ground state, Hz
  ComplexMatrix phi;        // K x K phase matrix elements at this flux point
  double omega_m = 6e6;     // Hz
  double g_phi = 0.0;       // Hz
  int n_fock = 4;
  FluxBias flux;

  int qubit_dim() const { return int(qubit_levels.size()); }
  int dim() const { return qubit_dim() * n_fock; }

  void validate() const {
    if (qubit_dim() < 2 || n_fock < 2) {
      throw std::invalid_argument("HybridModel: need at least 2 qubit levels and 2 Fock states");
    }
    if (phi.rows() != qubit_dim() || phi.cols() != qubit_dim()) {
      throw std::invalid_argument("HybridModel: phi table does not match qubit dimension");
    }
  }

  /// Product-basis index of |qubit level i, phonon n>.
  int product_index(int level, int phonon) const { return level * n_fock + phonon; }
};

/// Assembles templates over flux: the fluxonium part is re-diagonalized per
/// point, the mechanical part is fixed.
class HybridModelFactory {
 public:
  HybridModelFactory(const FluxoniumParams& params, double omega_m, double g_phi, int n_qubit_levels,
                     int n_fock)
      : basis_(params),
        omega_m_(omega_m),
        g_phi_(g_phi),
        k_(n_qubit_levels),
        m_(n_fock) {
    if (k_ < 2 || k_ > params.n_levels) {
      throw std::invalid_argument("HybridModelFactory: invalid number of retained qubit levels");
    }
  }

  HybridModel at(const FluxBias& bias) const {
    const EigenSystem sys = fluxonium_eigensystem(basis_, bias);
    HybridModel model;
    model.qubit_levels = sys.values.head(k_).array() - sys.values(0);
    const ComplexMatrix v = sys.vectors.leftCols(k_);
    ComplexMatrix elems = v.adjoint() * basis_.phi().cast<Complex>() * v;
    model.phi = 0.5 * (elems + ComplexMatrix(elems.adjoint())).eval();
    model.omega_m = omega_m_;
    model.g_phi = g_phi_;
    model.n_fock = m_;
    model.flux = bias;
    return model;
  }

  const PhaseOscillatorBasis& basis() const { return basis_; }
  double omega_m() const { return omega_m_; }
  double g_phi() const { return g_phi_; }

 private:
  PhaseOscillatorBasis basis_;
  double omega_m_;
  double g_phi_;
  int k_;
  int m_;
};

inline ComplexMatrix build_hybrid_hamiltonian(const HybridModel& model) {
  model.validate();
  const int k = model.qubit_dim();
  const int m = model.n_fock;
  ComplexMatrix h_q = ComplexMatrix::Zero(k, k);
  for (int i = 0; i < k; ++i) h_q(i, i) = model.qubit_levels(i);
  return kron(h_q, ops::identity(m)) + kron(ops::identity(k), model.omega_m * ops::number(m)) +
         model.g_phi * kron(model.phi, ops::position(m));
}

/// Eigensystem of the composite Hamiltonian plus a truncation diagnostic: the
/// largest top-Fock-layer weight among the eigenvectors below the top phonon
/// manifold. Weights above 1e-3 flag an undersized Fock space.
struct HybridEigenSystem {
  EigenSystem sys;
  double top_fock_weight = 0.0;
  bool truncation_ok = true;
};

inline HybridEigenSystem hybrid_eigensystem(const HybridModel& model) {
  HybridEigenSystem out;
  out.sys = hermitian_eig(build_hybrid_hamiltonian(model));
  const int k = model.qubit_dim();
  const int m = model.n_fock;
  // High phonon manifolds carry displacement dressing into their neighbors by
  // construction, so the meaningful question is whether the truncation edge
  // leaks into the single-excitation states everything downstream reads.
  // Falls back to the ground state when the Fock space has no buffer at all.
  const int interior = std::min(1, m - 3);
  bool any_checked = false;
  for (Eigen::Index j = 0; j < out.sys.vectors.cols(); ++j) {
    Eigen::Index dominant = 0;
    out.sys.vectors.col(j).cwiseAbs().maxCoeff(&dominant);
    const int phonon = int(dominant) % m;
    if (phonon > interior) continue;
    double w = 0.0;
    for (int level = 0; level < k; ++level) {
      w += std::norm(out.sys.vectors(model.product_index(level, m - 1), j));
    }
    out.top_fock_weight = std::max(out.top_fock_weight, w);
    any_checked = true;
  }
  if (!any_checked) {
    double w = 0.0;
    for (int level = 0; level < k; ++level) {
      w += std::norm(out.sys.vectors(model.product_index(level, m - 1), 0));
    }
    out.top_fock_weight = w;
  }
  out.truncation_ok = out.top_fock_weight <= 1e-3;
  return out;
}

struct HybridSweepOptions {
  int max_points = 4096;
  int refinement_rounds = 6;
  double min_overlap = 0.7;    // eigenvector continuity target between neighbors
  double min_step = 1e-9;      // flux spacing floor, Phi0
  int points_per_gap = 20;     // resolution across an avoided crossing
};

struct HybridSweepResult {
  SpectrumTrace trace;             // sorted joint levels relative to the joint ground state
  double min_neighbor_overlap = 1.0;
  bool truncation_ok = true;
  int refinement_rounds_used = 0;
};

namespace detail {

/// Worst matched eigenvector overlap between two neighboring flux points.
inline double neighbor_overlap(const ComplexMatrix& va, const ComplexMatrix& vb) {
  double worst = 1.0;
  for (Eigen::Index j = 0; j < va.cols(); ++j) {
    double best = 0.0;
    for (Eigen::Index l = 0; l < vb.cols(); ++l) {
      best = std::max(best, std::abs((va.col(j).adjoint() * vb.col(l))(0, 0)));
    }
    worst = std::min(worst, best);
  }
  return worst;
}

} // namespace detail

/// Joint spectrum versus flux with adaptive refinement. Points are inserted
/// wherever neighboring eigenvectors lose continuity or an avoided crossing is
/// undersampled, so near-crossing gaps end up resolved by >= points_per_gap
/// samples across the hybridization window.
inline HybridSweepResult hybrid_spectrum_sweep(const HybridModelFactory& factory,
                                               const std::vector<FluxBias>& grid,
                                               const HybridSweepOptions& opt = {},
                                               int threads = 1) {
  if (grid.size() < 2) throw std::invalid_argument("hybrid_spectrum_sweep: need at least 2 points");

  struct Point {
    RealVector values;
    ComplexMatrix vectors;
    bool truncation_ok = true;
  };
  std::map<double, Point> points;

  auto evaluate = [&](const std::vector<double>& fluxes) {
    std::vector<Point> results(fluxes.size());
    parallel_for(
        fluxes.size(),
        [&](size_t i) {
          const HybridEigenSystem h = hybrid_eigensystem(factory.at(FluxBias{fluxes[i]}));
          results[i] = {h.sys.values, h.sys.vectors, h.truncation_ok};
        },
        threads);
    for (size_t i = 0; i < fluxes.size(); ++i) points[fluxes[i]] = std::move(results[i]);
  };

  {
    std::vector<double> fluxes;
    for (const auto& b : grid) fluxes.push_back(b.phi_e);
    std::sort(fluxes.begin(), fluxes.end());
    fluxes.erase(std::unique(fluxes.begin(), fluxes.end()), fluxes.end());
    evaluate(fluxes);
  }

  HybridSweepResult result;
  int round = 0;
  for (; round < opt.refinement_rounds; ++round) {
    std::vector<double> inserts;
    std::vector<double> xs;
    xs.reserve(points.size());
    for (const auto& [x, p] : points) xs.push_back(x);

    // Continuity refinement.
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
      if (xs[i + 1] - xs[i] <= opt.min_step) continue;
      const double ov = detail::neighbor_overlap(points[xs[i]].vectors, points[xs[i + 1]].vectors);
      if (ov < opt.min_overlap) inserts.push_back(0.5 * (xs[i] + xs[i + 1]));
    }

    // Gap refinement around local minima of adjacent-level spacings.
    const Eigen::Index n_levels = points.begin()->second.values.size();
    for (size_t i = 1; i + 1 < xs.size(); ++i) {
      for (Eigen::Index k = 0; k + 1 < n_levels; ++k) {
        auto gap_at = [&](size_t idx) {
          const RealVector& v = points[xs[idx]].values;
          return v(k + 1) - v(k);
        };
        const double g0 = gap_at(i);
        if (g0 > gap_at(i - 1) || g0 > gap_at(i + 1)) continue;
        const double slope = std::max(std::abs(gap_at(i + 1) - g0) / (xs[i + 1] - xs[i]),
                                      std::abs(gap_at(i - 1) - g0) / (xs[i] - xs[i - 1]));
        if (slope <= 0.0) continue;
        // Flux half-width over which the gap stays within 2x its minimum.
        const double width = std::max(g0 / slope, opt.min_step);
        const double target = std::max(2.0 * width / opt.points_per_gap, opt.min_step);
        if (xs[i] - xs[i - 1] > target) inserts.push_back(0.5 * (xs[i - 1] + xs[i]));
        if (xs[i + 1] - xs[i] > target) inserts.push_back(0.5 * (xs[i] + xs[i + 1]));
      }
    }

    std::sort(inserts.begin(), inserts.end());
    inserts.erase(std::unique(inserts.begin(), inserts.end()), inserts.end());
    std::vector<double> fresh;
    for (double x : inserts) {
      if (!points.count(x) && points.size() + fresh.size() < size_t(opt.max_points)) {
        fresh.push_back(x);
      }
    }
    if (fresh.empty()) break;
    evaluate(fresh);
  }
  result.refinement_rounds_used = round;

  SpectrumTrace& trace = result.trace;
  trace.x_name = "phi_e";
  trace.x_unit = "Phi0";
  trace.add_metadata("generator", "hybrid.spectrum_sweep");
  trace.add_metadata("version", kVersion);
  const Eigen::Index n_levels = points.begin()->second.values.size();
  std::vector<TraceColumn*> cols;
  for (Eigen::Index k = 0; k < n_levels; ++k) {
    cols.push_back(&trace.add_column("level_" + std::to_string(k), "Hz"));
  }
  const ComplexMatrix* prev_vectors = nullptr;
  for (const auto& [x, p] : points) {
    trace.x.push_back(x);
    for (Eigen::Index k = 0; k < n_levels; ++k) cols[k]->values.push_back(p.values(k) - p.values(0));
    result.truncation_ok = result.truncation_ok && p.truncation_ok;
    if (prev_vectors) {
      result.min_neighbor_overlap =
          std::min(result.min_neighbor_overlap, detail::neighbor_overlap(*prev_vectors, p.vectors));
    }
    prev_vectors = &p.vectors;
  }
  return result;
}

/// Location and size of one avoided crossing between two labeled product
/// states, found by golden-section minimization of the local gap.
struct CrossingReport {
  FluxBias location;
  double gap_hz = 0.0;
  int level_a = 0, phonon_a = 0;
  int level_b = 0, phonon_b = 0;
};

namespace detail {

/// Gap between the two eigenstates spanning the {|a>, |b>} product pair.
inline double labeled_gap(const HybridModel& model, int ia, int na, int ib, int nb) {
  const EigenSystem sys = hermitian_eig(build_hybrid_hamiltonian(model));
  const int pa = model.product_index(ia, na);
  const int pb = model.product_index(ib, nb);
  int best1 = -1, best2 = -1;
  double w1 = -1.0, w2 = -1.0;
  for (Eigen::Index j = 0; j < sys.vectors.cols(); ++j) {
    const double w = std::norm(sys.vectors(pa, j)) + std::norm(sys.vectors(pb, j));
    if (w > w1) {
      w2 = w1; best2 = best1;
      w1 = w; best1 = int(j);
    } else if (w > w2) {
      w2 = w; best2 = int(j);
    }
  }
  return std::abs(sys.values(best1) - sys.values(best2));
}

} // namespace detail

inline CrossingReport find_avoided_crossing(const HybridModelFactory& factory, FluxBias lo,
                                            FluxBias hi, int level_a, int phonon_a, int level_b,
                                            int phonon_b, double flux_tol = 1e-7) {
  if (!(hi.phi_e > lo.phi_e)) {
    throw std::invalid_argument("find_avoided_crossing: empty bracket");
  }
  auto gap = [&](double x) {
    return detail::labeled_gap(factory.at(FluxBias{x}), level_a, phonon_a, level_b, phonon_b);
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo.phi_e, b = hi.phi_e;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = gap(x1), f2 = gap(x2);
  const double fa = gap(a), fb = gap(b);
  while (b - a > flux_tol) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = gap(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = gap(x2);
    }
  }
  CrossingReport report;
  report.location = FluxBias{0.5 * (a + b)};
  report.gap_hz = gap(report.location.phi_e);
  if (report.gap_hz > fa || report.gap_hz > fb) {
    throw std::runtime_error("find_avoided_crossing: no interior gap minimum in bracket [" +
                             std::to_string(lo.phi_e) + ", " + std::to_string(hi.phi_e) + "]");
  }
  report.level_a = level_a;
  report.phonon_a = phonon_a;
  report.level_b = level_b;
  report.phonon_b = phonon_b;
  return report;
}

/// Dispersive shifts versus detuning Delta = omega_q - omega_m, scanned by
/// sliding the mechanical frequency at fixed flux. States are labeled through
/// their dominant product-basis component, which is unambiguous in the
/// dispersive window |Delta| > 5 g_x enforced here.
inline SpectrumTrace dispersive_shifts(const HybridModelFactory& factory, const FluxBias& bias,
                                       const std::vector<double>& detunings) {
  HybridModel base = factory.at(bias);
  base.validate();
  if (base.n_fock < 4) {
    throw std::invalid_argument("dispersive_shifts: need n_fock >= 4 for two-phonon shifts");
  }
  const double omega_q = base.qubit_levels(1) - base.qubit_levels(0);
  const double g_x = base.g_phi * std::abs(base.phi(0, 1));

  SpectrumTrace trace;
  trace.x_name = "delta";
  trace.x_unit = "Hz";
  trace.add_metadata("generator", "hybrid.dispersive_shifts");
  trace.add_metadata("version", kVersion);
  trace.add_metadata("omega_q_hz", detail::format_full(omega_q));
  trace.add_metadata("g_x_hz", detail::format_full(g_x));
  auto& mech_g = trace.add_column("mech_shift_qubit_g", "Hz");
  auto& mech_e = trace.add_column("mech_shift_qubit_e", "Hz");
  auto& qub_1 = trace.add_column("qubit_shift_one_phonon", "Hz");
  auto& qub_2 = trace.add_column("qubit_shift_two_phonon", "Hz");

  std::vector<double> sorted = detunings;
  std::sort(sorted.begin(), sorted.end());
  for (double delta : sorted) {
    if (std::abs(delta) <= 5.0 * g_x) {
      throw std::invalid_argument("dispersive_shifts: detuning " + std::to_string(delta) +
                                  " Hz is inside the non-dispersive window (|Delta| <= 5 g_x = " +
                                  std::to_string(5.0 * g_x) + " Hz)");
    }
    if (omega_q - delta <= 0.0) {
      throw std::invalid_argument("dispersive_shifts: detuning " + std::to_string(delta) +
                                  " Hz places the mechanical frequency at or below zero "
                                  "(qubit splitting " + std::to_string(omega_q) + " Hz)");
    }
    HybridModel model = base;
    model.omega_m = omega_q - delta;
    const EigenSystem sys = hermitian_eig(build_hybrid_hamiltonian(model));

    // Energy of the eigenstate dominated by a given product state.
    auto labeled_energy = [&](int level, int phonon) {
      const int p = model.product_index(level, phonon);
      Eigen::Index best = 0;
      double w = -1.0;
      for (Eigen::Index j = 0; j < sys.vectors.cols(); ++j) {
        const double wj = std::norm(sys.vectors(p, j));
        if (wj > w) {
          w = wj;
          best = j;
        }
      }
      return sys.values(best);
    };

    const double e_g0 = labeled_energy(0, 0), e_g1 = labeled_energy(0, 1);
    const double e_g2 = labeled_energy(0, 2);
    const double e_e0 = labeled_energy(1, 0), e_e1 = labeled_energy(1, 1);
    const double e_e2 = labeled_energy(1, 2);

    trace.x.push_back(delta);
    mech_g.values.push_back((e_g1 - e_g0) - model.omega_m);
    mech_e.values.push_back((e_e1 - e_e0) - model.omega_m);
    qub_1.values.push_back((e_e1 - e_g1) - (e_e0 - e_g0));
    qub_2.values.push_back((e_e2 - e_g2) - (e_e0 - e_g0));
  }
  return trace;
}

} // namespace fluxmech
