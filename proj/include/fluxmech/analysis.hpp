#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluxmech/core/eigen_system.hpp"
#include "fluxmech/core/linalg.hpp"
#include "fluxmech/core/trace.hpp"

namespace fluxmech {

/// Density matrix on a bipartite product space with dims (d_a, d_b), indexed
/// as |a, b> -> a * d_b + b.
struct BipartiteState {
  ComplexMatrix rho;
  int dim_a = 0;
  int dim_b = 0;

  void validate(double trace_tol = 1e-8, double psd_floor = -1e-7) const {
    if (rho.rows() != rho.cols() || rho.rows() != Eigen::Index(dim_a) * dim_b) {
      throw std::invalid_argument("BipartiteState: dims do not match the density matrix");
    }
    if (std::abs(rho.trace().real() - 1.0) > trace_tol || std::abs(rho.trace().imag()) > trace_tol) {
      throw std::invalid_argument("BipartiteState: trace is not 1");
    }
    if (hermiticity_defect(rho) > 1e-8 * std::max(1.0, max_abs(rho))) {
      throw std::invalid_argument("BipartiteState: not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
    if (es.eigenvalues().minCoeff() < psd_floor) {
      throw std::invalid_argument("BipartiteState: eigenvalue below positivity floor");
    }
  }
};

enum class Subsystem { A, B };

/// Transpose of one factor. Transposing the same factor twice restores the
/// input exactly (pure element permutation, no arithmetic).
inline ComplexMatrix partial_transpose(const BipartiteState& s, Subsystem which = Subsystem::B) {
  if (s.rho.rows() != Eigen::Index(s.dim_a) * s.dim_b || s.rho.rows() != s.rho.cols()) {
    throw std::invalid_argument("partial_transpose: dims do not match the density matrix");
  }
  ComplexMatrix out(s.rho.rows(), s.rho.cols());
  for (int a1 = 0; a1 < s.dim_a; ++a1) {
    for (int b1 = 0; b1 < s.dim_b; ++b1) {
      for (int a2 = 0; a2 < s.dim_a; ++a2) {
        for (int b2 = 0; b2 < s.dim_b; ++b2) {
          const int row = a1 * s.dim_b + b1;
          const int col = a2 * s.dim_b + b2;
          const int prow = which == Subsystem::B ? a1 * s.dim_b + b2 : a2 * s.dim_b + b1;
          const int pcol = which == Subsystem::B ? a2 * s.dim_b + b1 : a1 * s.dim_b + b2;
          out(prow, pcol) = s.rho(row, col);
        }
      }
    }
  }
  return out;
}

/// N(rho) = |sum of negative eigenvalues of the partial transpose|.
/// Eigenvalues above -1e-10 count as zero so numerical noise never reads as
/// entanglement.
inline double negativity(const BipartiteState& s, double noise_floor = 1e-10) {
  const ComplexMatrix pt = partial_transpose(s);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (pt + ComplexMatrix(pt.adjoint())));
  double neg = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()(i);
    if (v < -noise_floor) neg += -v;
  }
  return neg;
}

/// E_N = log2(2 N + 1); zero for every PPT state by construction.
inline double log_negativity(const BipartiteState& s, double noise_floor = 1e-10) {
  return std::log2(2.0 * negativity(s, noise_floor) + 1.0);
}

/// F = <psi| rho |psi> for a normalized pure target.
inline double fidelity_pure(const BipartiteState& s, const ComplexVector& target) {
  if (target.size() != s.rho.rows()) {
    throw std::invalid_argument("fidelity_pure: target dimension mismatch");
  }
  const double norm = target.norm();
  if (std::abs(norm - 1.0) > 1e-8) {
    throw std::invalid_argument("fidelity_pure: target is not normalized");
  }
  return (target.adjoint() * s.rho * target)(0, 0).real();
}

/// Extremum report from a sampled trace: locations and widths from local
/// parabolic refinement, splitting from the two dominant features.
struct PeakFeature {
  double location = 0.0;
  double width = 0.0;      // FWHM estimate
  double amplitude = 0.0;  // signed sample value at the extremum
  double prominence = 0.0; // height above (peaks) / depth below (dips) surroundings
};

struct PeakReport {
  std::vector<PeakFeature> features;  // sorted by prominence, strongest first
  double splitting = 0.0;             // |location_1 - location_2| of the two strongest
};

enum class FeatureKind { Peaks, Dips };

inline PeakReport measure_peaks(const std::vector<double>& x, const std::vector<double>& y,
                                FeatureKind kind, int min_points_per_width = 8) {
  if (x.size() != y.size() || x.size() < 3) {
    throw std::invalid_argument("measure_peaks: need matching x/y with at least 3 samples");
  }
  const double sign = kind == FeatureKind::Peaks ? 1.0 : -1.0;
  std::vector<double> w(y.size());
  for (size_t i = 0; i < y.size(); ++i) w[i] = sign * y[i];

  PeakReport report;
  for (size_t i = 1; i + 1 < w.size(); ++i) {
    if (!(w[i] > w[i - 1] && w[i] > w[i + 1])) continue;

    // Sub-grid location from the parabola through the three samples around
    // the extremum.
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double y0 = w[i - 1], y1 = w[i], y2 = w[i + 1];
    double loc = x1;
    {
      const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
      const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
      const double b =
          (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
      if (a < 0.0) loc = -b / (2.0 * a);
    }

    // Half-prominence width: scan outward to the half level between the
    // extremum and the nearest flanking valleys.
    size_t left = i, right = i;
    while (left > 0 && w[left - 1] < w[left]) --left;
    while (right + 1 < w.size() && w[right + 1] < w[right]) ++right;
    const double base = std::max(w[left], w[right]);
    const double half = 0.5 * (w[i] + base);
    double xl = x[left], xr = x[right];
    for (size_t j = i; j > left; --j) {
      if (w[j - 1] <= half) {
        const double f = (half - w[j]) / (w[j - 1] - w[j]);
        xl = x[j] + f * (x[j - 1] - x[j]);
        break;
      }
    }
    for (size_t j = i; j < right; ++j) {
      if (w[j + 1] <= half) {
        const double f = (half - w[j]) / (w[j + 1] - w[j]);
        xr = x[j] + f * (x[j + 1] - x[j]);
        break;
      }
    }

    PeakFeature feature;
    feature.location = loc;
    feature.width = std::max(xr - xl, 0.0);
    feature.amplitude = y[i];
    feature.prominence = w[i] - base;

    int covered = 0;
    for (size_t j = 0; j < x.size(); ++j) {
      if (x[j] >= xl && x[j] <= xr) ++covered;
    }
    if (covered < min_points_per_width) {
      throw std::runtime_error(
          "measure_peaks: feature near x = " + std::to_string(loc) + " is sampled by only " +
          std::to_string(covered) + " points across its width; refine the grid");
    }
    report.features.push_back(feature);
  }

  if (report.features.empty()) {
    throw std::runtime_error("measure_peaks: no feature found in the trace");
  }
  std::sort(report.features.begin(), report.features.end(),
            [](const PeakFeature& a, const PeakFeature& b) { return a.prominence > b.prominence; });
  if (report.features.size() >= 2) {
    report.splitting = std::abs(report.features[0].location - report.features[1].location);
  }
  return report;
}

inline PeakReport measure_peaks(const SpectrumTrace& trace, const std::string& column,
                                FeatureKind kind, int min_points_per_width = 8) {
  return measure_peaks(trace.x, trace.column(column).values, kind, min_points_per_width);
}

} // namespace fluxmech
