#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluxmech/core/linalg.hpp"

namespace fluxmech {

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 = choose automatically
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_calls = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
// 5th-order weights equal kA[6]; error weights = b5 - b4.
inline constexpr double kE[7] = {71.0 / 57600,  0.0,          -71.0 / 16695, 71.0 / 1920,
                                 -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

} // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of dy/dt = rhs(t, y).
/// `times` must be strictly increasing; the returned trajectory holds the
/// solution at exactly those times, with y(times[0]) = y0. Throws on step
/// underflow with a stiffness report.
template <class Rhs>
std::vector<ComplexVector> integrate_ode(Rhs&& rhs, const ComplexVector& y0,
                                         std::span<const double> times,
                                         const OdeOptions& opt = {},
                                         OdeStats* stats_out = nullptr) {
  if (times.size() < 1) throw std::invalid_argument("integrate_ode: empty time grid");
  for (size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("integrate_ode: times must be strictly increasing");
    }
  }
  if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) {
    throw std::invalid_argument("integrate_ode: tolerances must be positive");
  }

  const Eigen::Index n = y0.size();
  OdeStats stats;
  std::vector<ComplexVector> out;
  out.reserve(times.size());
  out.push_back(y0);
  if (times.size() == 1) {
    if (stats_out) *stats_out = stats;
    return out;
  }

  double t = times[0];
  ComplexVector y = y0;
  ComplexVector k[7];
  k[0] = rhs(t, y);
  ++stats.rhs_calls;

  auto error_norm = [&](const ComplexVector& err, const ComplexVector& ya,
                        const ComplexVector& yb) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(ya(i)), std::abs(yb(i)));
      const double e = std::abs(err(i)) / sc;
      acc += e * e;
    }
    const double norm = std::sqrt(acc / double(n));
    // Overflowing stages read as a hard rejection, not a poisoned step size.
    return std::isfinite(norm) ? norm : 1e10;
  };

  // Initial step heuristic based on the size of the first derivative.
  double h = opt.initial_step;
  if (h <= 0.0) {
    const double span = times.back() - times.front();
    const double ynorm = y.norm() + opt.atol;
    const double fnorm = k[0].norm();
    h = fnorm > 0.0 ? 0.01 * ynorm / fnorm : span / 100.0;
    h = std::min(h, span / 10.0);
    if (!(h > 0.0)) h = span / 100.0;
  }
  h = std::min(h, opt.max_step);

  size_t next = 1;
  ComplexVector y_new(n), err(n);
  while (next < times.size()) {
    if (stats.accepted + stats.rejected >= opt.max_steps) {
      throw std::runtime_error("integrate_ode: exceeded max_steps at t = " + std::to_string(t));
    }
    const double t_target = times[next];
    // A previous step may have landed within rounding of the target; snap
    // instead of forcing a sub-epsilon step.
    if (t_target - t <= 32.0 * std::numeric_limits<double>::epsilon() *
                            std::max(std::abs(t_target), 1.0)) {
      t = t_target;
      out.push_back(y);
      ++next;
      continue;
    }
    bool clipped = false;
    double h_try = h;
    if (t + h_try >= t_target) {
      h_try = t_target - t;
      clipped = true;
    }
    if (h_try < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0)) {
      throw std::runtime_error(
          "integrate_ode: step size underflow at t = " + std::to_string(t) +
          " (h = " + std::to_string(h_try) + ", accepted " + std::to_string(stats.accepted) +
          " steps); the system appears stiff at the requested tolerance");
    }

    for (int s = 1; s < 7; ++s) {
      ComplexVector ys = y;
      for (int j = 0; j < s; ++j) {
        if (detail::kA[s][j] != 0.0) ys += (h_try * detail::kA[s][j]) * k[j];
      }
      k[s] = rhs(t + detail::kC[s] * h_try, ys);
      ++stats.rhs_calls;
    }
    // Stage 7 input is the 5th-order solution (FSAL).
    y_new = y;
    for (int j = 0; j < 6; ++j) {
      if (detail::kA[6][j] != 0.0) y_new += (h_try * detail::kA[6][j]) * k[j];
    }
    err.setZero();
    for (int j = 0; j < 7; ++j) {
      if (detail::kE[j] != 0.0) err += (h_try * detail::kE[j]) * k[j];
    }

    const double e = error_norm(err, y, y_new);
    if (e <= 1.0) {
      t = clipped ? t_target : t + h_try;
      y.swap(y_new);
      k[0] = k[6];  // FSAL
      ++stats.accepted;
      if (clipped) {
        out.push_back(y);
        ++next;
      }
      const double grow = e > 0.0 ? 0.9 * std::pow(e, -0.2) : 5.0;
      h = std::min(std::max(h, h_try) * std::clamp(grow, 0.2, 5.0), opt.max_step);
    } else {
      ++stats.rejected;
      h = h_try * std::clamp(0.9 * std::pow(e, -0.2), 0.1, 0.5);
      // k[0] at (t, y) is still valid after a rejection.
    }
  }
  if (stats_out) *stats_out = stats;
  return out;
}

} // namespace fluxmech
