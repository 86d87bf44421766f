#pragma once

// Damped Newton ascent of the entropy over the digital-price box. The Hessian is
// tridiagonal and negative definite, so each step is an O(n) Thomas solve; the
// line search first shrinks the step until it stays inside the box and then
// backtracks until the Armijo condition holds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maxent/density.hpp"
#include "maxent/entropy_surface.hpp"
#include "maxent/error.hpp"
#include "maxent/market_data.hpp"

namespace maxent {

enum class StartRule { ccs_midpoint, supplied };
enum class Termination { converged, max_iter, stalled };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iter: return "max_iter";
    case Termination::stalled: return "stalled";
  }
  return "unknown";
}

struct SolverConfig {
  double grad_tol = 1e-9;
  int max_iter = 100;
  double backtrack_shrink = 0.5;
  double armijo_c = 0.01;
  double feasibility_shrink = 0.5;
  StartRule start = StartRule::ccs_midpoint;
  std::optional<DigitalVector> start_point;  // used with StartRule::supplied
  BetaSolveConfig beta{};

  void validate() const {
    if (!(grad_tol > 0.0)) throw Error(ErrorCode::DomainError, "grad_tol must be positive");
    if (!(backtrack_shrink > 0.0 && backtrack_shrink < 1.0)) {
      throw Error(ErrorCode::DomainError, "backtrack_shrink must lie in (0, 1)");
    }
    if (!(feasibility_shrink > 0.0 && feasibility_shrink < 1.0)) {
      throw Error(ErrorCode::DomainError, "feasibility_shrink must lie in (0, 1)");
    }
    if (!(armijo_c > 0.0 && armijo_c < 0.5)) throw Error(ErrorCode::DomainError, "armijo_c must lie in (0, 0.5)");
    if (max_iter < 0) throw Error(ErrorCode::DomainError, "max_iter must be non-negative");
    if (start == StartRule::supplied && !start_point) {
      throw Error(ErrorCode::DomainError, "supplied start rule requires a start point");
    }
  }
};

struct SolverReport {
  DigitalVector solution;
  int iterations = 0;
  Termination termination = Termination::converged;
  std::vector<DigitalVector> iterates;    // including the start
  std::vector<double> entropy_history;    // H at each iterate
  std::vector<double> grad_norm_history;  // |grad H| at each iterate
  std::vector<double> step_sizes;         // accepted t per Newton step
  double entropy = 0.0;
  BoundsReport bounds;
};

struct Calibration {
  PiecewiseExpDensity density;
  SolverReport report;
};

/// Thomas algorithm for a symmetric tridiagonal system h x = rhs.
inline std::vector<double> tridiag_solve(const TridiagonalHessian& h, std::span<const double> rhs) {
  const std::size_t n = h.size();
  if (rhs.size() != n) throw Error(ErrorCode::DomainError, "right-hand side has wrong length");
  std::vector<double> c_star(n), d_star(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sub = i > 0 ? h.off[i - 1] : 0.0;
    const double pivot = h.diag[i] - (i > 0 ? sub * c_star[i - 1] : 0.0);
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw Error(ErrorCode::SingularPivot, "zero pivot in row " + std::to_string(i));
    }
    c_star[i] = i + 1 < n ? h.off[i] / pivot : 0.0;
    d_star[i] = (rhs[i] - (i > 0 ? sub * d_star[i - 1] : 0.0)) / pivot;
  }
  for (std::size_t i = n; i-- > 0;) {
    x[i] = d_star[i] - (i + 1 < n ? c_star[i] * x[i + 1] : 0.0);
  }
  return x;
}

namespace detail {

inline std::optional<SurfacePoint> try_evaluate(const MarketSlice& slice, const DigitalRectangle& omega,
                                                const DigitalVector& d, const BetaSolveConfig& cfg) {
  if (!omega.contains(d)) return std::nullopt;
  try {
    return evaluate_surface(slice, omega, d, cfg);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OutOfRectangle || e.code() == ErrorCode::OutOfRange) return std::nullopt;
    throw;
  }
}

inline DigitalVector axpy(const DigitalVector& x, double t, std::span<const double> dir) {
  DigitalVector out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * dir[i];
  return out;
}

}  // namespace detail

/// Maximises entropy over Omega; the maximiser is the Buchen-Kelly density.
///
/// Hitting max_iter, or a line search that cannot make progress, is a soft
/// failure: the last accepted iterate is returned and `termination` says why.
inline Calibration solve_buchen_kelly(const MarketSlice& slice, const SolverConfig& cfg = {}) {
  cfg.validate();
  const DigitalRectangle omega = validate_slice(slice);
  if (slice.size() == 0) throw Error(ErrorCode::InvalidSlice, "no strikes: nothing to optimise");

  DigitalVector x = cfg.start == StartRule::supplied ? *cfg.start_point : ccs_digitals(slice);
  require_inside(slice, omega, x);

  SolverReport report;
  SurfacePoint pt = evaluate_surface(slice, omega, x, cfg.beta);
  // Below this predicted gain the Armijo test only measures rounding noise in H.
  const auto noise_floor = [](double h) { return 64.0 * 2.220446049250313e-16 * std::max(1.0, std::abs(h)); };

  auto record = [&](const DigitalVector& d, const SurfacePoint& p) {
    report.iterates.push_back(d);
    report.entropy_history.push_back(p.entropy());
    report.grad_norm_history.push_back(p.gradient.norm());
  };
  record(x, pt);

  report.termination = Termination::max_iter;
  for (int iter = 0;; ++iter) {
    if (pt.gradient.norm() <= cfg.grad_tol) {
      report.termination = Termination::converged;
      break;
    }
    if (iter >= cfg.max_iter) break;

    // H'' d = -grad gives the Newton ascent direction since H'' is negative definite.
    std::vector<double> direction = tridiag_solve(pt.hessian(), pt.gradient.values);
    for (double& v : direction) v = -v;
    double slope = 0.0;  // <grad, d> > 0
    for (std::size_t i = 0; i < direction.size(); ++i) slope += pt.gradient.values[i] * direction[i];

    double t = 1.0;
    std::optional<SurfacePoint> trial;
    DigitalVector candidate;
    for (int k = 0; k < 200; ++k) {
      candidate = detail::axpy(x, t, direction);
      trial = detail::try_evaluate(slice, omega, candidate, cfg.beta);
      if (trial) break;
      t *= cfg.feasibility_shrink;
    }
    if (!trial) {
      report.termination = Termination::stalled;
      break;
    }

    const double h0 = pt.entropy();
    if (slope > noise_floor(h0)) {
      for (int k = 0; k < 200 && trial->entropy() < h0 + cfg.armijo_c * t * slope; ++k) {
        t *= cfg.backtrack_shrink;
        candidate = detail::axpy(x, t, direction);
        trial = detail::try_evaluate(slice, omega, candidate, cfg.beta);
        if (!trial) break;
      }
      if (!trial || trial->entropy() < h0 + cfg.armijo_c * t * slope) {
        report.termination = Termination::stalled;
        break;
      }
    }

    x = std::move(candidate);
    pt = std::move(*trial);
    report.step_sizes.push_back(t);
    report.iterations = iter + 1;
    record(x, pt);
  }

  report.solution = x;
  report.entropy = pt.entropy();
  report.bounds = bounds_from_gradient(pt.gradient);
  return {build_density(slice, x, cfg.beta), std::move(report)};
}

/// Density matching calls and the supplied digitals, wrapped like a zero-iteration solve.
inline Calibration solve_constrained(const MarketSlice& slice, const DigitalVector& digitals,
                                     const BetaSolveConfig& cfg = {}) {
  const DigitalRectangle omega = validate_slice(slice);
  SolverReport report;
  report.solution = digitals;
  if (slice.size() == 0) {
    report.entropy = entropy_from_market(slice, digitals);
  } else {
    const SurfacePoint pt = evaluate_surface(slice, omega, digitals, cfg);
    report.entropy = pt.entropy();
    report.bounds = bounds_from_gradient(pt.gradient);
    report.iterates.push_back(digitals);
    report.entropy_history.push_back(report.entropy);
    report.grad_norm_history.push_back(pt.gradient.norm());
  }
  return {build_density(slice, digitals, cfg), std::move(report)};
}

}  // namespace maxent
