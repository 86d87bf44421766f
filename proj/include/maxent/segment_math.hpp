#pragma once

// Per-bucket functions of the slope parameter beta.
//
// For a bucket [lo, hi) the log-partition function is
//   c(beta) = ln \int_lo^hi e^{beta x} dx,
// its derivative c' is the conditional mean of the exponential density on the
// bucket and c'' is the conditional variance. All finite-bucket quantities are
// evaluated through x = beta * (hi - lo) so that beta -> 0 is harmless.

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "maxent/error.hpp"

namespace maxent {

struct Bucket {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool infinite() const { return std::isinf(hi); }
  double width() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
};

struct BetaSolveConfig {
  /// Residual tolerance on |c'(beta) - kbar| in price units; unset means 1e-12 * (1 + |kbar|).
  std::optional<double> abs_tol;
  int max_iter = 100;
};

namespace kernel {

inline constexpr double series_cutoff = 1e-3;

/// sinh(y) - y without cancellation.
inline double sinh_minus_identity(double y) {
  if (std::abs(y) >= 1.0) return std::sinh(y) - y;
  const double y2 = y * y;
  double term = y * y2 / 6.0;
  double sum = term;
  for (int k = 2; k < 12; ++k) {
    term *= y2 / ((2.0 * k) * (2.0 * k + 1.0));
    sum += term;
  }
  return sum;
}

/// y cosh(y) - sinh(y) without cancellation.
inline double ycosh_minus_sinh(double y) {
  if (std::abs(y) >= 1.0) return y * std::cosh(y) - std::sinh(y);
  // sum_k 2k y^{2k+1} / (2k+1)!
  const double y2 = y * y;
  double power = y * y2 / 6.0;  // y^3/3!
  double sum = 2.0 * power;
  for (int k = 2; k < 12; ++k) {
    power *= y2 / ((2.0 * k) * (2.0 * k + 1.0));
    sum += 2.0 * k * power;
  }
  return sum;
}

/// ln((e^x - 1) / x), continuous at 0.
inline double log_expm1_over_x(double x) {
  if (std::abs(x) < series_cutoff) {
    const double x2 = x * x;
    return x / 2.0 + x2 / 24.0 - x2 * x2 / 2880.0;
  }
  if (x > 0.0) return x + std::log(-std::expm1(-x)) - std::log(x);
  return std::log(-std::expm1(x)) - std::log(-x);
}

/// Relative position of the conditional mean in a unit bucket: 1/(1 - e^{-x}) - 1/x, in (0, 1).
inline double mean_position(double x) {
  if (std::abs(x) < series_cutoff) {
    return 0.5 + x / 12.0 - x * x * x / 720.0;
  }
  if (std::abs(x) < 2.0) {
    const double y = 0.5 * x;
    const double langevin = ycosh_minus_sinh(y) / (y * std::sinh(y));
    return 0.5 + 0.5 * langevin;
  }
  return -1.0 / std::expm1(-x) - 1.0 / x;
}

/// Variance of a unit bucket: 1/x^2 - e^x/(e^x - 1)^2, always positive.
inline double variance_factor(double x) {
  if (std::abs(x) < series_cutoff) {
    const double x2 = x * x;
    return 1.0 / 12.0 - x2 / 240.0 + x2 * x2 / 6048.0;
  }
  if (std::abs(x) < 2.0) {
    const double y = 0.5 * x;
    const double s = std::sinh(y);
    return sinh_minus_identity(y) * (s + y) / (x * x * s * s);
  }
  const double a = std::abs(x);
  const double em1 = std::expm1(-a);
  return 1.0 / (a * a) - std::exp(-a) / (em1 * em1);
}

}  // namespace kernel

namespace detail {

inline void require_integrable(const Bucket& b, double beta) {
  if (std::isnan(beta) || (b.infinite() && !(beta < 0.0))) {
    throw Error(ErrorCode::DomainError,
                "slope " + std::to_string(beta) + " not admissible on the unbounded bucket starting at " +
                    std::to_string(b.lo));
  }
}

}  // namespace detail

/// c(beta) - beta * lo, i.e. ln of the bucket integral of e^{beta (x - lo)}.
inline double log_partition_from_lo(const Bucket& b, double beta) {
  detail::require_integrable(b, beta);
  if (b.infinite()) return std::log(-1.0 / beta);
  const double width = b.width();
  return std::log(width) + kernel::log_expm1_over_x(beta * width);
}

/// c(beta) - beta * hi for a finite bucket.
inline double log_partition_from_hi(const Bucket& b, double beta) {
  if (b.infinite()) throw Error(ErrorCode::DomainError, "unbounded bucket has no upper end");
  const double width = b.width();
  return std::log(width) + kernel::log_expm1_over_x(-beta * width);
}

/// c(beta) = ln \int_lo^hi e^{beta x} dx.
inline double log_partition(const Bucket& b, double beta) {
  return beta * b.lo + log_partition_from_lo(b, beta);
}

/// c'(beta): mean of the density proportional to e^{beta x} on the bucket.
inline double conditional_mean(const Bucket& b, double beta) {
  detail::require_integrable(b, beta);
  if (b.infinite()) return b.lo - 1.0 / beta;
  return b.lo + b.width() * kernel::mean_position(beta * b.width());
}

/// c''(beta): variance of the density proportional to e^{beta x} on the bucket.
inline double conditional_variance(const Bucket& b, double beta) {
  detail::require_integrable(b, beta);
  if (b.infinite()) return 1.0 / (beta * beta);
  const double width = b.width();
  return width * width * kernel::variance_factor(beta * width);
}

/// Inverts c'(beta) = kbar.
///
/// The unbounded bucket has the closed form beta = -1/(kbar - lo). Finite buckets run
/// Newton on the unit-bucket position with a bisection fallback on a bracket that is
/// grown geometrically from the initial guess until it contains the root.
inline double solve_beta(const Bucket& b, double kbar, const BetaSolveConfig& cfg = {}) {
  if (!(kbar > b.lo) || !(kbar < b.hi)) {
    throw Error(ErrorCode::OutOfRange, "conditional mean " + std::to_string(kbar) + " outside bucket (" +
                                           std::to_string(b.lo) + ", " + std::to_string(b.hi) + ")");
  }
  if (b.infinite()) return -1.0 / (kbar - b.lo);

  const double width = b.width();
  const double u = (kbar - b.lo) / width;
  const double tol = cfg.abs_tol.value_or(1e-12 * (1.0 + std::abs(kbar))) / width;
  if (!(u > 0.0 && u < 1.0)) {
    throw Error(ErrorCode::OutOfRange, "conditional mean " + std::to_string(kbar) + " too close to bucket edge");
  }

  // Small-slope expansion inverted in the middle, tail asymptotics near the edges.
  double x = 12.0 * (u - 0.5);
  if (u > 0.9) x = 1.0 / (1.0 - u);
  if (u < 0.1) x = -1.0 / u;

  auto residual = [u](double t) { return kernel::mean_position(t) - u; };

  double left = x - 1.0;
  for (double step = 1.0; residual(left) > 0.0; step *= 2.0) left = x - 2.0 * step;
  double right = x + 1.0;
  for (double step = 1.0; residual(right) < 0.0; step *= 2.0) right = x + 2.0 * step;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const double f = residual(x);
    const double slope = kernel::variance_factor(x);
    if (std::abs(f) <= tol) {
      const double polished = x - f / slope;
      if (polished > left && polished < right) x = polished;
      return x / width;
    }
    if (f < 0.0) {
      left = x;
    } else {
      right = x;
    }
    double next = x - f / slope;
    if (!(next > left && next < right)) next = 0.5 * (left + right);
    x = next;
  }
  throw Error(ErrorCode::NoConvergence, "slope solve did not converge for conditional mean " + std::to_string(kbar));
}

/// Convex conjugate c*(kbar) = beta kbar - c(beta) at beta = solve_beta(kbar).
inline double conjugate(const Bucket& b, double kbar, const BetaSolveConfig& cfg = {}) {
  if (b.infinite()) {
    if (!(kbar > b.lo)) {
      throw Error(ErrorCode::OutOfRange, "conditional mean " + std::to_string(kbar) + " not above " +
                                             std::to_string(b.lo));
    }
    return -1.0 - std::log(kbar - b.lo);
  }
  const double beta = solve_beta(b, kbar, cfg);
  return beta * (kbar - b.lo) - log_partition_from_lo(b, beta);
}

}  // namespace maxent
