#pragma once

// Entropy of the maximum-entropy density as a function of the digital prices,
// computed straight from market data: value, gradient, tridiagonal Hessian and
// the stopping bounds that follow from strong concavity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "maxent/error.hpp"
#include "maxent/market_data.hpp"
#include "maxent/segment_math.hpp"

namespace maxent {

struct Gradient {
  std::vector<double> values;

  double norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Symmetric tridiagonal matrix; `off[i]` couples rows i and i + 1.
struct TridiagonalHessian {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }

  std::vector<double> apply(std::span<const double> d) const {
    const std::size_t n = size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = diag[i] * d[i];
      if (i > 0) out[i] += off[i - 1] * d[i - 1];
      if (i + 1 < n) out[i] += off[i] * d[i + 1];
    }
    return out;
  }

  /// <H d, d>
  double quadratic_form(std::span<const double> d) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += diag[i] * d[i] * d[i];
    for (std::size_t i = 0; i + 1 < size(); ++i) s += 2.0 * off[i] * d[i] * d[i + 1];
    return s;
  }
};

struct BoundsReport {
  double m = 0.0;                   // strong-concavity constant
  double grad_norm = 0.0;
  double entropy_gap_bound = 0.0;   // |grad|^2 / (2m)
  double digital_dist_bound = 0.0;  // 2 |grad| / m
  double l1_bound = 0.0;            // |grad| / sqrt(m)
};

/// Everything the Newton iteration needs at one point of Omega, from one pass of slope solves.
struct SurfacePoint {
  BucketStats stats;
  std::vector<double> beta;        // per bucket
  std::vector<double> curvature;   // c_i''(beta_i)
  double discrete_entropy = 0.0;   // -sum p ln p
  double continuous_entropy = 0.0; // -sum p c*(kbar)
  Gradient gradient;
  TridiagonalHessian hessian_discrete;
  TridiagonalHessian hessian_continuous;

  double entropy() const { return discrete_entropy + continuous_entropy; }

  TridiagonalHessian hessian() const {
    TridiagonalHessian h = hessian_discrete;
    for (std::size_t i = 0; i < h.diag.size(); ++i) h.diag[i] += hessian_continuous.diag[i];
    for (std::size_t i = 0; i < h.off.size(); ++i) h.off[i] += hessian_continuous.off[i];
    return h;
  }
};

inline double strong_concavity_constant(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidSlice, "strong concavity constant needs n >= 1");
  const double s = std::sin(std::numbers::pi / (2.0 * static_cast<double>(n) + 2.0));
  return 4.0 * s * s;
}

inline SurfacePoint evaluate_surface(const MarketSlice& slice, const DigitalRectangle& omega,
                                     const DigitalVector& digitals, const BetaSolveConfig& cfg = {}) {
  SurfacePoint pt;
  pt.stats = bucket_stats(slice, omega, digitals);
  const std::size_t n = slice.size();
  const auto& p = pt.stats.p;
  const auto& kbar = pt.stats.kbar;

  pt.beta.resize(n + 1);
  pt.curvature.resize(n + 1);
  // ln alpha_i + beta_i K_i and ln alpha_i + beta_i K_{i+1}, i.e. ln g at both bucket ends.
  std::vector<double> log_g_lo(n + 1), log_g_hi(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const Bucket b = slice.bucket(i);
    const double beta = solve_beta(b, kbar[i], cfg);
    pt.beta[i] = beta;
    pt.curvature[i] = conditional_variance(b, beta);
    const double from_lo = log_partition_from_lo(b, beta);
    const double conj = beta * (kbar[i] - b.lo) - from_lo;
    pt.discrete_entropy -= p[i] * std::log(p[i]);
    pt.continuous_entropy -= p[i] * conj;
    log_g_lo[i] = std::log(p[i]) - from_lo;
    if (!b.infinite()) log_g_hi[i] = std::log(p[i]) - log_partition_from_hi(b, beta);
  }

  pt.gradient.values.resize(n);
  pt.hessian_discrete.diag.resize(n);
  pt.hessian_continuous.diag.resize(n);
  pt.hessian_discrete.off.resize(n > 0 ? n - 1 : 0);
  pt.hessian_continuous.off.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double k = slice.strike(i);
    pt.gradient.values[i - 1] = log_g_hi[i - 1] - log_g_lo[i];

    const double left_gap = k - kbar[i - 1];
    const double right_gap = kbar[i] - k;
    pt.hessian_discrete.diag[i - 1] = -1.0 / p[i - 1] - 1.0 / p[i];
    pt.hessian_continuous.diag[i - 1] = -left_gap * left_gap / (p[i - 1] * pt.curvature[i - 1]) -
                                        right_gap * right_gap / (p[i] * pt.curvature[i]);
    if (i < n) {
      const double upper_gap = slice.strike(i + 1) - kbar[i];
      pt.hessian_discrete.off[i - 1] = 1.0 / p[i];
      pt.hessian_continuous.off[i - 1] = -right_gap * upper_gap / (p[i] * pt.curvature[i]);
    }
  }
  return pt;
}

inline SurfacePoint evaluate_surface(const MarketSlice& slice, const DigitalVector& digitals) {
  return evaluate_surface(slice, validate_slice(slice), digitals);
}

/// H(D) = -sum p_i ln p_i - sum p_i c_i*(kbar_i).
inline double entropy_from_market(const MarketSlice& slice, const DigitalVector& digitals) {
  return evaluate_surface(slice, digitals).entropy();
}

/// dH/dD_i = ln g(K_i-) - ln g(K_i+).
inline Gradient entropy_gradient(const MarketSlice& slice, const DigitalVector& digitals) {
  return evaluate_surface(slice, digitals).gradient;
}

inline TridiagonalHessian entropy_hessian(const MarketSlice& slice, const DigitalVector& digitals) {
  return evaluate_surface(slice, digitals).hessian();
}

inline BoundsReport bounds_from_gradient(const Gradient& g) {
  BoundsReport r;
  r.m = strong_concavity_constant(g.values.size());
  r.grad_norm = g.norm();
  r.entropy_gap_bound = r.grad_norm * r.grad_norm / (2.0 * r.m);
  r.digital_dist_bound = 2.0 * r.grad_norm / r.m;
  r.l1_bound = r.grad_norm / std::sqrt(r.m);
  return r;
}

inline BoundsReport bounds_report(const MarketSlice& slice, const DigitalVector& digitals) {
  return bounds_from_gradient(entropy_gradient(slice, digitals));
}

}  // namespace maxent
