#pragma once

// Piecewise-exponential densities g(x) = alpha_i e^{beta_i x} on [K_i, K_{i+1}),
// with K_0 = 0 and an unbounded last segment. Parameters are kept as
// (ln alpha, beta) so that large strikes do not overflow.
//
// Every pricing and information quantity reduces to two per-segment moments:
// the mass exp(ln alpha + c(beta)) and the conditional mean c'(beta).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "maxent/error.hpp"
#include "maxent/market_data.hpp"
#include "maxent/segment_math.hpp"

namespace maxent {

class PiecewiseExpDensity {
 public:
  PiecewiseExpDensity(std::vector<double> breakpoints, std::vector<double> log_alpha, std::vector<double> beta)
      : breakpoints_(std::move(breakpoints)), log_alpha_(std::move(log_alpha)), beta_(std::move(beta)) {
    if (breakpoints_.empty() || breakpoints_.size() != log_alpha_.size() || breakpoints_.size() != beta_.size()) {
      throw Error(ErrorCode::InvalidSlice, "density parameter vectors must be non-empty and of equal length");
    }
    if (breakpoints_.front() != 0.0) throw Error(ErrorCode::InvalidSlice, "first breakpoint must be 0");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
      if (!(breakpoints_[i] > breakpoints_[i - 1])) {
        throw Error(ErrorCode::BadStrikes, "breakpoints must be strictly increasing");
      }
    }
    for (std::size_t i = 0; i < beta_.size(); ++i) {
      if (!std::isfinite(beta_[i]) || !std::isfinite(log_alpha_[i])) {
        throw Error(ErrorCode::DomainError, "non-finite density parameter on segment " + std::to_string(i));
      }
    }
    if (!(beta_.back() < 0.0)) throw Error(ErrorCode::NotIntegrable, "last segment slope must be negative");
  }

  std::size_t segments() const { return breakpoints_.size(); }
  /// Number of interior breakpoints (quoted strikes).
  std::size_t strike_count() const { return breakpoints_.size() - 1; }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& log_alpha() const { return log_alpha_; }
  const std::vector<double>& beta() const { return beta_; }

  Bucket bucket(std::size_t i) const {
    return {breakpoints_[i], i + 1 < segments() ? breakpoints_[i + 1] : std::numeric_limits<double>::infinity()};
  }

  double segment_mass(std::size_t i) const { return std::exp(log_alpha_[i] + log_partition(bucket(i), beta_[i])); }

  /// Conditional mean of the segment.
  double segment_mean(std::size_t i) const { return conditional_mean(bucket(i), beta_[i]); }

  /// ln g(x) on segment i, evaluated at any x.
  double log_density_on(std::size_t i, double x) const { return log_alpha_[i] + beta_[i] * x; }

  /// ln g(K_i-) for 1 <= i <= strike_count().
  double log_left_limit(std::size_t i) const { return log_density_on(i - 1, breakpoints_[i]); }
  /// ln g(K_i+).
  double log_right_limit(std::size_t i) const { return log_density_on(i, breakpoints_[i]); }

  std::size_t segment_of(double x) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  }

  /// Right-continuous density value; zero for x < 0.
  double pdf(double x) const {
    if (x < 0.0) return 0.0;
    return std::exp(log_density_on(segment_of(x), x));
  }

  double total_mass() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < segments(); ++i) sum += segment_mass(i);
    return sum;
  }

  double mean() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < segments(); ++i) sum += segment_mass(i) * segment_mean(i);
    return sum;
  }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> log_alpha_;
  std::vector<double> beta_;
};

/// Density in the original Buchen-Kelly parameterisation
///   g(x) = exp(sum_j lambda_j (x - a_j)^+) / mu,  anchors a_0 = 0 < a_1 < ... .
struct BuchenKellyForm {
  double log_mu = 0.0;
  std::vector<double> anchors;
  std::vector<double> lambdas;

  double mu() const { return std::exp(log_mu); }
};

/// Maximum-entropy density matching the slice's calls and the given digitals.
inline PiecewiseExpDensity build_density(const MarketSlice& slice, const DigitalVector& digitals,
                                         const BetaSolveConfig& cfg = {}) {
  const BucketStats stats = bucket_stats(slice, digitals);
  const std::size_t n = slice.size();
  std::vector<double> breakpoints(n + 1), log_alpha(n + 1), beta(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const Bucket b = slice.bucket(i);
    breakpoints[i] = b.lo;
    beta[i] = solve_beta(b, stats.kbar[i], cfg);
    log_alpha[i] = std::log(stats.p[i]) - log_partition(b, beta[i]);
  }
  return {std::move(breakpoints), std::move(log_alpha), std::move(beta)};
}

namespace detail {

/// Mass and conditional mean of segment i restricted to [from, hi), from >= lo.
inline std::pair<double, double> upper_piece(const PiecewiseExpDensity& d, std::size_t i, double from) {
  Bucket b = d.bucket(i);
  b.lo = std::max(b.lo, from);
  const double beta = d.beta()[i];
  return {std::exp(d.log_alpha()[i] + log_partition(b, beta)), conditional_mean(b, beta)};
}

}  // namespace detail

/// Undiscounted call price E[(S - K)^+].
inline double price_call(const PiecewiseExpDensity& d, double strike) {
  strike = std::max(strike, 0.0);
  double sum = 0.0;
  for (std::size_t i = d.segment_of(strike); i < d.segments(); ++i) {
    const auto [mass, mean] = detail::upper_piece(d, i, strike);
    sum += mass * (mean - strike);
  }
  return sum;
}

/// Undiscounted digital price P[S >= K].
inline double price_digital(const PiecewiseExpDensity& d, double strike) {
  if (strike <= 0.0) return 1.0;
  double sum = 0.0;
  for (std::size_t i = d.segment_of(strike); i < d.segments(); ++i) sum += detail::upper_piece(d, i, strike).first;
  return sum;
}

/// P[S < x], accumulated from the left.
inline double cdf(const PiecewiseExpDensity& d, double x) {
  if (x <= 0.0) return 0.0;
  const std::size_t seg = d.segment_of(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < seg; ++i) sum += d.segment_mass(i);
  if (x > d.breakpoints()[seg]) {
    const Bucket part{d.breakpoints()[seg], x};
    sum += std::exp(d.log_alpha()[seg] + log_partition(part, d.beta()[seg]));
  }
  return sum;
}

/// Inverse of cdf, closed form within each segment.
inline double quantile(const PiecewiseExpDensity& d, double u) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::DomainError, "quantile level must lie in (0, 1)");
  double below = 0.0;
  std::size_t seg = 0;
  for (; seg + 1 < d.segments(); ++seg) {
    const double mass = d.segment_mass(seg);
    if (below + mass >= u) break;
    below += mass;
  }
  const double lo = d.breakpoints()[seg];
  const double beta = d.beta()[seg];
  const double target = u - below;
  const double mass = d.segment_mass(seg);
  // Anchor at whichever end lies closer in mass: log1p near -1 loses everything.
  if (seg + 1 < d.segments() && target > 0.5 * mass) {
    const double hi = d.breakpoints()[seg + 1];
    const double w = (mass - target) / std::exp(d.log_density_on(seg, hi));
    const double z = -beta * w;
    const double x = std::abs(z) < 1e-14 ? hi - w : hi + std::log1p(z) / beta;
    return std::clamp(x, lo, hi);
  }
  // Solve (g(lo+) / beta) (e^{beta (x - lo)} - 1) = u - below.
  const double w = target / std::exp(d.log_density_on(seg, lo));
  const double z = beta * w;
  if (z <= -1.0) return std::numeric_limits<double>::infinity();
  const double x = std::abs(z) < 1e-14 ? lo + w : lo + std::log1p(z) / beta;
  return seg + 1 < d.segments() ? std::clamp(x, lo, d.breakpoints()[seg + 1]) : std::max(x, lo);
}

/// Differential entropy -\int g ln g.
inline double entropy(const PiecewiseExpDensity& d) {
  double sum = 0.0;
  for (std::size_t i = 0; i < d.segments(); ++i) {
    sum -= d.segment_mass(i) * (d.log_alpha()[i] + d.beta()[i] * d.segment_mean(i));
  }
  return sum;
}

/// I(g || prior) = \int g ln(g / prior), both densities on the same breakpoints.
inline double relative_entropy(const PiecewiseExpDensity& g, const PiecewiseExpDensity& prior) {
  if (g.breakpoints() != prior.breakpoints()) {
    throw Error(ErrorCode::GridMismatch, "relative entropy needs identical breakpoints");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < g.segments(); ++i) {
    const double mass = g.segment_mass(i);
    sum += mass * ((g.log_alpha()[i] - prior.log_alpha()[i]) + (g.beta()[i] - prior.beta()[i]) * g.segment_mean(i));
  }
  return sum;
}

struct LogJump {
  double value = 0.0;        // ln g(K-) - ln g(K+)
  std::size_t index = 0;     // 1-based strike index, 0 when there are no strikes
  double strike = 0.0;
};

/// The interior breakpoint with the largest |ln g(K-) - ln g(K+)|.
inline LogJump max_log_jump(const PiecewiseExpDensity& d) {
  LogJump worst;
  for (std::size_t i = 1; i < d.segments(); ++i) {
    const double jump = d.log_left_limit(i) - d.log_right_limit(i);
    if (worst.index == 0 || std::abs(jump) > std::abs(worst.value)) worst = {jump, i, d.breakpoints()[i]};
  }
  return worst;
}

inline BuchenKellyForm to_buchen_kelly(const PiecewiseExpDensity& d, double jump_tol = 1e-6) {
  const LogJump jump = max_log_jump(d);
  if (jump.index != 0 && !(std::abs(jump.value) <= jump_tol)) {
    throw Error(ErrorCode::NotContinuous, "log-density jumps by " + detail::fmt_num(jump.value) + " at strike " +
                                              detail::fmt_num(jump.strike));
  }
  BuchenKellyForm bk;
  bk.log_mu = -d.log_alpha()[0];
  bk.anchors = d.breakpoints();
  bk.lambdas.resize(d.segments());
  bk.lambdas[0] = d.beta()[0];
  for (std::size_t j = 1; j < d.segments(); ++j) bk.lambdas[j] = d.beta()[j] - d.beta()[j - 1];
  return bk;
}

/// Rebuilds the piecewise form; `strikes` are the interior anchors K_1..K_n.
inline PiecewiseExpDensity from_buchen_kelly(const BuchenKellyForm& bk, const std::vector<double>& strikes) {
  if (bk.lambdas.size() != strikes.size() + 1) {
    throw Error(ErrorCode::GridMismatch, "expected " + std::to_string(strikes.size() + 1) + " multipliers, got " +
                                             std::to_string(bk.lambdas.size()));
  }
  const std::size_t m = bk.lambdas.size();
  std::vector<double> breakpoints(m), log_alpha(m), beta(m);
  double slope = 0.0;
  double offset = -bk.log_mu;
  for (std::size_t j = 0; j < m; ++j) {
    breakpoints[j] = j == 0 ? 0.0 : strikes[j - 1];
    slope += bk.lambdas[j];
    if (j > 0) offset -= bk.lambdas[j] * breakpoints[j];
    beta[j] = slope;
    log_alpha[j] = offset;
  }
  if (!(beta.back() < 0.0)) {
    throw Error(ErrorCode::NotIntegrable, "multipliers sum to " + detail::fmt_num(beta.back()) +
                                              " on the last segment; density is not integrable");
  }
  return {std::move(breakpoints), std::move(log_alpha), std::move(beta)};
}

}  // namespace maxent
