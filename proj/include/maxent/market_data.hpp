#pragma once

// One maturity's call quotes, the box of arbitrage-free digital prices they
// imply, and the per-bucket statistics a digital vector induces.
//
// Everything here is undiscounted: prices are expectations under the density.
// The implicit end points are K_0 = 0 with C_0 = forward and D_0 = 1, and
// K_{n+1} = inf with C_{n+1} = D_{n+1} = 0.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maxent/error.hpp"
#include "maxent/segment_math.hpp"

namespace maxent {

struct MarketSlice {
  double forward = 0.0;
  double discount_factor = 1.0;
  std::vector<double> strikes;  // K_1..K_n, ascending
  std::vector<double> calls;    // undiscounted C_1..C_n

  /// Builds a slice from discounted market quotes.
  static MarketSlice from_discounted(double forward, double discount_factor, std::vector<double> strikes,
                                     std::span<const double> discounted_calls) {
    MarketSlice slice{forward, discount_factor, std::move(strikes), {}};
    slice.calls.reserve(discounted_calls.size());
    for (double c : discounted_calls) slice.calls.push_back(c / discount_factor);
    return slice;
  }

  std::size_t size() const { return strikes.size(); }

  /// K_i for i in [0, n]; K_0 = 0.
  double strike(std::size_t i) const { return i == 0 ? 0.0 : strikes[i - 1]; }

  /// C_i for i in [0, n + 1].
  double call(std::size_t i) const {
    if (i == 0) return forward;
    if (i > size()) return 0.0;
    return calls[i - 1];
  }

  /// Bucket [K_i, K_{i+1}) for i in [0, n].
  Bucket bucket(std::size_t i) const {
    return {strike(i), i < size() ? strikes[i] : std::numeric_limits<double>::infinity()};
  }

  /// Sub-slice keeping the quotes at the given (ascending, 0-based) strike indices.
  MarketSlice subset(std::span<const std::size_t> indices) const {
    MarketSlice out{forward, discount_factor, {}, {}};
    for (std::size_t idx : indices) {
      if (idx >= size()) throw Error(ErrorCode::InvalidSlice, "strike index " + std::to_string(idx) + " out of range");
      out.strikes.push_back(strikes[idx]);
      out.calls.push_back(calls[idx]);
    }
    return out;
  }
};

/// Undiscounted digital prices D_1..D_n.
struct DigitalVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  /// D_i for i in [0, n + 1]; D_0 = 1, D_{n+1} = 0.
  double at_extended(std::size_t i) const {
    if (i == 0) return 1.0;
    if (i > size()) return 0.0;
    return values[i - 1];
  }
};

/// The open box Omega of digital prices consistent with the call quotes.
struct DigitalRectangle {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
  double width(std::size_t i) const { return upper[i] - lower[i]; }

  bool contains(const DigitalVector& d) const {
    if (d.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (!(d[i] > lower[i] && d[i] < upper[i])) return false;
    }
    return true;
  }

  DigitalVector midpoint() const {
    DigitalVector mid{std::vector<double>(size())};
    for (std::size_t i = 0; i < size(); ++i) mid[i] = 0.5 * (lower[i] + upper[i]);
    return mid;
  }
};

struct BucketStats {
  std::vector<double> p;     // p_0..p_n, bucket probabilities
  std::vector<double> kbar;  // conditional means per bucket
};

namespace detail {

inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

/// Checks the quotes for static arbitrage and returns Omega.
inline DigitalRectangle validate_slice(const MarketSlice& slice) {
  using detail::fmt_num;
  const std::size_t n = slice.size();
  if (slice.calls.size() != n) {
    throw Error(ErrorCode::InvalidSlice, "strike and call counts differ (" + std::to_string(n) + " vs " +
                                             std::to_string(slice.calls.size()) + ")");
  }
  if (!(slice.forward > 0.0) || !std::isfinite(slice.forward)) {
    throw Error(ErrorCode::InvalidSlice, "forward must be positive, got " + fmt_num(slice.forward));
  }
  if (!(slice.discount_factor > 0.0 && slice.discount_factor <= 1.0)) {
    throw Error(ErrorCode::InvalidSlice, "discount factor must lie in (0, 1], got " + fmt_num(slice.discount_factor));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double k = slice.strikes[i];
    if (!(k > 0.0) || !std::isfinite(k)) throw Error(ErrorCode::BadStrikes, "strike " + fmt_num(k) + " is not positive");
    if (i > 0 && !(k > slice.strikes[i - 1])) {
      throw Error(ErrorCode::BadStrikes, "strikes not strictly increasing at " + fmt_num(k));
    }
  }
  for (std::size_t i = 1; i <= n; ++i) {
    if (!std::isfinite(slice.call(i)) || !(slice.call(i) < slice.call(i - 1))) {
      throw Error(ErrorCode::NonMonotoneCalls, "call at strike " + fmt_num(slice.strike(i)) + " (" +
                                                   fmt_num(slice.call(i)) + ") not below previous price " +
                                                   fmt_num(slice.call(i - 1)));
    }
    if (!(slice.call(i) > 0.0)) {
      throw Error(ErrorCode::NonMonotoneCalls, "call at strike " + fmt_num(slice.strike(i)) + " is not positive");
    }
  }

  DigitalRectangle omega{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 1; i <= n; ++i) {
    omega.upper[i - 1] = -(slice.call(i) - slice.call(i - 1)) / (slice.strike(i) - slice.strike(i - 1));
    omega.lower[i - 1] = i == n ? 0.0 : -(slice.call(i + 1) - slice.call(i)) / (slice.strike(i + 1) - slice.strike(i));
  }
  if (n > 0 && !(omega.upper[0] < 1.0)) {
    throw Error(ErrorCode::NonConvexCalls, "call at strike " + fmt_num(slice.strike(1)) +
                                               " is not above its intrinsic value forward - strike");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(omega.lower[i] < omega.upper[i])) {
      throw Error(ErrorCode::NonConvexCalls, "call prices not strictly convex at strike " +
                                                 fmt_num(slice.strikes[i]) + " (right spread " +
                                                 fmt_num(omega.lower[i]) + " >= left spread " +
                                                 fmt_num(omega.upper[i]) + ")");
    }
  }
  return omega;
}

/// Throws OutOfRectangle naming the first digital that leaves Omega.
inline void require_inside(const MarketSlice& slice, const DigitalRectangle& omega, const DigitalVector& digitals) {
  using detail::fmt_num;
  if (digitals.size() != omega.size()) {
    throw Error(ErrorCode::OutOfRectangle, "expected " + std::to_string(omega.size()) + " digitals, got " +
                                               std::to_string(digitals.size()));
  }
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (!(digitals[i] > omega.lower[i] && digitals[i] < omega.upper[i])) {
      throw Error(ErrorCode::OutOfRectangle, "digital " + fmt_num(digitals[i]) + " at strike " +
                                                 fmt_num(slice.strikes[i]) + " outside (" + fmt_num(omega.lower[i]) +
                                                 ", " + fmt_num(omega.upper[i]) + ")");
    }
  }
}

/// Bucket probabilities p_i = D_i - D_{i+1} and conditional means
/// kbar_i = ((C_i + K_i D_i) - (C_{i+1} + K_{i+1} D_{i+1})) / p_i, with K_{n+1} D_{n+1} = 0.
inline BucketStats bucket_stats(const MarketSlice& slice, const DigitalRectangle& omega, const DigitalVector& digitals) {
  require_inside(slice, omega, digitals);
  const std::size_t n = slice.size();
  BucketStats stats{std::vector<double>(n + 1), std::vector<double>(n + 1)};
  for (std::size_t i = 0; i <= n; ++i) {
    const double p = digitals.at_extended(i) - digitals.at_extended(i + 1);
    const Bucket b = slice.bucket(i);
    // Offset from the bucket's left end; algebraically identical to the textbook formula.
    const double spread = slice.call(i) - slice.call(i + 1);
    const double offset = i < n ? (spread - b.width() * digitals.at_extended(i + 1)) / p : slice.call(i) / p;
    const double kbar = b.lo + offset;
    if (!(p > 0.0) || !(kbar > b.lo) || !(kbar < b.hi)) {
      throw Error(ErrorCode::OutOfRectangle, "bucket " + std::to_string(i) + " has degenerate statistics (p=" +
                                                 detail::fmt_num(p) + ", mean=" + detail::fmt_num(kbar) + ")");
    }
    stats.p[i] = p;
    stats.kbar[i] = kbar;
  }
  return stats;
}

inline BucketStats bucket_stats(const MarketSlice& slice, const DigitalVector& digitals) {
  return bucket_stats(slice, validate_slice(slice), digitals);
}

/// Pulls entries on or outside Omega to 1e-9 of the side length inside it.
inline DigitalVector clamp_inside(const DigitalRectangle& omega, DigitalVector d) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double pad = 1e-9 * omega.width(i);
    if (!(d[i] > omega.lower[i])) d[i] = omega.lower[i] + pad;
    if (!(d[i] < omega.upper[i])) d[i] = omega.upper[i] - pad;
  }
  return d;
}

enum class EndpointRule { rectangle_midpoint, supplied };

/// Centered-call-spread digital proxies
///   D_i = -(C_{i+1} - C_{i-1}) / (K_{i+1} - K_{i-1}),  1 < i < n,
/// with the two end points taken from the rectangle midpoint or from `endpoints`
/// (first, last). Values on or outside Omega are pulled inside by 1e-9 of the width.
inline DigitalVector ccs_digitals(const MarketSlice& slice, EndpointRule rule = EndpointRule::rectangle_midpoint,
                                  std::optional<std::pair<double, double>> endpoints = std::nullopt) {
  const DigitalRectangle omega = validate_slice(slice);
  const std::size_t n = slice.size();
  if (n == 0) throw Error(ErrorCode::InvalidSlice, "centered call spreads need at least one strike");
  if (rule == EndpointRule::supplied && !endpoints) {
    throw Error(ErrorCode::InvalidSlice, "supplied endpoint rule requires endpoint digitals");
  }

  DigitalVector d{std::vector<double>(n)};
  for (std::size_t i = 2; i + 1 <= n; ++i) {
    d[i - 1] = -(slice.call(i + 1) - slice.call(i - 1)) / (slice.strike(i + 1) - slice.strike(i - 1));
  }
  if (rule == EndpointRule::rectangle_midpoint) {
    d[0] = 0.5 * (omega.lower[0] + omega.upper[0]);
    d[n - 1] = 0.5 * (omega.lower[n - 1] + omega.upper[n - 1]);
  } else {
    d[n - 1] = endpoints->second;
    d[0] = endpoints->first;
  }

  return clamp_inside(omega, std::move(d));
}

}  // namespace maxent
