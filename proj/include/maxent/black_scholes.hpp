#pragma once

// Flat-volatility Black-Scholes quotes used to synthesise test markets.

#include <cmath>
#include <numbers>

#include "maxent/error.hpp"

namespace maxent::bs {

/// Standard normal CDF via erfc; accurate to ~1e-16 absolute.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct Market {
  double forward = 100.0;
  double rate = 0.0;
  double sigma = 0.25;
  double maturity = 1.0;

  double discount_factor() const { return std::exp(-rate * maturity); }
};

inline void validate(const Market& m) {
  if (!(m.sigma > 0.0)) throw Error(ErrorCode::DomainError, "volatility must be positive");
  if (!(m.maturity > 0.0)) throw Error(ErrorCode::DomainError, "maturity must be positive");
  if (!(m.forward > 0.0)) throw Error(ErrorCode::DomainError, "forward must be positive");
}

/// Undiscounted call price E[(S_T - K)^+].
inline double call(const Market& m, double strike) {
  validate(m);
  if (strike <= 0.0) return m.forward - strike;
  const double sd = m.sigma * std::sqrt(m.maturity);
  const double d1 = (std::log(m.forward / strike) + 0.5 * sd * sd) / sd;
  return m.forward * normal_cdf(d1) - strike * normal_cdf(d1 - sd);
}

/// Undiscounted digital price P[S_T >= K] = N(d2).
inline double digital(const Market& m, double strike) {
  validate(m);
  if (strike <= 0.0) return 1.0;
  const double sd = m.sigma * std::sqrt(m.maturity);
  return normal_cdf((std::log(m.forward / strike) - 0.5 * sd * sd) / sd);
}

}  // namespace maxent::bs
