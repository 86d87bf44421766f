#pragma once

// Test-only helpers: random arbitrage-free markets and independent oracles
// (adaptive quadrature, finite differences, dense elimination, bisection).
// Nothing in here goes through the closed-form segment moments.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <random>
#include <utility>
#include <vector>

#include "maxent/black_scholes.hpp"
#include "maxent/density.hpp"
#include "maxent/io.hpp"
#include "maxent/market_data.hpp"

namespace maxent::testing {

/// Two-lognormal mixture with a common forward; gives skewed but arbitrage-free quotes.
struct MixtureMarket {
  double forward = 100.0;
  double weight = 1.0;
  double shift = 0.0;
  double sd1 = 0.25;
  double sd2 = 0.25;

  double call(double k) const {
    const double f1 = forward * (1.0 + shift * (1.0 - weight));
    const double f2 = forward * (1.0 - shift * weight);
    const bs::Market m1{f1, 0.0, sd1, 1.0};
    const bs::Market m2{f2, 0.0, sd2, 1.0};
    return weight * bs::call(m1, k) + (1.0 - weight) * bs::call(m2, k);
  }
};

struct RandomCase {
  MarketSlice slice;
  DigitalRectangle omega;
};

inline RandomCase random_slice(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MixtureMarket mkt;
  mkt.forward = 50.0 * std::pow(40.0, unit(rng));
  mkt.weight = 0.5 + 0.5 * unit(rng);
  mkt.shift = -0.1 + 0.2 * unit(rng);
  mkt.sd1 = 0.15 + 0.45 * unit(rng);
  mkt.sd2 = 0.15 + 0.45 * unit(rng);

  std::vector<double> strikes;
  while (strikes.size() < n) {
    strikes.clear();
    for (std::size_t i = 0; i < n; ++i) strikes.push_back(mkt.forward * (0.6 + unit(rng)));
    std::sort(strikes.begin(), strikes.end());
    for (std::size_t i = 1; i < strikes.size(); ++i) {
      if (strikes[i] - strikes[i - 1] < 0.02 * mkt.forward) {
        strikes.clear();
        break;
      }
    }
  }
  MarketSlice slice{mkt.forward, 1.0, strikes, {}};
  for (double k : strikes) slice.calls.push_back(mkt.call(k));
  return {slice, validate_slice(slice)};
}

/// Uniform point in the middle 80% of each side of Omega.
inline DigitalVector random_interior(std::mt19937_64& rng, const DigitalRectangle& omega) {
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  DigitalVector d{std::vector<double>(omega.size())};
  for (std::size_t i = 0; i < omega.size(); ++i) d[i] = omega.lower[i] + unit(rng) * omega.width(i);
  return d;
}

/// Adaptive Gauss-Kronrod over [a, b]; b may be +inf.
inline double integrate(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-13, &err);
}

/// Sums a per-segment integrand over the density's breakpoints, cutting the tail where it is negligible.
inline double integrate_segments(const PiecewiseExpDensity& d,
                                 const std::function<double(std::size_t, double)>& integrand) {
  double total = 0.0;
  for (std::size_t i = 0; i < d.segments(); ++i) {
    const double lo = d.breakpoints()[i];
    const double hi = i + 1 < d.segments() ? d.breakpoints()[i + 1] : lo + 80.0 / std::abs(d.beta()[i]);
    total += integrate([&](double x) { return integrand(i, x); }, lo, hi);
  }
  return total;
}

inline double quad_entropy(const PiecewiseExpDensity& d) {
  return integrate_segments(d, [&](std::size_t i, double x) {
    const double lg = d.log_alpha()[i] + d.beta()[i] * x;
    return -std::exp(lg) * lg;
  });
}

inline double quad_relative_entropy(const PiecewiseExpDensity& g, const PiecewiseExpDensity& p) {
  return integrate_segments(g, [&](std::size_t i, double x) {
    const double lg = g.log_alpha()[i] + g.beta()[i] * x;
    const double lp = p.log_alpha()[i] + p.beta()[i] * x;
    return std::exp(lg) * (lg - lp);
  });
}

inline double quad_l1_distance(const PiecewiseExpDensity& g, const PiecewiseExpDensity& h) {
  // Both densities share breakpoints; integrate on the union tail of the slower decay.
  PiecewiseExpDensity slower = std::abs(g.beta().back()) < std::abs(h.beta().back()) ? g : h;
  return integrate_segments(slower, [&](std::size_t i, double x) {
    return std::abs(std::exp(g.log_alpha()[i] + g.beta()[i] * x) - std::exp(h.log_alpha()[i] + h.beta()[i] * x));
  });
}

inline double quad_mass(const PiecewiseExpDensity& d) {
  return integrate_segments(d, [&](std::size_t i, double x) { return std::exp(d.log_alpha()[i] + d.beta()[i] * x); });
}

/// Central difference of f along coordinate i of x.
inline double central_difference(const std::function<double(const DigitalVector&)>& f, DigitalVector x, std::size_t i,
                                 double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

/// Fourth-order central difference of f along coordinate i of x.
inline double central_difference4(const std::function<double(const DigitalVector&)>& f, DigitalVector x,
                                  std::size_t i, double h) {
  const double x0 = x[i];
  auto at = [&](double t) {
    x[i] = x0 + t;
    return f(x);
  };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12.0 * h);
}

/// Gaussian elimination with partial pivoting on a dense copy.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

/// Bisection root of a monotone increasing f on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int steps = 200) {
  for (int k = 0; k < steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

#ifdef MAXENT_DATA_DIR
inline io::QuoteFile load_quotes(const std::string& name) {
  std::ifstream in(std::string(MAXENT_DATA_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing data file " + name);
  return io::parse_quote_file(in);
}
#endif

/// Black-Scholes slice of the flat-volatility study: F=100, sigma=0.25, T=1, strikes 60..140 step 5.
inline MarketSlice flat_bs_slice() {
  const bs::Market m{100.0, 0.0, 0.25, 1.0};
  MarketSlice s{100.0, 1.0, {}, {}};
  for (int k = 60; k <= 140; k += 5) {
    s.strikes.push_back(k);
    s.calls.push_back(bs::call(m, k));
  }
  return s;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace maxent::testing
