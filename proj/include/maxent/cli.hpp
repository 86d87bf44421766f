#pragma once

// Command implementations behind the `maxent` tool. Each command reads and writes
// streams and returns the process exit code:
//   0 success, 1 usage or I/O problem, 2 arbitrage or domain error, 3 solver soft failure.

#include <fmt/format.h>

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxent/black_scholes.hpp"
#include "maxent/density.hpp"
#include "maxent/entropy_surface.hpp"
#include "maxent/error.hpp"
#include "maxent/io.hpp"
#include "maxent/market_data.hpp"
#include "maxent/solver.hpp"

namespace maxent::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_arbitrage = 2;
inline constexpr int exit_solver = 3;

/// Maps library errors onto the exit-code contract.
inline int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ParseError:
      return exit_usage;
    case ErrorCode::NoConvergence:
    case ErrorCode::SingularPivot:
      return exit_solver;
    default:
      return exit_arbitrage;
  }
}

enum class CalibrationMode { buchen_kelly, with_digitals };

struct CalibrateOptions {
  CalibrationMode mode = CalibrationMode::buchen_kelly;
  SolverConfig solver;
};

struct CalibrateResult {
  Calibration calibration;
  nlohmann::ordered_json report;
  int exit_code = exit_ok;
};

inline nlohmann::ordered_json bounds_json(const BoundsReport& b) {
  return {{"m", b.m},
          {"grad_norm", b.grad_norm},
          {"entropy_gap_bound", b.entropy_gap_bound},
          {"digital_dist_bound", b.digital_dist_bound},
          {"l1_bound", b.l1_bound}};
}

inline CalibrateResult calibrate(const io::QuoteFile& quotes, const CalibrateOptions& opts) {
  const MarketSlice slice = quotes.slice();
  std::optional<Calibration> cal;
  if (slice.size() == 0) {
    // Only the forward is known: the exponential density, nothing to optimise.
    cal.emplace(solve_constrained(slice, DigitalVector{}, opts.solver.beta));
  } else if (opts.mode == CalibrationMode::with_digitals) {
    cal.emplace(solve_constrained(slice, quotes.undiscounted_digitals(), opts.solver.beta));
  } else {
    cal.emplace(solve_buchen_kelly(slice, opts.solver));
  }
  const SolverReport& rep = cal->report;
  const bool with_digitals = opts.mode == CalibrationMode::with_digitals;

  nlohmann::ordered_json report;
  report["mode"] = with_digitals ? "with_digitals" : "buchen_kelly";
  report["forward"] = slice.forward;
  report["discount_factor"] = slice.discount_factor;
  report["n"] = slice.size();
  report["entropy"] = entropy(cal->density);
  report["iterations"] = rep.iterations;
  report["termination"] = with_digitals ? "constrained" : to_string(rep.termination);
  if (slice.size() > 0) {
    report["grad_norm"] = rep.bounds.grad_norm;
    report["bounds"] = bounds_json(rep.bounds);
  }
  report["max_log_jump"] = max_log_jump(cal->density).value;
  report["digitals"] = rep.solution.values;
  report["grad_norm_history"] = rep.grad_norm_history;
  report["step_sizes"] = rep.step_sizes;

  const int code = !with_digitals && rep.termination != Termination::converged ? exit_solver : exit_ok;
  return {std::move(*cal), std::move(report), code};
}

enum class Instrument { call, digital, cdf, quantile };

/// Value of one instrument under the density.
inline double price(const PiecewiseExpDensity& d, Instrument instrument, double value) {
  switch (instrument) {
    case Instrument::call:
      if (value < 0.0) throw Error(ErrorCode::DomainError, "strike must be non-negative");
      return price_call(d, value);
    case Instrument::digital:
      if (value < 0.0) throw Error(ErrorCode::DomainError, "strike must be non-negative");
      return price_digital(d, value);
    case Instrument::cdf:
      if (value < 0.0) throw Error(ErrorCode::DomainError, "cdf argument must be non-negative");
      return cdf(d, value);
    case Instrument::quantile:
      return quantile(d, value);
  }
  return 0.0;
}

struct SynthOptions {
  bs::Market market;
  std::vector<double> strikes;
};

/// Black-Scholes calls and digitals at the strikes, discounted like market quotes.
inline io::QuoteFile synth_bs(const SynthOptions& opts) {
  bs::validate(opts.market);
  io::QuoteFile q;
  q.forward = opts.market.forward;
  q.discount_factor = opts.market.discount_factor();
  q.maturity = fmt::format("{:g}", opts.market.maturity);
  for (double k : opts.strikes) {
    if (!(k > 0.0)) throw Error(ErrorCode::BadStrikes, "strike " + fmt::format("{:g}", k) + " is not positive");
    q.strikes.push_back(k);
    q.calls.push_back(q.discount_factor * bs::call(opts.market, k));
    q.digitals.push_back(q.discount_factor * bs::digital(opts.market, k));
  }
  return q;
}

enum class StudyMethod { BK, CCS, BS };

inline const char* to_string(StudyMethod m) {
  switch (m) {
    case StudyMethod::BK: return "BK";
    case StudyMethod::CCS: return "CCS";
    case StudyMethod::BS: return "BS";
  }
  return "?";
}

struct StudyOptions {
  std::vector<std::vector<std::size_t>> subsets;  // 0-based strike indices; empty means all strikes
  std::set<StudyMethod> methods{StudyMethod::BK, StudyMethod::CCS};
  std::optional<double> sigma;     // enables BS rows
  std::optional<double> maturity;  // overrides the file's maturity for BS rows
  EndpointRule ccs_endpoints = EndpointRule::supplied;  // supplied = BK endpoint digitals
  SolverConfig solver;
};

struct StudyRow {
  std::size_t n = 0;
  StudyMethod method = StudyMethod::BK;
  double entropy = 0.0;
  double relative_entropy = 0.0;  // against the subset's BK density
  std::vector<std::size_t> indices;
  DigitalVector digitals;
};

/// For each strike subset: BK density by Newton, then CCS / BS digital proxies compared to it.
inline std::vector<StudyRow> study(const io::QuoteFile& quotes, const StudyOptions& opts) {
  const MarketSlice full = quotes.slice();
  validate_slice(full);
  std::vector<std::vector<std::size_t>> subsets = opts.subsets;
  if (subsets.empty()) {
    subsets.emplace_back();
    for (std::size_t i = 0; i < full.size(); ++i) subsets.back().push_back(i);
  }
  if (opts.methods.count(StudyMethod::BS) && !opts.sigma) {
    throw Error(ErrorCode::DomainError, "BS rows need --sigma");
  }
  const std::optional<double> maturity = opts.maturity ? opts.maturity : quotes.maturity_years();
  if (opts.methods.count(StudyMethod::BS) && !maturity) {
    throw Error(ErrorCode::DomainError, "BS rows need a numeric maturity (file header or --maturity)");
  }

  std::vector<StudyRow> rows;
  std::vector<StudyRow> ccs_rows;
  std::vector<StudyRow> bs_rows;
  for (const auto& subset : subsets) {
    const MarketSlice slice = full.subset(subset);
    const Calibration bk = solve_buchen_kelly(slice, opts.solver);
    if (bk.report.termination != Termination::converged) {
      throw Error(ErrorCode::NoConvergence, "Buchen-Kelly solve did not converge for a " +
                                                std::to_string(slice.size()) + "-strike subset");
    }
    const double bk_entropy = entropy(bk.density);
    auto make_row = [&](StudyMethod method, const DigitalVector& d) {
      const PiecewiseExpDensity g = build_density(slice, d, opts.solver.beta);
      return StudyRow{slice.size(), method, entropy(g), relative_entropy(g, bk.density), subset, d};
    };
    if (opts.methods.count(StudyMethod::BK)) {
      rows.push_back({slice.size(), StudyMethod::BK, bk_entropy, 0.0, subset, bk.report.solution});
    }
    if (opts.methods.count(StudyMethod::CCS)) {
      const auto& sol = bk.report.solution;
      const DigitalVector d = ccs_digitals(slice, opts.ccs_endpoints, std::make_pair(sol[0], sol[sol.size() - 1]));
      ccs_rows.push_back(make_row(StudyMethod::CCS, d));
    }
    if (opts.methods.count(StudyMethod::BS)) {
      const bs::Market m{slice.forward, 0.0, *opts.sigma, *maturity};
      DigitalVector d;
      for (double k : slice.strikes) d.values.push_back(bs::digital(m, k));
      bs_rows.push_back(make_row(StudyMethod::BS, clamp_inside(validate_slice(slice), std::move(d))));
    }
  }
  rows.insert(rows.end(), ccs_rows.begin(), ccs_rows.end());
  rows.insert(rows.end(), bs_rows.begin(), bs_rows.end());
  return rows;
}

/// Table layout: one row per (method, subset), one digital column per strike of the file.
inline void write_study_csv(std::ostream& out, const io::QuoteFile& quotes, const std::vector<StudyRow>& rows) {
  out << "n,method,entropy,rel_entropy";
  for (double k : quotes.strikes) out << fmt::format(",D@{:g}", k);
  out << '\n';
  for (const auto& row : rows) {
    out << fmt::format("{},{},{:.4f},{:.4f}", row.n, to_string(row.method), row.entropy, row.relative_entropy);
    std::vector<std::string> cells(quotes.strikes.size());
    for (std::size_t j = 0; j < row.indices.size(); ++j) cells[row.indices[j]] = fmt::format("{:.3f}", row.digitals[j]);
    for (const auto& c : cells) out << ',' << c;
    out << '\n';
  }
}

struct PlotOptions {
  double from = 0.0;
  double to = 0.0;
  int samples = 101;
};

/// Samples g on a uniform grid, then lists both one-sided limits at each strike.
inline void write_plot_data(std::ostream& out, const PiecewiseExpDensity& d, const PlotOptions& opts) {
  if (opts.samples < 2) throw Error(ErrorCode::DomainError, "need at least 2 samples");
  if (!(opts.from >= 0.0) || !(opts.to > opts.from)) {
    throw Error(ErrorCode::DomainError, "plot range must satisfy 0 <= from < to");
  }
  out << "x,g\n";
  for (int k = 0; k < opts.samples; ++k) {
    const double x = k + 1 == opts.samples
                         ? opts.to
                         : opts.from + (opts.to - opts.from) * static_cast<double>(k) / (opts.samples - 1);
    out << io::format_double(x) << ',' << io::format_double(d.pdf(x)) << '\n';
  }
  out << "\nstrike,g_left,g_right\n";
  for (std::size_t i = 1; i < d.segments(); ++i) {
    out << io::format_double(d.breakpoints()[i]) << ',' << io::format_double(std::exp(d.log_left_limit(i))) << ','
        << io::format_double(std::exp(d.log_right_limit(i))) << '\n';
  }
}

}  // namespace maxent::cli
