#pragma once

// Quote files and density serialisation.
//
// Quote file: CSV with a leading `# key=value` block (forward, discount_factor,
// maturity) and rows `strike,call[,digital]` holding discounted market prices.
// Density file: JSON {"breakpoints": [...], "log_alpha": [...], "beta": [...]}
// with every number printed to 17 significant digits.

#include <fmt/format.h>

#include <cctype>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxent/density.hpp"
#include "maxent/error.hpp"
#include "maxent/market_data.hpp"

namespace maxent::io {

struct QuoteFile {
  double forward = 0.0;
  double discount_factor = 1.0;
  std::string maturity;
  std::vector<double> strikes;
  std::vector<double> calls;                    // discounted
  std::vector<std::optional<double>> digitals;  // discounted, per row

  bool has_digitals() const {
    if (digitals.empty()) return false;
    for (const auto& d : digitals) {
      if (!d) return false;
    }
    return true;
  }

  MarketSlice slice() const { return MarketSlice::from_discounted(forward, discount_factor, strikes, calls); }

  /// Undiscounted digital prices; throws ParseError when a row lacks one.
  DigitalVector undiscounted_digitals() const {
    if (!has_digitals()) throw Error(ErrorCode::ParseError, "quote file has no digital price column");
    DigitalVector d;
    for (const auto& v : digitals) d.values.push_back(*v / discount_factor);
    return d;
  }

  /// Maturity as a year fraction, when the label is numeric.
  std::optional<double> maturity_years() const {
    try {
      std::size_t used = 0;
      const double t = std::stod(maturity, &used);
      if (used == maturity.size()) return t;
    } catch (const std::exception&) {
    }
    return std::nullopt;
  }
};

inline std::string format_double(double v) { return fmt::format("{:.17g}", v); }

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t pos = line.find(sep); pos != std::string_view::npos; pos = line.find(sep, start)) {
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  out.push_back(trim(line.substr(start)));
  return out;
}

inline double parse_number(std::string_view text, std::size_t line_no) {
  const std::string s(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": '" + s + "' is not a number");
}

}  // namespace detail

inline QuoteFile parse_quote_file(std::istream& in) {
  QuoteFile q;
  bool have_forward = false;
  bool seen_header = false;
  std::string raw;
  for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = detail::trim(line.substr(1));
      const std::size_t eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string_view key = detail::trim(body.substr(0, eq));
      const std::string_view value = detail::trim(body.substr(eq + 1));
      if (key == "forward") {
        q.forward = detail::parse_number(value, line_no);
        have_forward = true;
      } else if (key == "discount_factor" || key == "df") {
        q.discount_factor = detail::parse_number(value, line_no);
      } else if (key == "maturity") {
        q.maturity = std::string(value);
      }
      continue;
    }
    const auto fields = detail::split(line, ',');
    if (!seen_header && !fields.empty() && !fields[0].empty() &&
        !std::isdigit(static_cast<unsigned char>(fields[0].front())) && fields[0].front() != '.') {
      seen_header = true;
      continue;
    }
    seen_header = true;
    if (fields.size() < 2 || fields.size() > 3) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected strike,call[,digital]");
    }
    q.strikes.push_back(detail::parse_number(fields[0], line_no));
    q.calls.push_back(detail::parse_number(fields[1], line_no));
    if (fields.size() == 3 && !fields[2].empty()) {
      q.digitals.push_back(detail::parse_number(fields[2], line_no));
    } else {
      q.digitals.push_back(std::nullopt);
    }
  }
  if (!have_forward) throw Error(ErrorCode::ParseError, "missing '# forward=' header");
  return q;
}

inline QuoteFile parse_quote_file(const std::string& text) {
  std::istringstream in(text);
  return parse_quote_file(in);
}

inline void write_quote_file(std::ostream& out, const QuoteFile& q) {
  out << "# forward=" << format_double(q.forward) << '\n';
  out << "# discount_factor=" << format_double(q.discount_factor) << '\n';
  if (!q.maturity.empty()) out << "# maturity=" << q.maturity << '\n';
  const bool digitals = q.has_digitals();
  out << (digitals ? "strike,call,digital\n" : "strike,call\n");
  for (std::size_t i = 0; i < q.strikes.size(); ++i) {
    out << format_double(q.strikes[i]) << ',' << format_double(q.calls[i]);
    if (digitals) out << ',' << format_double(*q.digitals[i]);
    out << '\n';
  }
}

namespace detail {

inline std::string json_array(const std::vector<double>& values) {
  std::string s = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) s += ", ";
    s += format_double(values[i]);
  }
  return s + "]";
}

}  // namespace detail

inline std::string density_to_json(const PiecewiseExpDensity& d) {
  return fmt::format("{{\n  \"breakpoints\": {},\n  \"log_alpha\": {},\n  \"beta\": {}\n}}\n",
                     detail::json_array(d.breakpoints()), detail::json_array(d.log_alpha()),
                     detail::json_array(d.beta()));
}

inline PiecewiseExpDensity density_from_json_object(const nlohmann::json& j) {
  try {
    return {j.at("breakpoints").get<std::vector<double>>(), j.at("log_alpha").get<std::vector<double>>(),
            j.at("beta").get<std::vector<double>>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("density JSON: ") + e.what());
  }
}

inline PiecewiseExpDensity density_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("density JSON: ") + e.what());
  }
  return density_from_json_object(j);
}

}  // namespace maxent::io
