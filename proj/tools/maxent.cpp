// maxent: calibrate maximum-entropy densities to one maturity of option quotes.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "maxent/cli.hpp"

namespace {

using namespace maxent;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to `path`, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<std::size_t> parse_indices(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const long v = std::stol(item, &used);
    if (used != item.size() || v < 0) throw CLI::ValidationError("--subset", "bad strike index '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

struct SolverFlags {
  double grad_tol = 1e-9;
  int max_iter = 100;

  void attach(CLI::App* app) {
    app->add_option("--grad-tol", grad_tol, "Stop when the entropy gradient norm falls below this")
        ->check(CLI::PositiveNumber);
    app->add_option("--max-iter", max_iter, "Newton iteration cap")->check(CLI::NonNegativeNumber);
  }
  SolverConfig config() const {
    SolverConfig cfg;
    cfg.grad_tol = grad_tol;
    cfg.max_iter = max_iter;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-entropy risk-neutral densities from call (and digital) quotes"};
  app.require_subcommand(1);

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Fit a density to a quote file");
  std::string cal_input, cal_output, cal_report;
  cli::CalibrationMode cal_mode = cli::CalibrationMode::buchen_kelly;
  const std::map<std::string, cli::CalibrationMode> mode_map{{"buchen_kelly", cli::CalibrationMode::buchen_kelly},
                                                             {"bk", cli::CalibrationMode::buchen_kelly},
                                                             {"with_digitals", cli::CalibrationMode::with_digitals}};
  SolverFlags cal_solver;
  calibrate->add_option("quotes", cal_input, "Quote file (CSV)")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--mode", cal_mode, "buchen_kelly or with_digitals")
      ->transform(CLI::CheckedTransformer(mode_map, CLI::ignore_case));
  calibrate->add_option("--output,-o", cal_output, "Density JSON destination");
  calibrate->add_option("--report", cal_report, "Report JSON destination (default: stdout)");
  cal_solver.attach(calibrate);

  // price
  auto* price = app.add_subcommand("price", "Price an instrument under a density");
  std::string price_density;
  cli::Instrument instrument = cli::Instrument::call;
  double price_value = 0.0;
  const std::map<std::string, cli::Instrument> instrument_map{{"call", cli::Instrument::call},
                                                              {"digital", cli::Instrument::digital},
                                                              {"cdf", cli::Instrument::cdf},
                                                              {"quantile", cli::Instrument::quantile}};
  price->add_option("density", price_density, "Density JSON")->required()->check(CLI::ExistingFile);
  price->add_option("--instrument", instrument, "call, digital, cdf or quantile")
      ->required()
      ->transform(CLI::CheckedTransformer(instrument_map, CLI::ignore_case));
  price->add_option("--value", price_value, "Strike, cdf argument or quantile level")->required();

  // synth-bs
  auto* synth = app.add_subcommand("synth-bs", "Write Black-Scholes quotes as a quote file");
  cli::SynthOptions synth_opts;
  std::string synth_output;
  synth->add_option("--forward", synth_opts.market.forward, "Forward price")->required();
  synth->add_option("--rate", synth_opts.market.rate, "Continuously compounded rate");
  synth->add_option("--sigma", synth_opts.market.sigma, "Volatility")->required()->check(CLI::PositiveNumber);
  synth->add_option("--maturity", synth_opts.market.maturity, "Maturity in years")
      ->required()
      ->check(CLI::PositiveNumber);
  synth->add_option("--strikes", synth_opts.strikes, "Comma-separated strikes")->required()->delimiter(',');
  synth->add_option("--output,-o", synth_output, "Destination (default: stdout)");

  // study
  auto* study = app.add_subcommand("study", "Compare BK, centered-call-spread and BS-digital densities");
  std::string study_input, study_output;
  std::vector<std::string> subset_specs;
  std::vector<std::string> method_names{"BK", "CCS"};
  std::string endpoints = "bk";
  std::optional<double> sigma, maturity;
  SolverFlags study_solver;
  study->add_option("quotes", study_input, "Quote file (CSV)")->required()->check(CLI::ExistingFile);
  study->add_option("--subset", subset_specs, "0-based strike indices, e.g. 0,8,16 (repeatable)");
  study->add_option("--methods", method_names, "Any of BK,CCS,BS")->delimiter(',');
  study->add_option("--sigma", sigma, "Volatility for BS digitals");
  study->add_option("--maturity", maturity, "Maturity in years for BS digitals");
  study->add_option("--endpoints", endpoints, "CCS end-point digitals: midpoint or bk")
      ->check(CLI::IsMember({"midpoint", "bk"}));
  study->add_option("--output,-o", study_output, "Destination (default: stdout)");
  study_solver.attach(study);

  // plot-data
  auto* plot = app.add_subcommand("plot-data", "Sample a density on a grid");
  std::string plot_density, plot_output;
  cli::PlotOptions plot_opts;
  plot->add_option("density", plot_density, "Density JSON")->required()->check(CLI::ExistingFile);
  plot->add_option("--from", plot_opts.from, "Left end of the grid");
  plot->add_option("--to", plot_opts.to, "Right end of the grid")->required();
  plot->add_option("--samples", plot_opts.samples, "Number of grid points");
  plot->add_option("--output,-o", plot_output, "Destination (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::exit_ok : cli::exit_usage;
  }

  try {
    if (*calibrate) {
      const io::QuoteFile quotes = io::parse_quote_file(read_file(cal_input));
      cli::CalibrateOptions opts{cal_mode, cal_solver.config()};
      const cli::CalibrateResult result = cli::calibrate(quotes, opts);
      if (!cal_output.empty()) emit(cal_output, io::density_to_json(result.calibration.density));
      emit(cal_report, result.report.dump(2) + "\n");
      if (result.exit_code == cli::exit_solver) {
        std::cerr << "solver did not converge: " << result.report["termination"].get<std::string>() << '\n';
      }
      return result.exit_code;
    }
    if (*price) {
      const PiecewiseExpDensity d = io::density_from_json(read_file(price_density));
      std::cout << io::format_double(cli::price(d, instrument, price_value)) << '\n';
      return cli::exit_ok;
    }
    if (*synth) {
      std::ostringstream out;
      io::write_quote_file(out, cli::synth_bs(synth_opts));
      emit(synth_output, out.str());
      return cli::exit_ok;
    }
    if (*study) {
      const io::QuoteFile quotes = io::parse_quote_file(read_file(study_input));
      cli::StudyOptions opts;
      for (const auto& spec : subset_specs) opts.subsets.push_back(parse_indices(spec));
      opts.methods.clear();
      for (const auto& name : method_names) {
        if (name == "BK") {
          opts.methods.insert(cli::StudyMethod::BK);
        } else if (name == "CCS") {
          opts.methods.insert(cli::StudyMethod::CCS);
        } else if (name == "BS") {
          opts.methods.insert(cli::StudyMethod::BS);
        } else {
          std::cerr << "unknown method '" << name << "'\n";
          return cli::exit_usage;
        }
      }
      opts.sigma = sigma;
      opts.maturity = maturity;
      opts.ccs_endpoints = endpoints == "midpoint" ? EndpointRule::rectangle_midpoint : EndpointRule::supplied;
      opts.solver = study_solver.config();
      std::ostringstream out;
      cli::write_study_csv(out, quotes, cli::study(quotes, opts));
      emit(study_output, out.str());
      return cli::exit_ok;
    }
    if (*plot) {
      const PiecewiseExpDensity d = io::density_from_json(read_file(plot_density));
      std::ostringstream out;
      cli::write_plot_data(out, d, plot_opts);
      emit(plot_output, out.str());
      return cli::exit_ok;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_usage;
  }
  return cli::exit_usage;
}
