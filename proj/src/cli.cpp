#include "spectool/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "spectool/bootstrap.hpp"
#include "spectool/errors.hpp"
#include "spectool/estimation.hpp"
#include "spectool/io.hpp"
#include "spectool/mr.hpp"
#include "spectool/regression.hpp"
#include "spectool/render.hpp"
#include "spectool/simulation.hpp"
#include "spectool/specificity.hpp"

namespace spectool::cli {
namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string input;
  std::string out = ".";
  std::optional<Index> kstar;
  std::optional<Index> pstar;
  std::string bounds_table;
  std::optional<double> tau;
  std::vector<double> eta{0.0};
  std::size_t bootstrap_b = 0;
  double reject_fraction = 0.95;
  std::uint64_t seed = 1;
  std::string format = "text";
  bool raw_scale = false;
};

std::string eta_label(double eta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "eta%g", eta);
  return buf;
}

std::string extension(render::Format f) { return f == render::Format::Svg ? ".svg" : ".txt"; }

void check_eta_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw InputError("--eta: grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] < 1.0)) throw InputError("--eta: values must lie in [0, 1)");
    if (i > 0 && grid[i] <= grid[i - 1]) throw InputError("--eta: values must be strictly ascending");
  }
}

Index find_name(const std::vector<std::string>& names, const std::string& name, const std::string& what,
                const std::string& where) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InputError(where + ": unknown " + what + " '" + name + "'");
  return static_cast<Index>(it - names.begin());
}

// CSV with header treatment,outcome,kstar,pstar. Unlisted pairs fall back to
// the global bounds, or the conservative ones.
std::vector<SpecificityBounds> read_bounds_table(const fs::path& path, const std::vector<std::string>& treatments,
                                                 const std::vector<std::string>& outcomes,
                                                 std::optional<SpecificityBounds> fallback) {
  const auto k = static_cast<Index>(treatments.size());
  const auto p = static_cast<Index>(outcomes.size());
  const SpecificityBounds base = fallback.value_or(SpecificityBounds{k - 2, p - 2});
  std::vector<SpecificityBounds> table(static_cast<std::size_t>(k * p), base);

  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      cells.push_back(cell);
    }
    if (header) {
      if (cells != std::vector<std::string>{"treatment", "outcome", "kstar", "pstar"}) {
        throw InputError(where + ": expected header treatment,outcome,kstar,pstar");
      }
      header = false;
      continue;
    }
    if (cells.size() != 4) throw InputError(where + ": expected 4 cells");
    const Index i = find_name(treatments, cells[0], "treatment", where);
    const Index j = find_name(outcomes, cells[1], "outcome", where);
    SpecificityBounds b;
    try {
      b.kstar = static_cast<Index>(std::stol(cells[2]));
      b.pstar = static_cast<Index>(std::stol(cells[3]));
    } catch (const std::exception&) {
      throw InputError(where + ": kstar/pstar must be integers");
    }
    critical_value(k, p, b.kstar, b.pstar);  // validates
    table[static_cast<std::size_t>(i * p + j)] = b;
  }
  if (header) throw InputError(path.string() + ": empty bounds table");
  return table;
}

ScoringConfig scoring_config(const CommonOptions& o, const std::vector<std::string>& treatments,
                             const std::vector<std::string>& outcomes) {
  ScoringConfig cfg;
  if (o.kstar.has_value() != o.pstar.has_value()) throw InputError("--kstar and --pstar must be given together");
  if (o.kstar) {
    cfg.bounds = SpecificityBounds{*o.kstar, *o.pstar};
    critical_value(static_cast<Index>(treatments.size()), static_cast<Index>(outcomes.size()), *o.kstar, *o.pstar);
  }
  if (!o.bounds_table.empty()) cfg.per_pair_bounds = read_bounds_table(o.bounds_table, treatments, outcomes, cfg.bounds);
  if (o.tau && !(*o.tau >= 0.0 && *o.tau < 1.0)) throw InputError("--tau must lie in [0, 1)");
  cfg.tau_override = o.tau;
  return cfg;
}

BootstrapOptions bootstrap_options(const CommonOptions& o) {
  BootstrapOptions b;
  b.replicates = o.bootstrap_b;
  b.reject_fraction = o.reject_fraction;
  b.seed = o.seed;
  validate_bootstrap_options(b);
  return b;
}

class Writer {
 public:
  Writer(fs::path dir, render::Format format) : dir_(std::move(dir)), format_(format) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void json(const std::string& name, const nlohmann::json& j) { file(name, j.dump(2) + "\n"); }

  void heatmap(const std::string& stem, render::Heatmap map) { file(stem + extension(format_), render::render(map, format_)); }

  void file(const std::string& name, const std::string& content) {
    io::write_file_atomic(dir_ / name, content);
    written_.push_back(name);
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path dir_;
  render::Format format_;
  std::vector<std::string> written_;
};

render::Heatmap heatmap(std::string title, Matrix values, const std::vector<std::string>& rows,
                        const std::vector<std::string>& cols) {
  return render::Heatmap{std::move(title), std::move(values), rows, cols};
}

// gamma.json plus reports and heatmaps for every eta in the grid.
void write_specificity(Writer& w, const GammaMatrix& gamma, ScoringConfig cfg, const std::vector<double>& grid,
                       const std::vector<std::string>& treatments, const std::vector<std::string>& outcomes,
                       std::ostream& out) {
  w.json("gamma.json", io::to_json(gamma, treatments, outcomes));
  for (double eta : grid) {
    cfg.eta = eta;
    const ReportGrid reports = score_all_pairs(gamma, cfg);
    const std::string label = eta_label(eta);
    nlohmann::json j = io::to_json(reports);
    j["eta"] = eta;
    j["treatments"] = treatments;
    j["outcomes"] = outcomes;
    w.json("report_" + label + ".json", j);
    w.heatmap("scores_" + label, heatmap("specificity scores, " + label, reports.scores(), treatments, outcomes));
    w.heatmap("tests_" + label, heatmap("specificity tests, " + label, reports.decisions(), treatments, outcomes));
    const Matrix d = reports.decisions();
    out << label << ": " << static_cast<long>(d.sum()) << " of " << d.size() << " pairs rejected\n";
  }
}

int analyze(const CommonOptions& o, std::ostream& out) {
  const Dataset raw = io::read_dataset_csv(o.input);
  require_analysis_shape(raw);
  check_eta_grid(o.eta);
  const render::Format format = render::parse_format(o.format);
  const ScoringConfig cfg = scoring_config(o, raw.treatment_names, raw.outcome_names);
  std::optional<BootstrapOptions> boot;
  if (o.bootstrap_b > 0) boot = bootstrap_options(o);

  const Dataset data = o.raw_scale ? center(raw) : standardize(raw);
  const GammaMatrix gamma = fit_gamma(data);

  Writer w(o.out, format);
  write_specificity(w, gamma, cfg, o.eta, data.treatment_names, data.outcome_names, out);

  SpcEstimate est = spc_estimate(gamma);
  if (boot) {
    est.standard_errors = bootstrap_stderr(data, *boot);
    for (double eta : o.eta) {
      ScoringConfig c = cfg;
      c.eta = eta;
      const BootstrapGrid bg = bootstrap_grid(data, c, *boot);
      nlohmann::json j = io::to_json(bg);
      j["eta"] = eta;
      j["replicates"] = boot->replicates;
      j["reject_fraction"] = boot->reject_fraction;
      j["seed"] = boot->seed;
      w.json("bspc_" + eta_label(eta) + ".json", j);
      w.heatmap("bspc_tests_" + eta_label(eta),
                heatmap("bootstrap specificity tests, " + eta_label(eta), bg.decisions, data.treatment_names,
                        data.outcome_names));
    }
  }
  nlohmann::json ej = io::to_json(est);
  ej["scale"] = o.raw_scale ? "centered" : "standardized";
  w.json("spc_estimate.json", ej);
  out << "wrote " << w.written().size() << " files to " << o.out << "\n";
  return kExitOk;
}

struct SimulateOptions {
  std::string scenario = "I";
  std::size_t n = 5000;
  std::size_t reps = 200;
  double perturbation = 0.15;
  bool alternating = false;
  bool dump_data = false;
  bool skip_bias = false;
};

int simulate(const CommonOptions& o, const SimulateOptions& s, std::ostream& out) {
  const ScenarioKind kind = parse_scenario(s.scenario);
  const ScenarioConfig config =
      scenario_config(kind, s.perturbation, s.alternating ? PerturbationSigns::Alternating : PerturbationSigns::Same);
  const render::Format format = render::parse_format(o.format);
  check_eta_grid(o.eta);
  Writer w(o.out, format);

  if (s.dump_data) {
    w.file("data.csv", io::format_dataset_csv(generate(config, s.n, o.seed)));
    out << "wrote data.csv (" << s.n << " rows) to " << o.out << "\n";
    return kExitOk;
  }

  PowerOptions po;
  if (o.tau) po.tau = *o.tau;
  if (!(po.tau >= 0.0 && po.tau < 1.0)) throw InputError("--tau must lie in [0, 1)");
  po.eta_grid = o.eta;
  po.raw_scale = o.raw_scale;
  std::vector<TestMethod> methods{TestMethod::SpcTest, TestMethod::PvalueOls};
  if (o.bootstrap_b > 0) {
    po.bspc = bootstrap_options(o);
    methods.push_back(TestMethod::Bspc);
  }
  const ExperimentResult power = power_experiment(config, s.n, s.reps, methods, po, o.seed);
  w.json("power.json", io::to_json(power));
  std::vector<std::string> rows, cols;
  for (Index i = 0; i < config.num_treatments(); ++i) rows.push_back("X" + std::to_string(i + 1));
  for (Index j = 0; j < config.num_outcomes(); ++j) cols.push_back("Y" + std::to_string(j + 1));
  for (const auto& [method, mats] : power.rejection) {
    for (std::size_t e = 0; e < mats.size(); ++e) {
      const std::string label = method == "pvalue_ols" ? method : method + "_" + eta_label(power.eta_grid[e]);
      w.heatmap("power_" + label, heatmap("rejection frequency, " + label, mats[e], rows, cols));
    }
  }
  out << "power: " << power.reps << " replicates, " << power.failures << " failed\n";

  if (!s.skip_bias) {
    const std::vector<Estimator> estimators{Estimator::Ols, Estimator::Spc, Estimator::NcOracle};
    const ExperimentResult bias = bias_experiment(config, s.n, s.reps, estimators, o.seed);
    w.json("bias.json", io::to_json(bias));
    for (const auto& [name, m] : bias.bias) {
      w.heatmap("bias_" + name, heatmap("absolute mean bias, " + name, m.cwiseAbs(), rows, cols));
    }
    out << "bias: " << bias.reps << " replicates, " << bias.failures << " failed\n";
  }
  out << "wrote " << w.written().size() << " files to " << o.out << "\n";
  return kExitOk;
}

int mr(const CommonOptions& o, const std::string& exposure_input, std::optional<std::size_t> n, std::ostream& out) {
  if (exposure_input.empty()) throw InputError("mr needs --exposure-input");
  const MrSummary summary = io::read_mr_summary(o.input, exposure_input);
  if (summary.exposure_names.size() < 3 || summary.outcome_names.size() < 3) {
    throw InputError("mr needs at least 3 exposures and 3 outcomes");
  }
  check_eta_grid(o.eta);
  const render::Format format = render::parse_format(o.format);
  ScoringConfig cfg = scoring_config(o, summary.exposure_names, summary.outcome_names);
  if (n) {
    cfg.effective_n = *n;
  } else {
    cfg.population = true;
  }
  const GammaMatrix gamma = mr_reduce(summary);
  Writer w(o.out, format);
  write_specificity(w, gamma, cfg, o.eta, summary.exposure_names, summary.outcome_names, out);
  SpcOptions spc;
  if (n) spc.selection_threshold = std::log(static_cast<double>(*n)) / static_cast<double>(*n);
  w.json("spc_estimate.json", io::to_json(spc_estimate(gamma, spc)));
  out << "wrote " << w.written().size() << " files to " << o.out << "\n";
  return kExitOk;
}

int render_cmd(const CommonOptions& o, const std::string& field, std::ostream& out) {
  std::ifstream in(o.input);
  if (!in) throw InputError("cannot open '" + o.input + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(o.input + ": " + e.what());
  }
  render::Heatmap map;
  if (j.is_array()) {
    map.values = io::matrix_from_json(j);
  } else {
    if (!j.contains(field)) throw InputError(o.input + ": no field '" + field + "'");
    map.values = io::matrix_from_json(j.at(field));
    if (j.contains("treatments")) map.row_labels = j.at("treatments").get<std::vector<std::string>>();
    if (j.contains("outcomes")) map.column_labels = j.at("outcomes").get<std::vector<std::string>>();
  }
  map.title = fs::path(o.input).filename().string() + ": " + field;
  const std::string text = render::render(map, render::parse_format(o.format));
  if (o.out.empty() || o.out == "-") {
    out << text;
  } else {
    io::write_file_atomic(o.out, text);
  }
  return kExitOk;
}

void add_scoring_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--kstar", o.kstar, "Bound K* on treatments affecting one outcome");
  cmd->add_option("--pstar", o.pstar, "Bound P* on outcomes affected by one treatment");
  cmd->add_option("--bounds-table", o.bounds_table, "Per-pair CSV: treatment,outcome,kstar,pstar");
  cmd->add_option("--tau", o.tau, "Critical value override");
  cmd->add_option("--eta", o.eta, "Sensitivity parameter (repeatable, ascending)")->expected(1)->take_all();
  cmd->add_option("--format", o.format, "Heatmap format: text or svg");
  cmd->add_option("--out", o.out, "Output directory");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Specificity tests and SPC estimation for multi-treatment, multi-outcome data", "spectool"};
  app.require_subcommand(1);
  CommonOptions o;

  auto* an = app.add_subcommand("analyze", "Score, test and estimate from an X:/Y: CSV");
  an->add_option("--input", o.input, "Input CSV")->required();
  add_scoring_flags(an, o);
  an->add_option("--bootstrap-b", o.bootstrap_b, "Bootstrap replicates (0 disables)");
  an->add_option("--reject-fraction", o.reject_fraction, "BSPC reject fraction");
  an->add_option("--seed", o.seed, "Bootstrap seed");
  an->add_flag("--raw-scale", o.raw_scale, "Centre without rescaling");

  SimulateOptions s;
  auto* sim = app.add_subcommand("simulate", "Power and bias experiments on the built-in scenarios");
  sim->add_option("--scenario", s.scenario, "I, II or sensitivity");
  sim->add_option("--n", s.n, "Sample size per replicate");
  sim->add_option("--reps", s.reps, "Replicates");
  sim->add_option("--seed", o.seed, "Master seed");
  sim->add_option("--perturbation", s.perturbation, "Sensitivity scenario perturbation size");
  sim->add_flag("--alternating-signs", s.alternating, "Alternate perturbation signs");
  sim->add_flag("--dump-data", s.dump_data, "Write one generated dataset as data.csv and stop");
  sim->add_flag("--skip-bias", s.skip_bias, "Run the power experiment only");
  sim->add_option("--bootstrap-b", o.bootstrap_b, "Also run BSPC with this many replicates");
  sim->add_option("--reject-fraction", o.reject_fraction, "BSPC reject fraction");
  sim->add_option("--tau", o.tau, "Critical value (default 19/28)");
  sim->add_option("--eta", o.eta, "Sensitivity grid (repeatable, ascending)")->expected(1)->take_all();
  sim->add_flag("--raw-scale", o.raw_scale, "Test on centred, unscaled data");
  sim->add_option("--format", o.format, "Heatmap format: text or svg");
  sim->add_option("--out", o.out, "Output directory");

  std::string exposure_input;
  std::optional<std::size_t> mr_n;
  auto* mrc = app.add_subcommand("mr", "Two-sample summary statistics: reduce, then analyze");
  mrc->add_option("--input", o.input, "Instrument-outcome table")->required();
  mrc->add_option("--exposure-input", exposure_input, "Instrument-exposure table")->required();
  mrc->add_option("--n", mr_n, "Effective sample size (default: population mode)");
  add_scoring_flags(mrc, o);

  std::string field = "scores";
  auto* rc = app.add_subcommand("render", "Render a matrix from a JSON output as a heatmap");
  rc->add_option("--input", o.input, "JSON file")->required();
  rc->add_option("--field", field, "Key holding the matrix");
  rc->add_option("--format", o.format, "text or svg");
  rc->add_option("--out", o.out, "Output file ('-' for stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (an->parsed()) return analyze(o, out);
    if (sim->parsed()) return simulate(o, s, out);
    if (mrc->parsed()) return mr(o, exposure_input, mr_n, out);
    if (rc->parsed()) {
      if (o.out == ".") o.out = "-";
      return render_cmd(o, field, out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}

}  // namespace spectool::cli
