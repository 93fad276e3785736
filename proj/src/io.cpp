#include "spectool/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "spectool/errors.hpp"

namespace spectool::io {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw InputError(msg.str());
}

double parse_number(const std::string& cell, const std::string& source, std::size_t line,
                    const std::string& column) {
  if (cell.empty()) fail(source, line, "missing value for column '" + column + "'");
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail(source, line, "column '" + column + "': '" + cell + "' is not a finite number");
  }
  return v;
}

nlohmann::json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

bool blank(const std::string& line) { return trim(line).empty(); }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

Dataset parse_dataset_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!blank(line)) break;
  }
  if (blank(line)) fail(source, line_no, "empty input");
  const std::size_t header_line = line_no;
  const std::vector<std::string> header = split(line, ',');

  std::vector<std::size_t> xcols, ycols;
  std::vector<std::string> xnames, ynames;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h.rfind("X:", 0) == 0 && h.size() > 2) {
      xcols.push_back(c);
      xnames.push_back(h.substr(2));
    } else if (h.rfind("Y:", 0) == 0 && h.size() > 2) {
      ycols.push_back(c);
      ynames.push_back(h.substr(2));
    } else {
      fail(source, header_line, "column '" + h + "' must be prefixed with X: or Y:");
    }
  }
  if (xcols.size() < 3) fail(source, header_line, "need at least 3 treatment columns (X:...)");
  if (ycols.size() < 3) fail(source, header_line, "need at least 3 outcome columns (Y:...)");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() > header.size()) fail(source, line_no, "more cells than header columns");
    std::vector<double> row(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c >= cells.size()) fail(source, line_no, "missing value for column '" + header[c] + "'");
      row[c] = parse_number(cells[c], source, line_no, header[c]);
    }
    rows.push_back(std::move(row));
  }

  const auto n = static_cast<Index>(rows.size());
  Matrix x(n, static_cast<Index>(xcols.size()));
  Matrix y(n, static_cast<Index>(ycols.size()));
  for (Index r = 0; r < n; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < xcols.size(); ++c) x(r, static_cast<Index>(c)) = row[xcols[c]];
    for (std::size_t c = 0; c < ycols.size(); ++c) y(r, static_cast<Index>(c)) = row[ycols[c]];
  }
  try {
    return Dataset::make(std::move(x), std::move(y), std::move(xnames), std::move(ynames));
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_dataset_csv(in, path.string());
}

std::string format_dataset_csv(const Dataset& data) {
  std::string out;
  bool first = true;
  for (const auto& n : data.treatment_names) {
    out += (first ? "" : ",") + std::string("X:") + n;
    first = false;
  }
  for (const auto& n : data.outcome_names) out += ",Y:" + n;
  out += '\n';
  char buf[40];
  for (Index r = 0; r < data.rows(); ++r) {
    for (Index c = 0; c < data.num_treatments(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", data.treatments(r, c));
      out += (c ? "," : "");
      out += buf;
    }
    for (Index c = 0; c < data.num_outcomes(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", data.outcomes(r, c));
      out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

NamedTable parse_named_table(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!blank(line)) break;
  }
  if (blank(line)) fail(source, line_no, "empty input");
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  std::vector<std::string> header = split(line, delim);
  if (header.size() < 2) fail(source, line_no, "need a name column and at least one value column");

  NamedTable t;
  t.column_names.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::vector<std::string> cells = split(line, delim);
    if (cells.size() > header.size()) fail(source, line_no, "more cells than header columns");
    if (cells.empty() || cells[0].empty()) fail(source, line_no, "missing row name");
    t.row_names.push_back(cells[0]);
    std::vector<double> row;
    for (std::size_t c = 1; c < header.size(); ++c) {
      if (c >= cells.size()) fail(source, line_no, "missing value for column '" + header[c] + "'");
      row.push_back(parse_number(cells[c], source, line_no, header[c]));
    }
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.column_names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      t.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return t;
}

NamedTable read_named_table(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_named_table(in, path.string());
}

MrSummary read_mr_summary(const std::filesystem::path& instrument_outcome,
                          const std::filesystem::path& instrument_exposure) {
  NamedTable zy = read_named_table(instrument_outcome);
  NamedTable zx = read_named_table(instrument_exposure);
  if (zy.row_names.size() != zx.row_names.size()) {
    throw InputError("instrument tables have different row counts (" + std::to_string(zy.row_names.size()) +
                     " vs " + std::to_string(zx.row_names.size()) + ")");
  }
  for (std::size_t r = 0; r < zy.row_names.size(); ++r) {
    if (zy.row_names[r] != zx.row_names[r]) {
      throw InputError("instrument row " + std::to_string(r + 1) + " differs between files: '" +
                       zy.row_names[r] + "' vs '" + zx.row_names[r] + "'");
    }
  }
  return MrSummary::make(std::move(zy.values), std::move(zx.values), std::move(zy.row_names),
                         std::move(zx.column_names), std::move(zy.column_names));
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (std::isfinite(v)) {
        row.push_back(v);
      } else {
        row.push_back(std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InputError("expected a matrix (array of rows)");
  const auto rows = static_cast<Index>(j.size());
  const Index cols = rows ? static_cast<Index>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw InputError("ragged matrix in JSON");
    for (Index c = 0; c < cols; ++c) {
      const auto& v = row.at(static_cast<std::size_t>(c));
      if (v.is_number()) {
        m(i, c) = v.get<double>();
      } else if (v.is_string()) {
        const auto s = v.get<std::string>();
        m(i, c) = s == "inf"    ? std::numeric_limits<double>::infinity()
                  : s == "-inf" ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::quiet_NaN();
      } else {
        throw InputError("non-numeric matrix entry in JSON");
      }
    }
  }
  return m;
}

nlohmann::json to_json(const GammaMatrix& g, const std::vector<std::string>& treatment_names,
                       const std::vector<std::string>& outcome_names) {
  nlohmann::json j;
  j["values"] = matrix_to_json(g.values);
  j["n"] = g.n ? nlohmann::json(*g.n) : nlohmann::json("population");
  j["gram_condition"] = g.gram_condition;
  j["treatments"] = treatment_names;
  j["outcomes"] = outcome_names;
  return j;
}

nlohmann::json to_json(const SpecificityReport& r) {
  return {{"treatment", r.target.treatment},
          {"outcome", r.target.outcome},
          {"q1", r.q1},
          {"q2", r.q2},
          {"score", r.score},
          {"tau", r.tau},
          {"eta", r.eta},
          {"buffer", r.buffer},
          {"reject", r.reject}};
}

nlohmann::json to_json(const ReportGrid& grid) {
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : grid.reports) reports.push_back(to_json(r));
  return {{"scores", matrix_to_json(grid.scores())},
          {"decisions", matrix_to_json(grid.decisions())},
          {"reports", std::move(reports)}};
}

nlohmann::json to_json(const BootstrapGrid& grid) {
  return {{"fraction_above", matrix_to_json(grid.fraction_above)},
          {"decisions", matrix_to_json(grid.decisions)},
          {"tau", matrix_to_json(grid.taus)},
          {"kept", grid.kept},
          {"dropped", grid.dropped}};
}

nlohmann::json to_json(const SpcEstimate& est) {
  nlohmann::json j;
  j["beta"] = matrix_to_json(est.beta);
  j["alpha"] = vector_to_json(est.alpha);
  j["delta"] = vector_to_json(est.delta);
  j["beta_lts"] = matrix_to_json(est.beta_lts);
  j["anchor_outcome"] = est.anchor_outcome;
  j["selection_threshold"] = est.selection_threshold;
  j["null_sets_alpha"] = est.null_sets_alpha;
  j["null_sets_delta"] = est.null_sets_delta;
  j["approximate"] = est.approximate;
  j["warnings"] = est.warnings;
  if (est.standard_errors) j["standard_errors"] = matrix_to_json(*est.standard_errors);
  return j;
}

nlohmann::json to_json(const ExperimentResult& res) {
  nlohmann::json j;
  j["scenario"] = res.scenario;
  j["n"] = res.n;
  j["reps"] = res.reps;
  j["seed"] = res.seed;
  j["replicate_seeds"] = res.replicate_seeds;
  j["tau"] = res.tau;
  j["eta_grid"] = res.eta_grid;
  j["beta"] = matrix_to_json(res.beta);
  j["failures"] = res.failures;
  nlohmann::json rej = nlohmann::json::object();
  for (const auto& [name, mats] : res.rejection) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& m : mats) list.push_back(matrix_to_json(m));
    rej[name] = std::move(list);
  }
  j["rejection"] = std::move(rej);
  nlohmann::json bias = nlohmann::json::object();
  for (const auto& [name, m] : res.bias) bias[name] = matrix_to_json(m);
  j["bias"] = std::move(bias);
  nlohmann::json mae = nlohmann::json::object();
  for (const auto& [name, m] : res.mean_abs_error) mae[name] = matrix_to_json(m);
  j["mean_abs_error"] = std::move(mae);
  return j;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

}  // namespace spectool::io
