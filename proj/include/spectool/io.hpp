#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include <nlohmann/json.hpp>

#include "spectool/bootstrap.hpp"
#include "spectool/estimation.hpp"
#include "spectool/mr.hpp"
#include "spectool/regression.hpp"
#include "spectool/simulation.hpp"
#include "spectool/specificity.hpp"

namespace spectool::io {

/// CSV with one header row; treatment columns are named "X:<name>", outcome
/// columns "Y:<name>". Other columns are rejected. Errors carry line numbers.
Dataset parse_dataset_csv(std::istream& in, const std::string& source = "<input>");
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Inverse of parse_dataset_csv; values printed with 17 significant digits.
std::string format_dataset_csv(const Dataset& data);

/// Delimiter-separated table: header row of column names, first column holds
/// the row (instrument) names. Comma or tab, detected from the header.
struct NamedTable {
  std::vector<std::string> row_names;
  std::vector<std::string> column_names;
  Matrix values;
};
NamedTable read_named_table(const std::filesystem::path& path);
NamedTable parse_named_table(std::istream& in, const std::string& source);

/// Instrument-outcome and instrument-exposure tables; instrument names must
/// agree row by row.
MrSummary read_mr_summary(const std::filesystem::path& instrument_outcome,
                          const std::filesystem::path& instrument_exposure);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GammaMatrix& g, const std::vector<std::string>& treatment_names,
                       const std::vector<std::string>& outcome_names);
nlohmann::json to_json(const SpecificityReport& r);
nlohmann::json to_json(const ReportGrid& grid);
nlohmann::json to_json(const BootstrapGrid& grid);
nlohmann::json to_json(const SpcEstimate& est);
nlohmann::json to_json(const ExperimentResult& res);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace spectool::io
