#include <catch_amalgamated.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spectool/cli.hpp"
#include "spectool/io.hpp"
#include "spectool/regression.hpp"
#include "spectool/simulation.hpp"
#include "spectool/specificity.hpp"

using namespace spectool;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "spectool_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

void write_dataset(const fs::path& p, const Dataset& d) { std::ofstream(p) << io::format_dataset_csv(d); }

// Rows of a text heatmap between the bars.
std::vector<std::string> heatmap_cells(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // title
  std::getline(in, line);  // column header
  while (std::getline(in, line)) {
    const auto a = line.find('|');
    const auto b = line.rfind('|');
    if (a == std::string::npos || a == b) continue;
    rows.push_back(line.substr(a + 1, b - a - 1));
  }
  return rows;
}

}  // namespace

TEST_CASE("cli: pure confounding gives an all-white test heatmap") {
  const fs::path dir = scratch("null");
  ScenarioConfig cfg = scenario_config(ScenarioKind::I);
  cfg.beta.setZero();
  write_dataset(dir / "data.csv", generate(cfg, 3000, 1));
  const Run r = run({"analyze", "--input", (dir / "data.csv").string(), "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  for (const auto& row : heatmap_cells(slurp(dir / "out" / "tests_eta0.txt"))) {
    CHECK(row == std::string(8, ' '));
  }
  CHECK(fs::exists(dir / "out" / "gamma.json"));
  CHECK(fs::exists(dir / "out" / "report_eta0.json"));
  CHECK(fs::exists(dir / "out" / "scores_eta0.txt"));
  CHECK(fs::exists(dir / "out" / "spc_estimate.json"));
}

TEST_CASE("cli: Scenario I dump marks exactly the planted effects") {
  // The scenario's bounds; without them the conservative tau (27/28) sits
  // above the population score 25/28 of effects that share a treatment row.
  const ScenarioConfig cfg = scenario_config(ScenarioKind::I);
  int exact = 0;
  const int runs = 10;
  for (int s = 0; s < runs; ++s) {
    const fs::path dir = scratch("scenario1_" + std::to_string(s));
    REQUIRE(run({"simulate", "--scenario", "I", "--n", "5000", "--seed", std::to_string(100 + s), "--dump-data",
                 "--out", dir.string()})
                .code == 0);
    REQUIRE(run({"analyze", "--input", (dir / "data.csv").string(), "--out", (dir / "out").string(), "--kstar", "1",
                 "--pstar", "4"})
                .code == 0);
    const Matrix d = io::matrix_from_json(read_json(dir / "out" / "report_eta0.json").at("decisions"));
    exact += d == (cfg.beta.array() != 0.0).cast<double>().matrix() ? 1 : 0;
  }
  CHECK(exact >= 9);
}

TEST_CASE("cli: analyze on a dumped CSV equals the in-process pipeline bit for bit") {
  const fs::path dir = scratch("roundtrip");
  REQUIRE(run({"simulate", "--scenario", "II", "--n", "800", "--seed", "5", "--dump-data", "--out", dir.string()}).code == 0);
  REQUIRE(run({"analyze", "--input", (dir / "data.csv").string(), "--out", (dir / "out").string(), "--kstar", "1",
               "--pstar", "4", "--eta", "0", "--eta", "0.2"})
              .code == 0);
  const GammaMatrix g = fit_gamma(standardize(generate(scenario_config(ScenarioKind::II), 800, 5)));
  const Matrix from_file = io::matrix_from_json(read_json(dir / "out" / "gamma.json").at("values"));
  CHECK(from_file == g.values);
  ScoringConfig sc;
  sc.bounds = SpecificityBounds{1, 4};
  sc.eta = 0.2;
  const Matrix scores = io::matrix_from_json(read_json(dir / "out" / "report_eta0.2.json").at("scores"));
  CHECK(scores == score_all_pairs(g, sc).scores());
}

TEST_CASE("cli: bootstrap outputs and standard errors") {
  const fs::path dir = scratch("boot");
  write_dataset(dir / "data.csv", generate(scenario_config(ScenarioKind::I), 1500, 2));
  const std::vector<std::string> args{"analyze", "--input", (dir / "data.csv").string(), "--out", (dir / "out").string(),
                                      "--bootstrap-b", "100", "--reject-fraction", "0.9", "--seed", "4", "--format", "svg"};
  REQUIRE(run(args).code == 0);
  const nlohmann::json est = read_json(dir / "out" / "spc_estimate.json");
  CHECK(est.contains("standard_errors"));
  const nlohmann::json bspc = read_json(dir / "out" / "bspc_eta0.json");
  CHECK(bspc.at("kept") == 100);
  CHECK(bspc.at("reject_fraction") == 0.9);
  CHECK(slurp(dir / "out" / "tests_eta0.svg").find("<svg") == 0);
  const std::string first = slurp(dir / "out" / "bspc_eta0.json");
  REQUIRE(run(args).code == 0);
  CHECK(slurp(dir / "out" / "bspc_eta0.json") == first);
}

TEST_CASE("cli: input errors exit 2 with a useful message") {
  const fs::path dir = scratch("errors");
  std::ofstream(dir / "bad.csv") << "X:a,X:b,X:c,Y:p,Y:q,Y:r\n1,2,3,4,5,6\n1,2,3,4,5\n";
  Run r = run({"analyze", "--input", (dir / "bad.csv").string(), "--out", (dir / "out").string()});
  CHECK(r.code == cli::kExitInput);
  CHECK(r.err.find("Y:r") != std::string::npos);
  CHECK(r.err.find(":3") != std::string::npos);

  r = run({"analyze", "--input", (dir / "missing.csv").string()});
  CHECK(r.code == cli::kExitInput);
  r = run({"analyze"});
  CHECK(r.code == cli::kExitInput);
  r = run({"frobnicate"});
  CHECK(r.code == cli::kExitInput);

  write_dataset(dir / "ok.csv", generate(scenario_config(ScenarioKind::I), 200, 1));
  for (const auto& extra : std::vector<std::vector<std::string>>{{"--kstar", "1"},
                                                                  {"--kstar", "4", "--pstar", "1"},
                                                                  {"--eta", "0.3", "--eta", "0.1"},
                                                                  {"--eta", "1"},
                                                                  {"--tau", "1.5"},
                                                                  {"--format", "png"},
                                                                  {"--bootstrap-b", "20"}}) {
    std::vector<std::string> args{"analyze", "--input", (dir / "ok.csv").string(), "--out", (dir / "o2").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    CHECK(run(args).code == cli::kExitInput);
  }
  CHECK(run({"simulate", "--scenario", "IV", "--reps", "2", "--out", (dir / "s").string()}).code == cli::kExitInput);
}

TEST_CASE("cli: singular Gram exits 3 naming the columns") {
  const fs::path dir = scratch("singular");
  Dataset d = generate(scenario_config(ScenarioKind::I), 200, 1);
  d.treatments.col(3) = d.treatments.col(0) + d.treatments.col(1);
  d.treatment_names = {"age", "bmi", "dose", "sum", "other"};
  write_dataset(dir / "data.csv", d);
  const Run r = run({"analyze", "--input", (dir / "data.csv").string(), "--out", (dir / "out").string()});
  CHECK(r.code == cli::kExitNumerical);
  CHECK(r.err.find("age") != std::string::npos);
  CHECK(r.err.find("sum") != std::string::npos);
}

TEST_CASE("cli: per-pair bounds table") {
  const fs::path dir = scratch("bounds");
  write_dataset(dir / "data.csv", generate(scenario_config(ScenarioKind::I), 500, 1));
  std::ofstream(dir / "b.csv") << "treatment,outcome,kstar,pstar\nX1,Y1,0,0\n";
  REQUIRE(run({"analyze", "--input", (dir / "data.csv").string(), "--out", (dir / "out").string(), "--bounds-table",
               (dir / "b.csv").string()})
              .code == 0);
  const nlohmann::json rep = read_json(dir / "out" / "report_eta0.json");
  CHECK(rep.at("reports")[0].at("tau") == 0.0);
  CHECK(rep.at("reports")[1].at("tau") == conservative_critical_value(5, 8));
  std::ofstream(dir / "bad.csv") << "treatment,outcome,kstar,pstar\nX9,Y1,0,0\n";
  const Run r = run({"analyze", "--input", (dir / "data.csv").string(), "--out", (dir / "out").string(),
                     "--bounds-table", (dir / "bad.csv").string()});
  CHECK(r.code == cli::kExitInput);
  CHECK(r.err.find("X9") != std::string::npos);
}

TEST_CASE("cli: simulate smoke run is quick and deterministic") {
  const fs::path dir = scratch("simulate");
  const auto start = std::chrono::steady_clock::now();
  REQUIRE(run({"simulate", "--scenario", "I", "--reps", "10", "--seed", "3", "--out", (dir / "a").string()}).code == 0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 30.0);
  REQUIRE(run({"simulate", "--scenario", "I", "--reps", "10", "--seed", "3", "--out", (dir / "b").string()}).code == 0);
  CHECK(slurp(dir / "a" / "power.json") == slurp(dir / "b" / "power.json"));
  CHECK(slurp(dir / "a" / "bias.json") == slurp(dir / "b" / "bias.json"));
  CHECK(fs::exists(dir / "a" / "power_spc_test_eta0.txt"));
  CHECK(fs::exists(dir / "a" / "bias_spc.txt"));
}

TEST_CASE("cli: mr pipeline") {
  const fs::path dir = scratch("mr");
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  Matrix b(4, 5);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 5; ++j) b(i, j) = z(rng);
  auto write_table = [](const fs::path& p, const Matrix& m, const std::string& prefix, char sep) {
    std::ofstream out(p);
    out << "snp";
    for (Index j = 0; j < m.cols(); ++j) out << sep << prefix << j + 1;
    out << '\n';
    char buf[40];
    for (Index i = 0; i < m.rows(); ++i) {
      out << "rs" << i;
      for (Index j = 0; j < m.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
        out << sep << buf;
      }
      out << '\n';
    }
  };

  // Identity exposure map: same as scoring Gamma-tilde directly.
  write_table(dir / "zy.tsv", b, "Y", '\t');
  write_table(dir / "zx_id.tsv", Matrix::Identity(4, 4), "X", '\t');
  REQUIRE(run({"mr", "--input", (dir / "zy.tsv").string(), "--exposure-input", (dir / "zx_id.tsv").string(), "--out",
               (dir / "id").string()})
              .code == 0);
  GammaMatrix direct;
  direct.values = b;
  ScoringConfig sc;
  sc.population = true;
  CHECK(io::matrix_from_json(read_json(dir / "id" / "report_eta0.json").at("scores")) == score_all_pairs(direct, sc).scores());

  // Gamma-tilde = delta-tilde B recovers B's specificity map.
  Matrix dzx(9, 4);
  for (Index i = 0; i < 9; ++i)
    for (Index j = 0; j < 4; ++j) dzx(i, j) = z(rng);
  write_table(dir / "zy9.csv", dzx * b, "Y", ',');
  write_table(dir / "zx9.csv", dzx, "X", ',');
  REQUIRE(run({"mr", "--input", (dir / "zy9.csv").string(), "--exposure-input", (dir / "zx9.csv").string(), "--out",
               (dir / "b").string()})
              .code == 0);
  CHECK(io::matrix_from_json(read_json(dir / "b" / "report_eta0.json").at("decisions")) ==
        score_all_pairs(direct, sc).decisions());

  Matrix dup = dzx;
  dup.col(2) = dup.col(0);
  write_table(dir / "zx_dup.csv", dup, "X", ',');
  CHECK(run({"mr", "--input", (dir / "zy9.csv").string(), "--exposure-input", (dir / "zx_dup.csv").string(), "--out",
             (dir / "dup").string()})
            .code == cli::kExitNumerical);

  std::ofstream(dir / "zx_names.csv") << "snp,X1,X2,X3,X4\nrs1,1,0,0,0\nrs0,0,1,0,0\nrs2,0,0,1,0\nrs3,0,0,0,1\n";
  const Run r = run({"mr", "--input", (dir / "zy.tsv").string(), "--exposure-input", (dir / "zx_names.csv").string(),
                     "--out", (dir / "names").string()});
  CHECK(r.code == cli::kExitInput);
}

TEST_CASE("cli: render a report field") {
  const fs::path dir = scratch("render");
  write_dataset(dir / "data.csv", generate(scenario_config(ScenarioKind::I), 500, 1));
  REQUIRE(run({"analyze", "--input", (dir / "data.csv").string(), "--out", (dir / "out").string()}).code == 0);
  const Run r = run({"render", "--input", (dir / "out" / "report_eta0.json").string(), "--field", "decisions"});
  CHECK(r.code == 0);
  CHECK(r.out.find("X5 |") != std::string::npos);
  const Run s = run({"render", "--input", (dir / "out" / "report_eta0.json").string(), "--format", "svg", "--out",
                     (dir / "scores.svg").string()});
  CHECK(s.code == 0);
  CHECK(slurp(dir / "scores.svg").find("<rect") != std::string::npos);
  CHECK(run({"render", "--input", (dir / "out" / "report_eta0.json").string(), "--field", "nope"}).code ==
        cli::kExitInput);
}
