#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "spectool/errors.hpp"
#include "spectool/regression.hpp"
#include "spectool/simulation.hpp"

using namespace spectool;
using Catch::Matchers::WithinAbs;

namespace {

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

}  // namespace

TEST_CASE("standardize maps a symmetric three-point column to (-1, 0, 1)") {
  Matrix x(3, 1), y(3, 1);
  x << 1, 2, 3;
  y << 4, 0, 8;
  const Dataset s = standardize(Dataset::make(x, y));
  CHECK_THAT(s.treatments(0, 0), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(s.treatments(1, 0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(s.treatments(2, 0), WithinAbs(1.0, 1e-15));
  CHECK(s.standardized);
  CHECK_THAT(s.treatment_means(0), WithinAbs(2.0, 1e-15));
  CHECK_THAT(s.treatment_scales(0), WithinAbs(1.0, 1e-15));
}

TEST_CASE("standardize: zero mean, unit variance, idempotent") {
  std::mt19937_64 rng(7);
  Matrix x = gaussian(50, 4, rng) * 3.0;
  x.array() += 10.0;
  const Dataset s = standardize(Dataset::make(x, gaussian(50, 3, rng)));
  for (Index j = 0; j < 4; ++j) {
    CHECK(std::abs(s.treatments.col(j).mean()) < 1e-10);
    CHECK_THAT(s.treatments.col(j).squaredNorm() / 49.0, WithinAbs(1.0, 1e-8));
  }
  const Dataset twice = standardize(s);
  CHECK((twice.treatments - s.treatments).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((twice.outcomes - s.outcomes).cwiseAbs().maxCoeff() < 1e-12);
  // Scales compose back to the original units.
  CHECK((twice.treatment_scales - s.treatment_scales).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("standardize rejects a constant column by name") {
  Matrix x(4, 2), y(4, 1);
  x << 1, 5, 2, 5, 3, 5, 4, 5;
  y << 1, 2, 3, 5;
  const Dataset d = Dataset::make(x, y, {"a", "b"}, {"y"});
  try {
    standardize(d);
    FAIL("expected ConstantColumn");
  } catch (const ConstantColumn& e) {
    CHECK(e.column() == "b");
  }
}

TEST_CASE("Dataset::make validates shape and values") {
  CHECK_THROWS_AS(Dataset::make(Matrix::Ones(4, 3), Matrix::Ones(5, 3)), InputError);
  CHECK_THROWS_AS(Dataset::make(Matrix::Ones(4, 3), Matrix::Ones(4, 3)), InputError);  // n < K + 2
  Matrix bad = Matrix::Ones(6, 3);
  bad(2, 1) = std::nan("");
  CHECK_THROWS_AS(Dataset::make(bad, Matrix::Ones(6, 3)), InputError);
  const Dataset d = Dataset::make(Matrix::Ones(6, 2), Matrix::Ones(6, 3));
  CHECK(d.treatment_names == std::vector<std::string>{"X1", "X2"});
  CHECK(d.outcome_names.back() == "Y3");
  CHECK_THROWS_AS(require_analysis_shape(d), InputError);
}

TEST_CASE("fit_gamma recovers a noiseless linear map exactly") {
  std::mt19937_64 rng(11);
  const Matrix x = gaussian(40, 4, rng);
  const Matrix b = gaussian(4, 5, rng);
  const GammaMatrix g = fit_gamma(Dataset::make(x, x * b));
  CHECK((g.values - b).cwiseAbs().maxCoeff() < 1e-10);
  REQUIRE(g.n.has_value());
  CHECK(*g.n == 40);
  CHECK(g.gram_condition >= 1.0);
}

TEST_CASE("fit_gamma single-treatment slope converges at the root-n rate") {
  std::mt19937_64 rng(12);
  const Index n = 10000;
  const Matrix x = gaussian(n, 1, rng);
  const Matrix y = 2.0 * x + gaussian(n, 1, rng);
  const GammaMatrix g = fit_gamma(center(Dataset::make(x, y)));
  CHECK(std::abs(g.values(0, 0) - 2.0) <= 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("fit_gamma is equivariant under column rescaling") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> c(0.2, 5.0);
  for (int t = 0; t < 50; ++t) {
    const Matrix x = gaussian(30, 4, rng);
    const Matrix y = gaussian(30, 5, rng);
    const GammaMatrix g = fit_gamma(Dataset::make(x, y));
    const Index p = static_cast<Index>(rng() % 5), k = static_cast<Index>(rng() % 4);
    const double cy = c(rng), cx = c(rng);
    Matrix y2 = y, x2 = x;
    y2.col(p) *= cy;
    x2.col(k) *= cx;
    const GammaMatrix g2 = fit_gamma(Dataset::make(x2, y2));
    Matrix expected = g.values;
    expected.col(p) *= cy;
    expected.row(k) /= cx;
    CHECK((g2.values - expected).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("fit_gamma names collinear columns") {
  std::mt19937_64 rng(14);
  Matrix x = gaussian(20, 3, rng);
  x.col(2) = 2.0 * x.col(0);
  const Dataset d = Dataset::make(x, gaussian(20, 3, rng), {"a", "b", "c"}, {});
  try {
    fit_gamma(d);
    FAIL("expected SingularGram");
  } catch (const SingularGram& e) {
    const std::string msg = e.what();
    CHECK(msg.find(" a") != std::string::npos);
    CHECK(msg.find(" c") != std::string::npos);
    CHECK(msg.find(" b") == std::string::npos);
  }
}

TEST_CASE("fit_gamma enforces the condition cap") {
  std::mt19937_64 rng(15);
  Matrix x = gaussian(50, 3, rng);
  x.col(1) = x.col(0) + 1e-4 * x.col(1);
  const Dataset d = Dataset::make(x, gaussian(50, 3, rng));
  FitOptions tight;
  tight.max_condition = 1e3;
  CHECK_THROWS_AS(fit_gamma(d, tight), IllConditioned);
  CHECK_NOTHROW(fit_gamma(d));
}

TEST_CASE("Scenario I draws match the closed-form Gamma") {
  const ScenarioConfig cfg = scenario_config(ScenarioKind::I);
  const std::size_t n = 50000;
  const GammaMatrix g = fit_gamma(center(generate(cfg, n, 2024)));
  const GammaMatrix pop = population_gamma(cfg);
  CHECK((g.values - pop.values).cwiseAbs().maxCoeff() <= 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("ols_inference p-values follow the t distribution") {
  std::mt19937_64 rng(16);
  const Matrix x = gaussian(200, 3, rng);
  Matrix y = gaussian(200, 3, rng);
  y.col(0) += 3.0 * x.col(0);
  const OlsInference inf = ols_inference(center(Dataset::make(x, y)));
  CHECK(inf.degrees_of_freedom == 196.0);
  CHECK(inf.p_values(0, 0) < 1e-20);
  CHECK(inf.p_values(1, 1) > 0.0);
  CHECK(inf.p_values(1, 1) <= 1.0);
  CHECK((inf.standard_errors.array() > 0).all());
}
