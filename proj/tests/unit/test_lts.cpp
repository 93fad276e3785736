#include <catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "spectool/errors.hpp"
#include "spectool/lts.hpp"
#include "support/oracles.hpp"

using namespace spectool;
using Catch::Matchers::WithinAbs;

TEST_CASE("lts: five points with one outlier") {
  const std::vector<double> xs{1, 2, 3, 4, 5}, ys{2, 4, 6, 9, 10};
  const LtsFit f = lts_line_fit(xs, ys, 3);
  CHECK_THAT(f.slope, WithinAbs(2.0, 1e-14));
  CHECK_THAT(f.objective, WithinAbs(0.0, 1e-20));
  CHECK(f.exact);
  CHECK(f.subset.size() == 3);
  for (std::size_t i : f.subset) CHECK(i != 3);
}

TEST_CASE("lts: collinear data gives the exact slope for every h") {
  const std::vector<double> xs{-2, 0.5, 1, 3, 4, -1};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3 * x);
  for (std::size_t h = 3; h <= xs.size(); ++h) {
    const LtsFit f = lts_line_fit(xs, ys, h);
    CHECK_THAT(f.slope, WithinAbs(3.0, 1e-14));
    CHECK_THAT(f.objective, WithinAbs(0.0, 1e-20));
  }
}

TEST_CASE("lts: the majority at zero wins") {
  const std::vector<double> xs{1, 1, 1, 1, 1}, ys{0, 0, 0, 10, 10};
  const LtsFit f = lts_line_fit(xs, ys, 3);
  CHECK(f.slope == 0.0);
  CHECK(f.objective == 0.0);
  CHECK(f.subset == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("lts: ties prefer the smaller slope, then the smaller index set") {
  // Subsets {0,1} (slope 1) and {2,3} (slope -1) both fit exactly; equal |slope|.
  const std::vector<double> xs{1, 2, 1, 2}, ys{1, 2, -1, -2};
  const LtsFit f = lts_line_fit(xs, ys, 2);
  CHECK(f.objective == 0.0);
  CHECK(f.subset == std::vector<std::size_t>{0, 1});
  const std::vector<double> ys2{2, 4, -1, -2};
  CHECK(lts_line_fit(xs, ys2, 2).slope == -1.0);
}

TEST_CASE("lts: input validation") {
  const std::vector<double> two{1, 2};
  CHECK_THROWS_AS(lts_line_fit(two, two, 2), InputError);
  const std::vector<double> xs{1, 2, 3, 4}, ys{1, 2, 3, 4};
  CHECK_THROWS_AS(lts_line_fit(xs, ys, 1), InputError);
  CHECK_THROWS_AS(lts_line_fit(xs, ys, 5), InputError);
  const std::vector<double> zeros{0, 0, 1, 1};
  CHECK_THROWS_AS(lts_line_fit(zeros, ys, 3), DegenerateDesign);
  const std::vector<double> inf{1, 2, std::numeric_limits<double>::infinity(), 4};
  CHECK_THROWS_AS(lts_line_fit(inf, ys, 3), InputError);
}

TEST_CASE("lts: exact mode agrees with brute force and beats trimmed OLS") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z;
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 3 + rng() % 10;
    const std::size_t h = (m + 1) / 2 + rng() % (m - (m + 1) / 2 + 1);
    std::vector<double> xs(m), ys(m);
    for (std::size_t i = 0; i < m; ++i) {
      xs[i] = z(rng);
      ys[i] = 1.5 * xs[i] + 0.1 * z(rng) + (rng() % 3 == 0 ? 5 * z(rng) : 0.0);
    }
    const LtsFit f = lts_line_fit(xs, ys, h);
    const oracle::TrimmedFit o = oracle::brute_force_lts(xs, ys, h);
    CHECK_THAT(f.objective, WithinAbs(o.objective, 1e-10));
    CHECK_THAT(oracle::trimmed_objective(xs, ys, h, f.slope), WithinAbs(f.objective, 1e-10));

    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < m; ++i) sxy += xs[i] * ys[i], sxx += xs[i] * xs[i];
    CHECK(f.objective <= oracle::trimmed_objective(xs, ys, h, sxy / sxx) + 1e-12);
  }
}

TEST_CASE("lts: breakdown, floor(m/2)-1 outliers leave the slope exact") {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> z;
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 5 + rng() % 10;
    const std::size_t h = m / 2 + 1;
    const double a = z(rng);
    std::vector<double> xs(m), ys(m);
    for (std::size_t i = 0; i < m; ++i) {
      xs[i] = 0.5 + std::abs(z(rng));
      ys[i] = a * xs[i];
    }
    for (std::size_t i = 0; i + 1 < m / 2; ++i) ys[i] += 100.0 * z(rng);
    const LtsFit f = lts_line_fit(xs, ys, h);
    CHECK_THAT(f.slope, WithinAbs(a, 1e-12));
    CHECK_THAT(f.objective, WithinAbs(0.0, 1e-20));
  }
}

TEST_CASE("lts: approximate mode above the budget") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> z;
  const std::size_t m = 30;
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = 1 + std::abs(z(rng));
    ys[i] = -0.7 * xs[i] + (i < 10 ? 20 + z(rng) : 0.0);
  }
  LtsOptions opts;
  opts.enumeration_budget = 1000;
  const LtsFit f = lts_line_fit(xs, ys, 16, opts);
  CHECK_FALSE(f.exact);
  CHECK_THAT(f.slope, WithinAbs(-0.7, 1e-12));
  CHECK(f.subset.size() == 16);
}

TEST_CASE("binomial saturates") {
  CHECK(binomial(5, 3) == 10);
  CHECK(binomial(12, 6) == 924);
  CHECK(binomial(0, 0) == 1);
  CHECK(binomial(3, 4) == 0);
  CHECK(binomial(200, 100) == UINT64_MAX);
}
