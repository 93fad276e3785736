#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spectool/bootstrap.hpp"
#include "spectool/errors.hpp"
#include "spectool/estimation.hpp"
#include "spectool/lts.hpp"
#include "spectool/mr.hpp"
#include "spectool/regression.hpp"
#include "spectool/simulation.hpp"
#include "spectool/specificity.hpp"

namespace py = pybind11;
using namespace spectool;

namespace {

GammaMatrix as_gamma(const Matrix& values, std::optional<std::size_t> n) {
  GammaMatrix g;
  g.values = values;
  g.n = n;
  return g;
}

Dataset as_dataset(const Matrix& x, const Matrix& y, bool standardized) {
  Dataset d = Dataset::make(x, y);
  return standardized ? standardize(d) : center(d);
}

py::dict report_dict(const SpecificityReport& r) {
  py::dict d;
  d["treatment"] = r.target.treatment;
  d["outcome"] = r.target.outcome;
  d["q1"] = r.q1;
  d["q2"] = r.q2;
  d["score"] = r.score;
  d["tau"] = r.tau;
  d["eta"] = r.eta;
  d["reject"] = r.reject;
  return d;
}

ScoringConfig make_config(std::optional<std::pair<Index, Index>> bounds, std::optional<double> tau, double eta,
                          bool population) {
  ScoringConfig cfg;
  if (bounds) cfg.bounds = SpecificityBounds{bounds->first, bounds->second};
  cfg.tau_override = tau;
  cfg.eta = eta;
  cfg.population = population;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_spectool, m) {
  m.doc() = "Specificity tests and the SPC estimator";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "fit_gamma",
      [](const Matrix& x, const Matrix& y, bool standardized) { return fit_gamma(as_dataset(x, y, standardized)).values; },
      py::arg("x"), py::arg("y"), py::arg("standardize") = true,
      "Cross-coefficients (X'X)^{-1} X'Y after centring (and scaling).");

  m.def(
      "lambda_matrix",
      [](const Matrix& gamma, Index i, Index j) { return lambda_matrix(as_gamma(gamma, std::nullopt), {i, j}).values; },
      py::arg("gamma"), py::arg("treatment"), py::arg("outcome"));

  m.def("critical_value", &critical_value, py::arg("num_treatments"), py::arg("num_outcomes"), py::arg("kstar"),
        py::arg("pstar"));

  m.def(
      "specificity_score",
      [](const Matrix& gamma, Index i, Index j, std::optional<std::size_t> n, double eta) {
        const GammaMatrix g = as_gamma(gamma, n);
        const LambdaMatrix lam = lambda_matrix(g, {i, j});
        const ScoreMode mode = n ? ScoreMode::sample(*n) : ScoreMode::population();
        return report_dict(specificity_score(lam, gamma(i, j), mode, eta));
      },
      py::arg("gamma"), py::arg("treatment"), py::arg("outcome"), py::arg("n") = py::none(), py::arg("eta") = 0.0,
      "Score for one pair; population mode when n is None.");

  m.def(
      "score_all_pairs",
      [](const Matrix& gamma, std::optional<std::size_t> n, std::optional<std::pair<Index, Index>> bounds,
         std::optional<double> tau, double eta) {
        const ReportGrid grid = score_all_pairs(as_gamma(gamma, n), make_config(bounds, tau, eta, !n));
        return py::make_tuple(grid.scores(), grid.decisions());
      },
      py::arg("gamma"), py::arg("n") = py::none(), py::arg("bounds") = py::none(), py::arg("tau") = py::none(),
      py::arg("eta") = 0.0, "Returns (scores, decisions) as K x P arrays.");

  m.def(
      "bootstrap_grid",
      [](const Matrix& x, const Matrix& y, std::optional<std::pair<Index, Index>> bounds, std::optional<double> tau,
         double eta, std::size_t replicates, double reject_fraction, std::uint64_t seed) {
        BootstrapOptions opts;
        opts.replicates = replicates;
        opts.reject_fraction = reject_fraction;
        opts.seed = seed;
        const BootstrapGrid g =
            bootstrap_grid(as_dataset(x, y, true), make_config(bounds, tau, eta, false), opts);
        return py::make_tuple(g.fraction_above, g.decisions);
      },
      py::arg("x"), py::arg("y"), py::arg("bounds") = py::none(), py::arg("tau") = py::none(), py::arg("eta") = 0.0,
      py::arg("replicates") = 1000, py::arg("reject_fraction") = 0.95, py::arg("seed") = 0);

  m.def(
      "spc_estimate",
      [](const Matrix& gamma, std::optional<std::size_t> n, Index anchor) {
        SpcOptions opts;
        opts.anchor_outcome = anchor;
        const SpcEstimate e = spc_estimate(as_gamma(gamma, n), opts);
        py::dict d;
        d["beta"] = e.beta;
        d["alpha"] = e.alpha;
        d["delta"] = e.delta;
        d["beta_lts"] = e.beta_lts;
        d["approximate"] = e.approximate;
        d["warnings"] = e.warnings;
        return d;
      },
      py::arg("gamma"), py::arg("n") = py::none(), py::arg("anchor_outcome") = 0);

  m.def(
      "lts_line_fit",
      [](const std::vector<double>& xs, const std::vector<double>& ys, std::size_t h) {
        const LtsFit f = lts_line_fit(xs, ys, h);
        return py::make_tuple(f.slope, f.objective, f.subset, f.exact);
      },
      py::arg("x"), py::arg("y"), py::arg("h"), "Returns (slope, objective, subset, exact).");

  m.def(
      "mr_reduce", [](const Matrix& gamma_zy, const Matrix& delta_zx) { return mr_reduce(MrSummary::make(gamma_zy, delta_zx)).values; },
      py::arg("gamma_zy"), py::arg("delta_zx"));

  m.def(
      "generate",
      [](const std::string& scenario, std::size_t n, std::uint64_t seed) {
        const Dataset d = generate(scenario_config(parse_scenario(scenario)), n, seed);
        return py::make_tuple(d.treatments, d.outcomes);
      },
      py::arg("scenario"), py::arg("n"), py::arg("seed"), "Returns (X, Y) drawn from a built-in scenario.");

  m.def(
      "scenario_beta", [](const std::string& scenario) { return scenario_config(parse_scenario(scenario)).beta; },
      py::arg("scenario"));
}
