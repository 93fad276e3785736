#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spectool/bootstrap.hpp"
#include "spectool/estimation.hpp"
#include "spectool/regression.hpp"
#include "spectool/specificity.hpp"

namespace spectool {

enum class ScenarioKind { I, II, Sensitivity };
enum class PerturbationSigns { Same, Alternating };

/// Linear structural model with one latent confounder U ~ N(0, 1):
///   X ~ N(zeta U, Sigma_X),  Y ~ N(beta' X + alpha U, Sigma_Y).
struct ScenarioConfig {
  std::string name;
  Vector zeta;     // K
  Matrix sigma_x;  // K x K
  Matrix sigma_y;  // P x P
  Vector alpha;    // P
  Matrix beta;     // K x P
  std::vector<PairIndex> active;     // planted effects
  std::vector<PairIndex> perturbed;  // small effects added for sensitivity runs

  Index num_treatments() const noexcept { return beta.rows(); }
  Index num_outcomes() const noexcept { return beta.cols(); }
  /// Throws InputError on shape mismatch, non-SPD covariances or alpha[0] != 1.
  void validate() const;
};

/// Five treatments, eight outcomes. Scenario II cancels the confounding bias of
/// effect (3, 5) exactly; Sensitivity is Scenario I with `perturbation` added
/// to the zero entries of treatment row 1 and outcome column 1.
ScenarioConfig scenario_config(ScenarioKind which, double perturbation = 0.15,
                               PerturbationSigns signs = PerturbationSigns::Same);

/// "I", "II" or "sensitivity" (case-insensitive). Throws InputError otherwise.
ScenarioKind parse_scenario(std::string_view name);

/// (Sigma_X + zeta zeta')^{-1} zeta.
Vector population_delta(const ScenarioConfig& config);

/// beta + delta alpha', in closed form.
GammaMatrix population_gamma(const ScenarioConfig& config);

/// n i.i.d. draws; identical output for identical (config, n, seed).
Dataset generate(const ScenarioConfig& config, std::size_t n, std::uint64_t seed);

/// Single-pair negative-control estimate for every entry: outcome p is
/// corrected with the pair nc[p] = (treatment a, outcome b) as
///   Gamma_kp - Gamma_kb Gamma_ab^{-1} Gamma_ap.
Matrix nc_estimate(const Matrix& gamma, std::span<const PairIndex> nc_per_outcome);

/// (X5, Y5) for outcomes 1-4 and (X1, Y4) for outcomes 5-8 (zero-based here).
std::vector<PairIndex> default_nc_assignment(Index num_outcomes);

enum class TestMethod { SpcTest, PvalueOls, Bspc };
enum class Estimator { Ols, Spc, NcOracle };

std::string to_string(TestMethod m);
std::string to_string(Estimator e);

struct PowerOptions {
  double tau = 19.0 / 28.0;
  std::vector<double> eta_grid{0.0};
  double significance = 0.05;  // pvalue_ols level
  bool raw_scale = false;      // default pipeline standardizes
  BootstrapOptions bspc = [] {
    BootstrapOptions b;
    b.replicates = 200;
    return b;
  }();
  unsigned threads = 0;
  double max_failure_fraction = 0.05;
};

struct BiasOptions {
  SpcOptions spc;
  std::vector<PairIndex> nc_assignment;  // empty = default_nc_assignment
  unsigned threads = 0;
  double max_failure_fraction = 0.05;
};

struct ExperimentResult {
  std::string scenario;
  std::size_t n = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> replicate_seeds;
  double tau = 0.0;
  std::vector<double> eta_grid;
  Matrix beta;
  /// method -> one K x P rejection-frequency matrix per eta (one for pvalue_ols).
  std::map<std::string, std::vector<Matrix>> rejection;
  /// estimator -> mean (estimate - beta) and mean |estimate - beta|.
  std::map<std::string, Matrix> bias;
  std::map<std::string, Matrix> mean_abs_error;
  std::size_t failures = 0;
};

ExperimentResult power_experiment(const ScenarioConfig& config, std::size_t n, std::size_t reps,
                                  std::span<const TestMethod> methods, const PowerOptions& options,
                                  std::uint64_t seed);

/// Estimators run on centred, unscaled data so estimates share beta's units.
ExperimentResult bias_experiment(const ScenarioConfig& config, std::size_t n, std::size_t reps,
                                 std::span<const Estimator> estimators, std::uint64_t seed,
                                 const BiasOptions& options = {});

}  // namespace spectool
