#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectool/bootstrap.hpp"
#include "spectool/lts.hpp"
#include "spectool/regression.hpp"

namespace spectool {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Where nonzero causal effects are allowed (K x P).
struct CausalPattern {
  BoolMatrix support;

  static CausalPattern from_effects(const Matrix& beta, double tol = 0.0);
  Index num_treatments() const noexcept { return support.rows(); }
  Index num_outcomes() const noexcept { return support.cols(); }
};

struct IdentificationCheck {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Every pair of outcomes shares at most (K-1)/2 causes and every treatment
/// affects at most (P-1)/2 outcomes.
IdentificationCheck check_identification(const CausalPattern& pattern);

/// Same conditions restricted to a treatment subset and an outcome subset.
bool check_partial_identification(const CausalPattern& pattern, std::span<const Index> treatments,
                                  std::span<const Index> outcomes);

struct SpcOptions {
  /// Outcome whose confounding loading is fixed to 1.
  Index anchor_outcome = 0;
  /// Selection threshold on squared LTS effects for population matrices.
  double population_threshold = 1e-9;
  /// Overrides log(n)/n when set.
  std::optional<double> selection_threshold;
  LtsOptions lts;
};

struct SpcEstimate {
  Matrix beta;       // K x P
  Vector alpha;      // P, alpha[anchor] == 1
  Vector delta;      // K
  Matrix beta_lts;
  Vector alpha_lts;
  Vector delta_lts;
  Index anchor_outcome = 0;
  double selection_threshold = 0.0;
  /// Per outcome: treatments used to refit alpha_p (null in both p and the anchor).
  std::vector<std::vector<Index>> null_sets_alpha;
  /// Per treatment: outcomes used to refit delta_k.
  std::vector<std::vector<Index>> null_sets_delta;
  std::optional<Matrix> standard_errors;
  bool approximate = false;  // some LTS fit exceeded the enumeration budget
  std::vector<std::string> warnings;
};

/// Correlation / Confounding / Causation / Correction pipeline on a fitted
/// (or population) Gamma.
SpcEstimate spc_estimate(const GammaMatrix& gamma, const SpcOptions& options = {});

/// Entrywise bootstrap standard deviation of the final beta estimate.
Matrix bootstrap_stderr(const Dataset& data, const BootstrapOptions& bootstrap,
                        const SpcOptions& options = {});

}  // namespace spectool
