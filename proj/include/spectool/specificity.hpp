#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spectool/regression.hpp"

namespace spectool {

/// Treatment index i and outcome index j (zero-based).
struct PairIndex {
  Index treatment = 0;
  Index outcome = 0;
  friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

inline constexpr double kDefaultZeroTol = 1e-8;

/// Confounding-bias probes Gamma_ip * Gamma_kj / Gamma_kp for k != i, p != j.
/// Entry (r, c) belongs to treatment treatment_at(r) and outcome outcome_at(c).
struct LambdaMatrix {
  PairIndex target;
  Matrix values;  // (K-1) x (P-1); +inf where |Gamma_kp| <= zero_tol

  Index treatment_at(Index row) const noexcept { return row < target.treatment ? row : row + 1; }
  Index outcome_at(Index col) const noexcept { return col < target.outcome ? col : col + 1; }
};

LambdaMatrix lambda_matrix(const GammaMatrix& gamma, PairIndex target,
                           double zero_tol = kDefaultZeroTol);

/// tau = 1 - (K-1-K*)(P-1-P*) / ((K-1)(P-1)). Throws InvalidBounds unless
/// 0 <= K* < K-1 and 0 <= P* < P-1.
double critical_value(Index num_treatments, Index num_outcomes, Index kstar, Index pstar);

/// The bound that only assumes one valid negative-control pair exists.
double conservative_critical_value(Index num_treatments, Index num_outcomes);

/// Population scores compare exactly (up to a relative rounding slack);
/// sample scores widen both thresholds by sqrt(log n / n).
struct ScoreMode {
  std::optional<std::size_t> n;

  static ScoreMode population() { return {}; }
  static ScoreMode sample(std::size_t n) { return ScoreMode{n}; }
  double buffer() const;
};

struct SpecificityReport {
  PairIndex target;
  double q1 = 0.0;
  double q2 = 0.0;
  double score = 0.0;
  double tau = 0.0;
  double eta = 0.0;
  double buffer = 0.0;
  bool reject = false;
  std::size_t above = 0;  // numerators of q1, q2
  std::size_t below = 0;
  std::size_t total = 0;  // (K-1)(P-1)
};

/// q1/q2: share of |Lambda| strictly above |Gamma_ij|(1+eta)^2/(1-eta) + b and
/// strictly below |Gamma_ij|(1-eta)^2/(1+eta) - b. Infinite entries count in q1.
SpecificityReport specificity_score(const LambdaMatrix& lambda, double gamma_target, ScoreMode mode,
                                    double eta = 0.0);

/// Sets tau and reject = (score >= tau).
SpecificityReport specificity_test(SpecificityReport report, double tau);

/// Upper bounds on causal breadth used to derive tau for one pair.
struct SpecificityBounds {
  Index kstar = 0;
  Index pstar = 0;
};

struct ScoringConfig {
  /// Global (K*, P*); when empty the conservative tau is used.
  std::optional<SpecificityBounds> bounds;
  /// Optional K x P row-major table overriding `bounds` per pair.
  std::vector<SpecificityBounds> per_pair_bounds;
  std::optional<double> tau_override;
  double eta = 0.0;
  double zero_tol = kDefaultZeroTol;
  /// Replaces gamma.n when set (e.g. an effective n for summary data).
  std::optional<std::size_t> effective_n;
  /// Forces the population mode even for fitted matrices.
  bool population = false;
};

/// tau that `config` assigns to `target` in a K x P problem.
double pair_critical_value(const ScoringConfig& config, Index num_treatments, Index num_outcomes,
                           PairIndex target);

ScoreMode score_mode(const GammaMatrix& gamma, const ScoringConfig& config);

/// K x P grid of reports, row-major by (treatment, outcome).
struct ReportGrid {
  Index num_treatments = 0;
  Index num_outcomes = 0;
  std::vector<SpecificityReport> reports;

  const SpecificityReport& at(Index i, Index j) const {
    return reports[static_cast<std::size_t>(i * num_outcomes + j)];
  }
  Matrix scores() const;
  Matrix decisions() const;  // 1.0 where rejected
};

SpecificityReport score_pair(const GammaMatrix& gamma, PairIndex target, const ScoringConfig& config);

ReportGrid score_all_pairs(const GammaMatrix& gamma, const ScoringConfig& config);

/// One report per eta (grid ascending in [0, 1)); tau fixed across the grid.
std::vector<SpecificityReport> sensitivity_curve(const GammaMatrix& gamma, PairIndex target,
                                                 std::span<const double> eta_grid, double tau,
                                                 const ScoringConfig& config = {});

}  // namespace spectool
