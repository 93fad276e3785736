#include "spectool/specificity.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "spectool/errors.hpp"

namespace spectool {
namespace {

// Relative slack for population comparisons, so that probes equal to
// |Gamma_ij| in exact arithmetic are not split by rounding.
constexpr double kPopulationRelTol = 1e-9;
// Absolute slack on score >= tau; scores are multiples of 1/((K-1)(P-1)).
constexpr double kTauSlack = 1e-12;

void check_target(const GammaMatrix& gamma, PairIndex target) {
  if (target.treatment < 0 || target.treatment >= gamma.num_treatments() || target.outcome < 0 ||
      target.outcome >= gamma.num_outcomes()) {
    std::ostringstream msg;
    msg << "target (" << target.treatment << ", " << target.outcome << ") outside a "
        << gamma.num_treatments() << "x" << gamma.num_outcomes() << " problem";
    throw InputError(msg.str());
  }
  if (gamma.num_treatments() < 2 || gamma.num_outcomes() < 2) {
    throw InputError("bias probes need at least two treatments and two outcomes");
  }
}

}  // namespace

LambdaMatrix lambda_matrix(const GammaMatrix& gamma, PairIndex target, double zero_tol) {
  check_target(gamma, target);
  const Matrix& g = gamma.values;
  LambdaMatrix out;
  out.target = target;
  out.values.resize(g.rows() - 1, g.cols() - 1);
  for (Index r = 0; r < out.values.rows(); ++r) {
    const Index k = out.treatment_at(r);
    for (Index c = 0; c < out.values.cols(); ++c) {
      const Index p = out.outcome_at(c);
      const double denom = g(k, p);
      out.values(r, c) = std::abs(denom) <= zero_tol
                             ? std::numeric_limits<double>::infinity()
                             : g(target.treatment, p) * g(k, target.outcome) / denom;
    }
  }
  return out;
}

double critical_value(Index num_treatments, Index num_outcomes, Index kstar, Index pstar) {
  if (num_treatments < 2 || num_outcomes < 2 || kstar < 0 || pstar < 0 ||
      kstar >= num_treatments - 1 || pstar >= num_outcomes - 1) {
    std::ostringstream msg;
    msg << "specificity bounds need 0 <= K* < K-1 and 0 <= P* < P-1; got K=" << num_treatments
        << ", P=" << num_outcomes << ", K*=" << kstar << ", P*=" << pstar;
    throw InvalidBounds(msg.str());
  }
  const double k1 = static_cast<double>(num_treatments - 1);
  const double p1 = static_cast<double>(num_outcomes - 1);
  return 1.0 - (k1 - static_cast<double>(kstar)) * (p1 - static_cast<double>(pstar)) / (k1 * p1);
}

double conservative_critical_value(Index num_treatments, Index num_outcomes) {
  return critical_value(num_treatments, num_outcomes, num_treatments - 2, num_outcomes - 2);
}

double ScoreMode::buffer() const {
  if (!n) return 0.0;
  const auto nn = static_cast<double>(*n);
  return std::sqrt(std::log(nn) / nn);
}

SpecificityReport specificity_score(const LambdaMatrix& lambda, double gamma_target, ScoreMode mode,
                                    double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) throw InputError("eta must lie in [0, 1)");
  if (mode.n && *mode.n < 2) throw InputError("sample scores need n >= 2");

  SpecificityReport rep;
  rep.target = lambda.target;
  rep.eta = eta;
  rep.buffer = mode.buffer();

  const double t = std::abs(gamma_target);
  double hi = t * (1.0 + eta) * (1.0 + eta) / (1.0 - eta) + rep.buffer;
  double lo = t * (1.0 - eta) * (1.0 - eta) / (1.0 + eta) - rep.buffer;
  if (!mode.n) {
    hi += kPopulationRelTol * t;
    lo -= kPopulationRelTol * t;
  }
  for (Index r = 0; r < lambda.values.rows(); ++r) {
    for (Index c = 0; c < lambda.values.cols(); ++c) {
      const double v = std::abs(lambda.values(r, c));
      if (v > hi) {
        ++rep.above;
      } else if (v < lo) {
        ++rep.below;
      }
    }
  }
  rep.total = static_cast<std::size_t>(lambda.values.size());
  const auto total = static_cast<double>(rep.total);
  rep.q1 = rep.total ? static_cast<double>(rep.above) / total : 0.0;
  rep.q2 = rep.total ? static_cast<double>(rep.below) / total : 0.0;
  rep.score = std::max(rep.q1, rep.q2);
  return rep;
}

SpecificityReport specificity_test(SpecificityReport report, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) throw InvalidBounds("critical value must lie in [0, 1)");
  report.tau = tau;
  report.reject = report.score >= tau - kTauSlack;
  return report;
}

double pair_critical_value(const ScoringConfig& config, Index num_treatments, Index num_outcomes,
                           PairIndex target) {
  if (config.tau_override) return *config.tau_override;
  if (!config.per_pair_bounds.empty()) {
    if (static_cast<Index>(config.per_pair_bounds.size()) != num_treatments * num_outcomes) {
      throw InputError("per-pair bounds table does not match the K x P grid");
    }
    const auto& b =
        config.per_pair_bounds[static_cast<std::size_t>(target.treatment * num_outcomes + target.outcome)];
    return critical_value(num_treatments, num_outcomes, b.kstar, b.pstar);
  }
  if (config.bounds) {
    return critical_value(num_treatments, num_outcomes, config.bounds->kstar, config.bounds->pstar);
  }
  return conservative_critical_value(num_treatments, num_outcomes);
}

ScoreMode score_mode(const GammaMatrix& gamma, const ScoringConfig& config) {
  if (config.population) return ScoreMode::population();
  if (config.effective_n) return ScoreMode::sample(*config.effective_n);
  return ScoreMode{gamma.n};
}

SpecificityReport score_pair(const GammaMatrix& gamma, PairIndex target, const ScoringConfig& config) {
  const LambdaMatrix lambda = lambda_matrix(gamma, target, config.zero_tol);
  const SpecificityReport rep =
      specificity_score(lambda, gamma.values(target.treatment, target.outcome),
                        score_mode(gamma, config), config.eta);
  return specificity_test(
      rep, pair_critical_value(config, gamma.num_treatments(), gamma.num_outcomes(), target));
}

Matrix ReportGrid::scores() const {
  Matrix m(num_treatments, num_outcomes);
  for (Index i = 0; i < num_treatments; ++i)
    for (Index j = 0; j < num_outcomes; ++j) m(i, j) = at(i, j).score;
  return m;
}

Matrix ReportGrid::decisions() const {
  Matrix m(num_treatments, num_outcomes);
  for (Index i = 0; i < num_treatments; ++i)
    for (Index j = 0; j < num_outcomes; ++j) m(i, j) = at(i, j).reject ? 1.0 : 0.0;
  return m;
}

ReportGrid score_all_pairs(const GammaMatrix& gamma, const ScoringConfig& config) {
  ReportGrid grid;
  grid.num_treatments = gamma.num_treatments();
  grid.num_outcomes = gamma.num_outcomes();
  grid.reports.reserve(static_cast<std::size_t>(gamma.values.size()));
  for (Index i = 0; i < grid.num_treatments; ++i) {
    for (Index j = 0; j < grid.num_outcomes; ++j) {
      grid.reports.push_back(score_pair(gamma, {i, j}, config));
    }
  }
  return grid;
}

std::vector<SpecificityReport> sensitivity_curve(const GammaMatrix& gamma, PairIndex target,
                                                 std::span<const double> eta_grid, double tau,
                                                 const ScoringConfig& config) {
  for (std::size_t e = 0; e < eta_grid.size(); ++e) {
    if (!(eta_grid[e] >= 0.0 && eta_grid[e] < 1.0)) throw InputError("eta grid values must lie in [0, 1)");
    if (e > 0 && eta_grid[e] < eta_grid[e - 1]) throw InputError("eta grid must be ascending");
  }
  const LambdaMatrix lambda = lambda_matrix(gamma, target, config.zero_tol);
  const double g = gamma.values(target.treatment, target.outcome);
  const ScoreMode mode = score_mode(gamma, config);
  std::vector<SpecificityReport> out;
  out.reserve(eta_grid.size());
  for (double eta : eta_grid) out.push_back(specificity_test(specificity_score(lambda, g, mode, eta), tau));
  return out;
}

}  // namespace spectool
