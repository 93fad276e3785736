#include "spectool/bootstrap.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "spectool/errors.hpp"
#include "spectool/parallel.hpp"

namespace spectool {
namespace {

constexpr double kAboveSlack = 1e-12;

// Fits every replicate; entries stay empty for dropped replicates.
std::vector<std::optional<GammaMatrix>> replicate_gammas(const Dataset& data,
                                                         const BootstrapOptions& options) {
  std::vector<std::optional<GammaMatrix>> out(options.replicates);
  parallel_for(
      options.replicates,
      [&](std::size_t b) {
        auto rng = replicate_engine(options.seed, b);
        try {
          out[b] = fit_gamma(resample_dataset(data, rng), options.fit);
        } catch (const NumericalError&) {
        } catch (const ConstantColumn&) {
        }
      },
      options.threads);
  std::size_t dropped = 0;
  for (const auto& g : out) dropped += g ? 0 : 1;
  if (static_cast<double>(dropped) > options.max_drop_fraction * static_cast<double>(options.replicates)) {
    std::ostringstream msg;
    msg << "bootstrap: " << dropped << " of " << options.replicates
        << " replicates failed (singular or constant resamples)";
    throw ReplicateFailure(msg.str());
  }
  return out;
}

}  // namespace

void validate_bootstrap_options(const BootstrapOptions& options) {
  if (options.replicates < 100) throw InputError("bootstrap needs at least 100 replicates");
  if (!(options.reject_fraction > 0.5 && options.reject_fraction < 1.0)) {
    throw InputError("bootstrap reject fraction must lie in (0.5, 1)");
  }
}

Dataset resample_dataset(const Dataset& data, std::mt19937_64& rng) {
  const Index n = data.rows();
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (auto& r : rows) r = pick(rng);
  Dataset d = select_rows(data, rows);
  if (data.standardized) return standardize(d);
  if (data.centered) return center(d);
  return d;
}

BootstrapTestResult bootstrap_test(const Dataset& data, PairIndex target, double tau, double eta,
                                   const BootstrapOptions& options, double zero_tol) {
  validate_bootstrap_options(options);
  if (!(tau >= 0.0 && tau < 1.0)) throw InvalidBounds("critical value must lie in [0, 1)");
  const auto gammas = replicate_gammas(data, options);

  BootstrapTestResult res;
  res.target = target;
  res.tau = tau;
  std::size_t above = 0;
  for (const auto& g : gammas) {
    if (!g) {
      ++res.dropped;
      continue;
    }
    const LambdaMatrix lambda = lambda_matrix(*g, target, zero_tol);
    const auto rep = specificity_score(lambda, g->values(target.treatment, target.outcome),
                                       ScoreMode{g->n}, eta);
    res.scores.push_back(rep.score);
    if (rep.score > tau + kAboveSlack) ++above;
  }
  res.fraction_above = static_cast<double>(above) / static_cast<double>(res.scores.size());
  res.reject = res.fraction_above > options.reject_fraction;
  return res;
}

BootstrapGrid bootstrap_grid(const Dataset& data, const ScoringConfig& config,
                             const BootstrapOptions& options) {
  validate_bootstrap_options(options);
  const auto gammas = replicate_gammas(data, options);
  const Index k = data.num_treatments();
  const Index p = data.num_outcomes();

  BootstrapGrid grid;
  grid.num_treatments = k;
  grid.num_outcomes = p;
  grid.fraction_above = Matrix::Zero(k, p);
  grid.taus.resize(k, p);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < p; ++j) grid.taus(i, j) = pair_critical_value(config, k, p, {i, j});

  for (const auto& g : gammas) {
    if (!g) {
      ++grid.dropped;
      continue;
    }
    ++grid.kept;
    const ReportGrid reports = score_all_pairs(*g, config);
    for (Index i = 0; i < k; ++i) {
      for (Index j = 0; j < p; ++j) {
        if (reports.at(i, j).score > grid.taus(i, j) + kAboveSlack) grid.fraction_above(i, j) += 1.0;
      }
    }
  }
  grid.fraction_above /= static_cast<double>(grid.kept);
  grid.decisions = (grid.fraction_above.array() > options.reject_fraction).cast<double>().matrix();
  return grid;
}

}  // namespace spectool
