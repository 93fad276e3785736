#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "spectool/regression.hpp"
#include "spectool/specificity.hpp"

namespace spectool {

struct BootstrapOptions {
  std::size_t replicates = 1000;
  double reject_fraction = 0.95;
  std::uint64_t seed = 0;
  /// Abort when more than this share of replicates fail numerically.
  double max_drop_fraction = 0.05;
  FitOptions fit;
  unsigned threads = 0;  // 0 = thread_count()
};

/// Nonparametric row resample of `data`, re-running the same normalization
/// (standardize or center) that produced it.
Dataset resample_dataset(const Dataset& data, std::mt19937_64& rng);

struct BootstrapTestResult {
  PairIndex target;
  bool reject = false;
  double fraction_above = 0.0;  // share of kept replicates with score > tau
  double tau = 0.0;
  std::vector<double> scores;   // kept replicates, in replicate order
  std::size_t dropped = 0;
};

/// Single-pair bootstrap specificity (BSPC) test.
BootstrapTestResult bootstrap_test(const Dataset& data, PairIndex target, double tau, double eta,
                                   const BootstrapOptions& options,
                                   double zero_tol = kDefaultZeroTol);

/// BSPC decisions for every pair from one set of resamples.
struct BootstrapGrid {
  Index num_treatments = 0;
  Index num_outcomes = 0;
  Matrix fraction_above;  // K x P
  Matrix decisions;       // 1.0 where rejected
  Matrix taus;
  std::size_t kept = 0;
  std::size_t dropped = 0;
};

BootstrapGrid bootstrap_grid(const Dataset& data, const ScoringConfig& config,
                             const BootstrapOptions& options);

/// Throws InputError unless B >= 100 and the reject fraction is in (0.5, 1).
void validate_bootstrap_options(const BootstrapOptions& options);

}  // namespace spectool
