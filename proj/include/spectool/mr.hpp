#pragma once

#include <string>
#include <vector>

#include "spectool/regression.hpp"

namespace spectool {

/// Two-sample Mendelian randomization summary statistics, pre-harmonized.
struct MrSummary {
  Matrix gamma_zy;  // L x P instrument-outcome associations
  Matrix delta_zx;  // L x K instrument-exposure associations
  std::vector<std::string> instrument_names;
  std::vector<std::string> exposure_names;
  std::vector<std::string> outcome_names;

  /// Checks shapes, finiteness and L >= K; names default to Z1.., X1.., Y1...
  static MrSummary make(Matrix gamma_zy, Matrix delta_zx, std::vector<std::string> instrument_names = {},
                        std::vector<std::string> exposure_names = {},
                        std::vector<std::string> outcome_names = {});
};

/// Exposure-outcome cross-coefficients (delta' delta)^{-1} delta' Gamma, i.e.
/// the column-wise least-squares solution of delta_zx * G = gamma_zy.
/// Returned as a population matrix. Throws RankDeficient when delta_zx does
/// not have full column rank.
GammaMatrix mr_reduce(const MrSummary& summary);

}  // namespace spectool
