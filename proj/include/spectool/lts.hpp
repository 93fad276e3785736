#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spectool {

struct LtsOptions {
  /// Largest C(m, h) solved by exhaustive subset enumeration.
  std::uint64_t enumeration_budget = 1'000'000;
  /// Objectives closer than this are treated as ties.
  double tie_tolerance = 1e-12;
};

struct LtsFit {
  double slope = 0.0;
  double objective = 0.0;
  std::vector<std::size_t> subset;  // sorted, size h
  bool exact = true;                // false when the concentration-step search was used
};

/// Least trimmed squares line through the origin:
///   minimise over a the sum of the h smallest (y_i - a x_i)^2.
///
/// Ties between subsets are broken by smaller |slope|, then by the
/// lexicographically smaller index set. Throws InputError on bad sizes and
/// DegenerateDesign when fewer than h of the x_i are nonzero.
LtsFit lts_line_fit(std::span<const double> xs, std::span<const double> ys, std::size_t h,
                    const LtsOptions& options = {});

/// C(m, h), saturating at UINT64_MAX.
std::uint64_t binomial(std::size_t m, std::size_t h) noexcept;

}  // namespace spectool
