#include "spectool/lts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "spectool/errors.hpp"

namespace spectool {

std::uint64_t binomial(std::size_t m, std::size_t h) noexcept {
  if (h > m) return 0;
  h = std::min(h, m - h);
  std::uint64_t result = 1;
  for (std::size_t i = 1; i <= h; ++i) {
    const std::uint64_t num = m - h + i;
    // result * num / i is always integral; guard the multiplication.
    if (result > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * num / i;
  }
  return result;
}

namespace {

struct Candidate {
  double slope = 0.0;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> subset;
};

// Closed-form through-origin slope and its residual sum on a subset.
// A subset whose x are all zero has a flat objective; slope 0 is the
// smallest-|slope| minimiser.
void fit_subset(std::span<const double> xs, std::span<const double> ys,
                std::span<const std::size_t> subset, double& slope, double& objective) {
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i : subset) {
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  slope = sxx > 0.0 ? sxy / sxx : 0.0;
  objective = 0.0;
  for (std::size_t i : subset) {
    const double r = ys[i] - slope * xs[i];
    objective += r * r;
  }
}

bool better(const Candidate& c, const Candidate& best, double tol) {
  if (c.objective < best.objective - tol) return true;
  if (c.objective > best.objective + tol) return false;
  const double a = std::abs(c.slope), b = std::abs(best.slope);
  if (a != b) return a < b;
  return c.subset < best.subset;
}

Candidate enumerate_subsets(std::span<const double> xs, std::span<const double> ys,
                            std::size_t h, double tol) {
  const std::size_t m = xs.size();
  std::vector<std::size_t> idx(h);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Candidate best;
  Candidate cur;
  while (true) {
    fit_subset(xs, ys, idx, cur.slope, cur.objective);
    // Lexicographic enumeration order makes the index tie-break automatic:
    // an equal candidate seen later never replaces the incumbent.
    if (best.subset.empty() || cur.objective < best.objective - tol ||
        (cur.objective <= best.objective + tol && std::abs(cur.slope) < std::abs(best.slope))) {
      best.slope = cur.slope;
      best.objective = cur.objective;
      best.subset = idx;
    }
    // Advance to the next combination.
    std::size_t i = h;
    while (i > 0 && idx[i - 1] == m - h + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < h; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

// h indices with the smallest squared residual at `slope`; ties by index.
std::vector<std::size_t> smallest_residuals(std::span<const double> xs, std::span<const double> ys,
                                            double slope, std::size_t h) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto resid = [&](std::size_t i) {
    const double r = ys[i] - slope * xs[i];
    return r * r;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return resid(a) < resid(b); });
  order.resize(h);
  std::sort(order.begin(), order.end());
  return order;
}

Candidate concentrate(std::span<const double> xs, std::span<const double> ys, std::size_t h,
                      std::vector<std::size_t> subset, double tol) {
  Candidate c;
  fit_subset(xs, ys, subset, c.slope, c.objective);
  c.subset = std::move(subset);
  for (int iter = 0; iter < 200; ++iter) {
    Candidate next;
    next.subset = smallest_residuals(xs, ys, c.slope, h);
    fit_subset(xs, ys, next.subset, next.slope, next.objective);
    if (!(next.objective < c.objective - tol)) {
      if (better(next, c, tol)) c = std::move(next);
      break;
    }
    c = std::move(next);
  }
  return c;
}

Candidate concentration_search(std::span<const double> xs, std::span<const double> ys,
                               std::size_t h, double tol) {
  const std::size_t m = xs.size();
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < m; ++i) {
    if (xs[i] != 0.0) nonzero.push_back(i);
  }
  std::stable_sort(nonzero.begin(), nonzero.end(), [&](std::size_t a, std::size_t b) {
    return ys[a] / xs[a] < ys[b] / xs[b];
  });

  Candidate best;
  auto consider = [&](std::vector<std::size_t> start) {
    std::sort(start.begin(), start.end());
    Candidate c = concentrate(xs, ys, h, std::move(start), tol);
    if (best.subset.empty() || better(c, best, tol)) best = std::move(c);
  };
  for (std::size_t first = 0; first + h <= nonzero.size(); ++first) {
    consider({nonzero.begin() + static_cast<std::ptrdiff_t>(first),
              nonzero.begin() + static_cast<std::ptrdiff_t>(first + h)});
  }
  // Full least-squares start, so the result never loses to plain OLS trimmed to h.
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  double ols_slope = 0.0, ignored = 0.0;
  fit_subset(xs, ys, all, ols_slope, ignored);
  consider(smallest_residuals(xs, ys, ols_slope, h));
  return best;
}

}  // namespace

LtsFit lts_line_fit(std::span<const double> xs, std::span<const double> ys, std::size_t h,
                    const LtsOptions& options) {
  const std::size_t m = xs.size();
  if (ys.size() != m) throw InputError("lts_line_fit: xs and ys differ in length");
  if (m < 3) throw InputError("lts_line_fit: need at least 3 points");
  if (h < (m + 1) / 2 || h > m) {
    std::ostringstream msg;
    msg << "lts_line_fit: trim count h=" << h << " outside [" << (m + 1) / 2 << ", " << m << "]";
    throw InputError(msg.str());
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw InputError("lts_line_fit: non-finite input");
    }
  }
  const auto nonzero =
      static_cast<std::size_t>(std::count_if(xs.begin(), xs.end(), [](double x) { return x != 0.0; }));
  if (nonzero < h) {
    std::ostringstream msg;
    msg << "lts_line_fit: only " << nonzero << " nonzero regressor values, need h=" << h;
    throw DegenerateDesign(msg.str());
  }

  const bool exact = binomial(m, h) <= options.enumeration_budget;
  Candidate best = exact ? enumerate_subsets(xs, ys, h, options.tie_tolerance)
                         : concentration_search(xs, ys, h, options.tie_tolerance);
  LtsFit fit;
  fit.slope = best.slope;
  fit.objective = best.objective;
  fit.subset = std::move(best.subset);
  fit.exact = exact;
  return fit;
}

}  // namespace spectool
