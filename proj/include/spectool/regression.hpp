#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spectool {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raw observations: n rows of K treatments and P outcomes.
///
/// Column means and scales record what standardize()/center() removed so that
/// estimates can be mapped back to the original units.
struct Dataset {
  Matrix treatments;  // n x K
  Matrix outcomes;    // n x P
  std::vector<std::string> treatment_names;
  std::vector<std::string> outcome_names;
  bool standardized = false;
  bool centered = false;
  Vector treatment_means, treatment_scales;
  Vector outcome_means, outcome_scales;

  /// Validating constructor. Empty name lists are filled with X1.., Y1...
  static Dataset make(Matrix treatments, Matrix outcomes,
                      std::vector<std::string> treatment_names = {},
                      std::vector<std::string> outcome_names = {});

  Index rows() const noexcept { return treatments.rows(); }
  Index num_treatments() const noexcept { return treatments.cols(); }
  Index num_outcomes() const noexcept { return outcomes.cols(); }
};

/// Throws InputError unless K >= 3 and P >= 3.
void require_analysis_shape(const Dataset& data);

/// Centres every column and scales it to unit sample variance (n-1 divisor).
Dataset standardize(const Dataset& data);

/// Centres every column without rescaling.
Dataset center(const Dataset& data);

/// Rows picked by index (with repetition). Location/scale bookkeeping is reset.
Dataset select_rows(const Dataset& data, std::span<const Index> rows);

/// Least-squares cross-coefficients of outcomes on treatments.
/// `n` is empty for population (closed-form) matrices.
struct GammaMatrix {
  Matrix values;  // K x P
  std::optional<std::size_t> n;
  double gram_condition = 0.0;

  bool is_population() const noexcept { return !n.has_value(); }
  Index num_treatments() const noexcept { return values.rows(); }
  Index num_outcomes() const noexcept { return values.cols(); }
};

struct FitOptions {
  double max_condition = 1e10;
};

/// Solves (X'X) G = X'Y through a Cholesky factorization. No intercept:
/// callers centre or standardize first.
GammaMatrix fit_gamma(const Dataset& data, const FitOptions& options = {});

/// Per-coefficient Wald inference for the regression behind fit_gamma.
struct OlsInference {
  GammaMatrix gamma;
  Matrix standard_errors;
  Matrix p_values;  // two-sided, Student t
  double degrees_of_freedom = 0.0;
};

OlsInference ols_inference(const Dataset& data, const FitOptions& options = {});

}  // namespace spectool
