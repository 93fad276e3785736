#include "spectool/regression.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "spectool/errors.hpp"

namespace spectool {
namespace {

std::vector<std::string> default_names(const char* prefix, Index count) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i + 1));
  return names;
}

void check_names(const std::vector<std::string>& names, Index expected, const char* what) {
  if (static_cast<Index>(names.size()) != expected) {
    std::ostringstream msg;
    msg << what << " names: expected " << expected << ", got " << names.size();
    throw InputError(msg.str());
  }
}

// Removes column means and, when `scale` is set, divides by sample sd.
void normalize_columns(Matrix& m, Vector& means, Vector& scales, bool scale,
                       const std::vector<std::string>& names) {
  const auto n = static_cast<double>(m.rows());
  means = m.colwise().mean().transpose();
  m.rowwise() -= means.transpose();
  scales = Vector::Ones(m.cols());
  if (!scale) return;
  for (Index j = 0; j < m.cols(); ++j) {
    const double var = m.col(j).squaredNorm() / (n - 1.0);
    const double mean_abs = std::abs(means(j));
    // Relative test so that a constant column of large values is still caught.
    if (!(var > 0.0) || std::sqrt(var) <= 1e-13 * std::max(1.0, mean_abs)) {
      throw ConstantColumn(names[static_cast<std::size_t>(j)]);
    }
    scales(j) = std::sqrt(var);
    m.col(j) /= scales(j);
  }
}

}  // namespace

Dataset Dataset::make(Matrix treatments, Matrix outcomes, std::vector<std::string> treatment_names,
                      std::vector<std::string> outcome_names) {
  if (treatments.rows() != outcomes.rows()) {
    throw InputError("treatments and outcomes have different row counts");
  }
  const Index n = treatments.rows();
  const Index k = treatments.cols();
  const Index p = outcomes.cols();
  if (k < 1 || p < 1) throw InputError("need at least one treatment and one outcome column");
  if (n < k + 2 || n < p + 2) {
    std::ostringstream msg;
    msg << "need at least max(K, P) + 2 = " << std::max(k, p) + 2 << " rows, got " << n;
    throw InputError(msg.str());
  }
  if (!treatments.allFinite() || !outcomes.allFinite()) {
    throw InputError("observations contain non-finite values");
  }
  if (treatment_names.empty()) treatment_names = default_names("X", k);
  if (outcome_names.empty()) outcome_names = default_names("Y", p);
  check_names(treatment_names, k, "treatment");
  check_names(outcome_names, p, "outcome");

  Dataset d;
  d.treatments = std::move(treatments);
  d.outcomes = std::move(outcomes);
  d.treatment_names = std::move(treatment_names);
  d.outcome_names = std::move(outcome_names);
  d.treatment_means = Vector::Zero(k);
  d.treatment_scales = Vector::Ones(k);
  d.outcome_means = Vector::Zero(p);
  d.outcome_scales = Vector::Ones(p);
  return d;
}

void require_analysis_shape(const Dataset& data) {
  if (data.num_treatments() < 3 || data.num_outcomes() < 3) {
    std::ostringstream msg;
    msg << "specificity analysis needs at least 3 treatments and 3 outcomes, got K="
        << data.num_treatments() << ", P=" << data.num_outcomes();
    throw InputError(msg.str());
  }
}

Dataset standardize(const Dataset& data) {
  Dataset out = data;
  Vector tm, ts, om, os;
  normalize_columns(out.treatments, tm, ts, true, data.treatment_names);
  normalize_columns(out.outcomes, om, os, true, data.outcome_names);
  // Compose with whatever was removed earlier so the bookkeeping stays relative
  // to the original units.
  out.treatment_means = data.treatment_means + data.treatment_scales.cwiseProduct(tm);
  out.treatment_scales = data.treatment_scales.cwiseProduct(ts);
  out.outcome_means = data.outcome_means + data.outcome_scales.cwiseProduct(om);
  out.outcome_scales = data.outcome_scales.cwiseProduct(os);
  out.standardized = true;
  out.centered = true;
  return out;
}

Dataset center(const Dataset& data) {
  Dataset out = data;
  Vector tm, ts, om, os;
  normalize_columns(out.treatments, tm, ts, false, data.treatment_names);
  normalize_columns(out.outcomes, om, os, false, data.outcome_names);
  out.treatment_means = data.treatment_means + data.treatment_scales.cwiseProduct(tm);
  out.outcome_means = data.outcome_means + data.outcome_scales.cwiseProduct(om);
  out.centered = true;
  return out;
}

Dataset select_rows(const Dataset& data, std::span<const Index> rows) {
  const auto m = static_cast<Index>(rows.size());
  Matrix x(m, data.num_treatments());
  Matrix y(m, data.num_outcomes());
  for (Index r = 0; r < m; ++r) {
    x.row(r) = data.treatments.row(rows[static_cast<std::size_t>(r)]);
    y.row(r) = data.outcomes.row(rows[static_cast<std::size_t>(r)]);
  }
  return Dataset::make(std::move(x), std::move(y), data.treatment_names, data.outcome_names);
}

namespace {

struct GramFactor {
  Eigen::LLT<Matrix> llt;
  double condition = 0.0;
};

GramFactor factor_gram(const Dataset& data, const FitOptions& options) {
  const Index k = data.num_treatments();
  Matrix gram = Matrix::Zero(k, k);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(data.treatments.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& ev = eig.eigenvalues();  // ascending
  const double lmin = ev(0);
  const double lmax = ev(k - 1);
  if (!(lmax > 0.0) || !(lmin > lmax * 1e-14 * static_cast<double>(k))) {
    // Name the columns that load on the null direction.
    const Vector v = eig.eigenvectors().col(0).cwiseAbs();
    const double vmax = v.maxCoeff();
    std::ostringstream msg;
    msg << "treatment Gram matrix is singular; collinear columns:";
    for (Index j = 0; j < k; ++j) {
      if (v(j) >= 0.3 * vmax) msg << ' ' << data.treatment_names[static_cast<std::size_t>(j)];
    }
    throw SingularGram(msg.str());
  }
  GramFactor f;
  f.condition = lmax / lmin;
  if (f.condition > options.max_condition) {
    std::ostringstream msg;
    msg << "treatment Gram matrix condition number " << f.condition << " exceeds cap "
        << options.max_condition;
    throw IllConditioned(f.condition, msg.str());
  }
  f.llt.compute(gram);
  if (f.llt.info() != Eigen::Success) throw SingularGram("Cholesky factorization of Gram matrix failed");
  return f;
}

}  // namespace

GammaMatrix fit_gamma(const Dataset& data, const FitOptions& options) {
  const GramFactor f = factor_gram(data, options);
  GammaMatrix g;
  g.values = f.llt.solve(data.treatments.transpose() * data.outcomes);
  if (!g.values.allFinite()) throw SingularGram("non-finite regression coefficients");
  g.n = static_cast<std::size_t>(data.rows());
  g.gram_condition = f.condition;
  return g;
}

OlsInference ols_inference(const Dataset& data, const FitOptions& options) {
  const GramFactor f = factor_gram(data, options);
  OlsInference out;
  out.gamma.values = f.llt.solve(data.treatments.transpose() * data.outcomes);
  out.gamma.n = static_cast<std::size_t>(data.rows());
  out.gamma.gram_condition = f.condition;

  const Index n = data.rows();
  const Index k = data.num_treatments();
  const double dof = static_cast<double>(n - k - (data.centered ? 1 : 0));
  if (dof < 1.0) throw InputError("not enough rows for residual degrees of freedom");
  out.degrees_of_freedom = dof;

  const Matrix resid = data.outcomes - data.treatments * out.gamma.values;
  const Vector sigma2 = resid.colwise().squaredNorm().transpose() / dof;
  const Vector inv_diag = f.llt.solve(Matrix::Identity(k, k)).diagonal();

  boost::math::students_t dist(dof);
  out.standard_errors.resize(k, data.num_outcomes());
  out.p_values.resize(k, data.num_outcomes());
  for (Index p = 0; p < data.num_outcomes(); ++p) {
    for (Index j = 0; j < k; ++j) {
      const double se = std::sqrt(sigma2(p) * inv_diag(j));
      out.standard_errors(j, p) = se;
      if (se > 0.0) {
        const double t = std::abs(out.gamma.values(j, p)) / se;
        out.p_values(j, p) = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
      } else {
        out.p_values(j, p) = out.gamma.values(j, p) == 0.0 ? 1.0 : 0.0;
      }
    }
  }
  return out;
}

}  // namespace spectool
