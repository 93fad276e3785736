#include "spectool/estimation.hpp"

#include <cmath>
#include <sstream>

#include "spectool/errors.hpp"
#include "spectool/parallel.hpp"

namespace spectool {

CausalPattern CausalPattern::from_effects(const Matrix& beta, double tol) {
  CausalPattern p;
  p.support = (beta.array().abs() > tol).matrix();
  return p;
}

namespace {

// |A| <= (N-1)/2 written without division so odd/even N are exact.
bool within_half(std::size_t count, std::size_t n) { return 2 * count + 1 <= n; }

}  // namespace

IdentificationCheck check_identification(const CausalPattern& pattern) {
  const Index k = pattern.num_treatments();
  const Index p = pattern.num_outcomes();
  IdentificationCheck out;
  for (Index a = 0; a < p; ++a) {
    for (Index b = a; b < p; ++b) {
      const auto causes = static_cast<std::size_t>((pattern.support.col(a).array() || pattern.support.col(b).array()).count());
      if (!within_half(causes, static_cast<std::size_t>(k))) {
        std::ostringstream msg;
        msg << "outcomes " << a << " and " << b << " have " << causes << " distinct causes (limit "
            << (k - 1) / 2.0 << ")";
        out.violations.push_back(msg.str());
      }
    }
  }
  for (Index i = 0; i < k; ++i) {
    const auto effects = static_cast<std::size_t>(pattern.support.row(i).count());
    if (!within_half(effects, static_cast<std::size_t>(p))) {
      std::ostringstream msg;
      msg << "treatment " << i << " affects " << effects << " outcomes (limit " << (p - 1) / 2.0 << ")";
      out.violations.push_back(msg.str());
    }
  }
  out.ok = out.violations.empty();
  return out;
}

bool check_partial_identification(const CausalPattern& pattern, std::span<const Index> treatments,
                                  std::span<const Index> outcomes) {
  if (treatments.empty() || outcomes.empty()) throw InputError("identification subsets must be nonempty");
  for (Index t : treatments)
    if (t < 0 || t >= pattern.num_treatments()) throw InputError("treatment index out of range");
  for (Index o : outcomes)
    if (o < 0 || o >= pattern.num_outcomes()) throw InputError("outcome index out of range");

  for (std::size_t a = 0; a < outcomes.size(); ++a) {
    for (std::size_t b = a; b < outcomes.size(); ++b) {
      std::size_t causes = 0;
      for (Index t : treatments) {
        causes += (pattern.support(t, outcomes[a]) || pattern.support(t, outcomes[b])) ? 1 : 0;
      }
      if (!within_half(causes, treatments.size())) return false;
    }
  }
  for (Index t : treatments) {
    std::size_t effects = 0;
    for (Index o : outcomes) effects += pattern.support(t, o) ? 1 : 0;
    if (!within_half(effects, outcomes.size())) return false;
  }
  return true;
}

namespace {

std::vector<double> to_std(const Eigen::Ref<const Vector>& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

SpcEstimate spc_estimate(const GammaMatrix& gamma, const SpcOptions& options) {
  const Matrix& g = gamma.values;
  const Index k = g.rows();
  const Index p = g.cols();
  const Index a = options.anchor_outcome;
  if (k < 3 || p < 3) throw InputError("SPC estimation needs at least 3 treatments and 3 outcomes");
  if (a < 0 || a >= p) throw InputError("anchor outcome out of range");
  if (!g.allFinite()) throw InputError("Gamma has non-finite entries");

  SpcEstimate est;
  est.anchor_outcome = a;
  if (options.selection_threshold) {
    est.selection_threshold = *options.selection_threshold;
  } else if (gamma.n) {
    if (*gamma.n < 2) throw InputError("SPC estimation needs n >= 2");
    const auto n = static_cast<double>(*gamma.n);
    est.selection_threshold = std::log(n) / n;
  } else {
    est.selection_threshold = options.population_threshold;
  }
  const double thr = est.selection_threshold;

  // Confounding: robust loadings.
  const auto h_alpha = static_cast<std::size_t>(k / 2 + 1);
  const auto h_delta = static_cast<std::size_t>(p / 2 + 1);
  const std::vector<double> anchor_col = to_std(g.col(a));
  est.alpha_lts = Vector::Ones(p);
  for (Index j = 0; j < p; ++j) {
    if (j == a) continue;
    const std::vector<double> ys = to_std(g.col(j));
    const LtsFit fit = lts_line_fit(anchor_col, ys, h_alpha, options.lts);
    est.alpha_lts(j) = fit.slope;
    est.approximate = est.approximate || !fit.exact;
  }
  const std::vector<double> alpha_xs = to_std(est.alpha_lts);
  est.delta_lts.resize(k);
  for (Index i = 0; i < k; ++i) {
    const Vector row = g.row(i).transpose();
    const LtsFit fit = lts_line_fit(alpha_xs, to_std(row), h_delta, options.lts);
    est.delta_lts(i) = fit.slope;
    est.approximate = est.approximate || !fit.exact;
  }

  // Causation.
  est.beta_lts = g - est.delta_lts * est.alpha_lts.transpose();
  const auto is_null = [&](Index i, Index j) { return est.beta_lts(i, j) * est.beta_lts(i, j) < thr; };

  // Correction: alpha_p from rows null in both column p and the anchor,
  // where Gamma_kp = Gamma_k,anchor * alpha_p holds exactly.
  est.alpha = est.alpha_lts;
  est.null_sets_alpha.assign(static_cast<std::size_t>(p), {});
  for (Index j = 0; j < p; ++j) {
    auto& set = est.null_sets_alpha[static_cast<std::size_t>(j)];
    for (Index i = 0; i < k; ++i) {
      if (is_null(i, j) && is_null(i, a)) set.push_back(i);
    }
    if (j == a) continue;
    double sxx = 0.0, sxy = 0.0;
    for (Index i : set) {
      sxx += g(i, a) * g(i, a);
      sxy += g(i, a) * g(i, j);
    }
    if (sxx > 0.0) {
      est.alpha(j) = sxy / sxx;
    } else {
      std::ostringstream msg;
      msg << "empty selection for alpha of outcome " << j << "; kept the LTS value";
      est.warnings.push_back(msg.str());
    }
  }

  est.delta = est.delta_lts;
  est.null_sets_delta.assign(static_cast<std::size_t>(k), {});
  for (Index i = 0; i < k; ++i) {
    auto& set = est.null_sets_delta[static_cast<std::size_t>(i)];
    double sxx = 0.0, sxy = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (!is_null(i, j)) continue;
      set.push_back(j);
      sxx += est.alpha(j) * est.alpha(j);
      sxy += est.alpha(j) * g(i, j);
    }
    if (sxx > 0.0) {
      est.delta(i) = sxy / sxx;
    } else {
      std::ostringstream msg;
      msg << "empty selection for delta of treatment " << i << "; kept the LTS value";
      est.warnings.push_back(msg.str());
    }
  }

  est.beta = g - est.delta * est.alpha.transpose();
  return est;
}

Matrix bootstrap_stderr(const Dataset& data, const BootstrapOptions& bootstrap,
                        const SpcOptions& options) {
  if (bootstrap.replicates < 100) throw InputError("bootstrap needs at least 100 replicates");
  std::vector<std::optional<Matrix>> betas(bootstrap.replicates);
  parallel_for(
      bootstrap.replicates,
      [&](std::size_t b) {
        auto rng = replicate_engine(bootstrap.seed, b);
        try {
          betas[b] = spc_estimate(fit_gamma(resample_dataset(data, rng), bootstrap.fit), options).beta;
        } catch (const NumericalError&) {
        } catch (const ConstantColumn&) {
        }
      },
      bootstrap.threads);

  std::size_t kept = 0;
  Matrix sum = Matrix::Zero(data.num_treatments(), data.num_outcomes());
  for (const auto& b : betas) {
    if (!b) continue;
    ++kept;
    sum += *b;
  }
  const std::size_t dropped = bootstrap.replicates - kept;
  if (static_cast<double>(dropped) > bootstrap.max_drop_fraction * static_cast<double>(bootstrap.replicates)) {
    std::ostringstream msg;
    msg << "bootstrap: " << dropped << " of " << bootstrap.replicates << " replicates failed";
    throw ReplicateFailure(msg.str());
  }
  const Matrix mean = sum / static_cast<double>(kept);
  Matrix ss = Matrix::Zero(mean.rows(), mean.cols());
  for (const auto& b : betas) {
    if (b) ss += (*b - mean).array().square().matrix();
  }
  return (ss / static_cast<double>(kept - 1)).cwiseSqrt();
}

}  // namespace spectool
