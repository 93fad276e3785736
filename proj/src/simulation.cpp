#include "spectool/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <random>
#include <sstream>

#include "spectool/errors.hpp"
#include "spectool/parallel.hpp"

namespace spectool {
namespace {

constexpr Index kTreatments = 5;
constexpr Index kOutcomes = 8;

// Compound-symmetric covariance: 2 on the diagonal, 1 elsewhere.
Matrix exchangeable(Index dim) { return Matrix::Ones(dim, dim) + Matrix::Identity(dim, dim); }

void check_reps(std::size_t reps, std::size_t n, const ScenarioConfig& config) {
  if (reps < 1) throw InputError("experiments need at least one replicate");
  if (n < static_cast<std::size_t>(config.num_treatments() + config.num_outcomes())) {
    throw InputError("sample size must be at least K + P");
  }
}

void check_failures(std::size_t failures, std::size_t reps, double max_fraction) {
  if (static_cast<double>(failures) > max_fraction * static_cast<double>(reps)) {
    std::ostringstream msg;
    msg << failures << " of " << reps << " simulation replicates failed";
    throw ReplicateFailure(msg.str());
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  const Index k = num_treatments();
  const Index p = num_outcomes();
  if (zeta.size() != k || sigma_x.rows() != k || sigma_x.cols() != k || sigma_y.rows() != p ||
      sigma_y.cols() != p || alpha.size() != p) {
    throw InputError("scenario '" + name + "': inconsistent dimensions");
  }
  for (const Matrix* s : {&sigma_x, &sigma_y}) {
    if (!s->isApprox(s->transpose()) || Eigen::LLT<Matrix>(*s).info() != Eigen::Success) {
      throw InputError("scenario '" + name + "': covariance is not symmetric positive definite");
    }
  }
  if (alpha(0) != 1.0) throw InputError("scenario '" + name + "': alpha[0] must be 1");
}

ScenarioConfig scenario_config(ScenarioKind which, double perturbation, PerturbationSigns signs) {
  ScenarioConfig c;
  c.sigma_x = exchangeable(kTreatments);
  c.sigma_y = exchangeable(kOutcomes);
  c.alpha = Vector::Ones(kOutcomes);
  c.beta = Matrix::Zero(kTreatments, kOutcomes);
  // Stand-in effect pattern: one cause per outcome, at most two effects per treatment.
  c.active = {{0, 0}, {0, 1}, {1, 2}, {1, 3}, {2, 4}, {2, 5}, {4, 6}, {3, 7}};
  for (const auto& a : c.active) c.beta(a.treatment, a.outcome) = 1.0;

  switch (which) {
    case ScenarioKind::I:
    case ScenarioKind::Sensitivity:
      c.zeta.resize(kTreatments);
      c.zeta << 0.4, 0.4, 0.4, 0.4, 2.0;
      break;
    case ScenarioKind::II:
      c.zeta.resize(kTreatments);
      c.zeta << 0.4, 0.4, 2.0, 1.5, 0.4;
      break;
  }

  if (which == ScenarioKind::I) {
    c.name = "I";
  } else if (which == ScenarioKind::II) {
    c.name = "II";
    // Causal effect of X3 on Y5 offsets its confounding bias exactly.
    const Vector delta = population_delta(c);
    c.beta(2, 4) = -delta(2) * c.alpha(4);
  } else {
    c.name = "sensitivity";
    double sign = 1.0;
    for (Index i = 0; i < kTreatments; ++i) {
      for (Index j = 0; j < kOutcomes; ++j) {
        if ((i == 0 || j == 0) && c.beta(i, j) == 0.0) {
          c.beta(i, j) = sign * perturbation;
          c.perturbed.push_back({i, j});
          if (signs == PerturbationSigns::Alternating) sign = -sign;
        }
      }
    }
  }
  c.validate();
  return c;
}

ScenarioKind parse_scenario(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "i" || lower == "1") return ScenarioKind::I;
  if (lower == "ii" || lower == "2") return ScenarioKind::II;
  if (lower == "sensitivity") return ScenarioKind::Sensitivity;
  throw InputError("unknown scenario '" + std::string(name) + "' (expected I, II or sensitivity)");
}

Vector population_delta(const ScenarioConfig& config) {
  const Matrix second_moment = config.sigma_x + config.zeta * config.zeta.transpose();
  Eigen::LLT<Matrix> llt(second_moment);
  if (llt.info() != Eigen::Success) throw SingularGram("Sigma_X + zeta zeta' is not positive definite");
  return llt.solve(config.zeta);
}

GammaMatrix population_gamma(const ScenarioConfig& config) {
  GammaMatrix g;
  g.values = config.beta + population_delta(config) * config.alpha.transpose();
  const Matrix second_moment = config.sigma_x + config.zeta * config.zeta.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(second_moment, Eigen::EigenvaluesOnly);
  g.gram_condition = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  return g;
}

Dataset generate(const ScenarioConfig& config, std::size_t n, std::uint64_t seed) {
  const Index k = config.num_treatments();
  const Index p = config.num_outcomes();
  const auto rows = static_cast<Index>(n);
  const Matrix lx = Eigen::LLT<Matrix>(config.sigma_x).matrixL();
  const Matrix ly = Eigen::LLT<Matrix>(config.sigma_y).matrixL();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = normal(rng);
    return m;
  };
  const Vector u = draw(rows, 1);
  const Matrix ex = draw(rows, k);
  const Matrix ey = draw(rows, p);

  Matrix x = u * config.zeta.transpose() + ex * lx.transpose();
  Matrix y = x * config.beta + u * config.alpha.transpose() + ey * ly.transpose();
  return Dataset::make(std::move(x), std::move(y));
}

Matrix nc_estimate(const Matrix& gamma, std::span<const PairIndex> nc_per_outcome) {
  if (static_cast<Index>(nc_per_outcome.size()) != gamma.cols()) {
    throw InputError("negative-control assignment must name one pair per outcome");
  }
  Matrix out(gamma.rows(), gamma.cols());
  for (Index j = 0; j < gamma.cols(); ++j) {
    const PairIndex nc = nc_per_outcome[static_cast<std::size_t>(j)];
    const double denom = gamma(nc.treatment, nc.outcome);
    for (Index i = 0; i < gamma.rows(); ++i) {
      out(i, j) = gamma(i, j) - gamma(i, nc.outcome) * gamma(nc.treatment, j) / denom;
    }
  }
  return out;
}

std::vector<PairIndex> default_nc_assignment(Index num_outcomes) {
  std::vector<PairIndex> nc;
  for (Index j = 0; j < num_outcomes; ++j) {
    nc.push_back(j < 4 ? PairIndex{4, 4} : PairIndex{0, 3});
  }
  return nc;
}

std::string to_string(TestMethod m) {
  switch (m) {
    case TestMethod::SpcTest: return "spc_test";
    case TestMethod::PvalueOls: return "pvalue_ols";
    case TestMethod::Bspc: return "bspc";
  }
  return "unknown";
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::Ols: return "ols";
    case Estimator::Spc: return "spc";
    case Estimator::NcOracle: return "nc_oracle";
  }
  return "unknown";
}

ExperimentResult power_experiment(const ScenarioConfig& config, std::size_t n, std::size_t reps,
                                  std::span<const TestMethod> methods, const PowerOptions& options,
                                  std::uint64_t seed) {
  check_reps(reps, n, config);
  if (options.eta_grid.empty()) throw InputError("eta grid is empty");
  const Index k = config.num_treatments();
  const Index p = config.num_outcomes();
  const std::size_t n_eta = options.eta_grid.size();

  // Per replicate, per method: one 0/1 decision matrix per eta.
  using Decisions = std::map<TestMethod, std::vector<Matrix>>;
  std::vector<std::optional<Decisions>> per_rep(reps);
  ScoringConfig scoring;
  scoring.tau_override = options.tau;

  parallel_for(
      reps,
      [&](std::size_t r) {
        try {
          const Dataset raw = generate(config, n, replicate_seed(seed, r));
          const Dataset data = options.raw_scale ? center(raw) : standardize(raw);
          Decisions d;
          for (TestMethod m : methods) {
            auto& out = d[m];
            if (m == TestMethod::PvalueOls) {
              const OlsInference inf = ols_inference(data);
              out.push_back((inf.p_values.array() < options.significance).cast<double>().matrix());
            } else if (m == TestMethod::SpcTest) {
              const GammaMatrix g = fit_gamma(data);
              for (double eta : options.eta_grid) {
                ScoringConfig sc = scoring;
                sc.eta = eta;
                out.push_back(score_all_pairs(g, sc).decisions());
              }
            } else {
              for (double eta : options.eta_grid) {
                ScoringConfig sc = scoring;
                sc.eta = eta;
                BootstrapOptions bo = options.bspc;
                bo.seed = replicate_seed(seed ^ 0xb5bULL, r);
                bo.threads = 1;
                out.push_back(bootstrap_grid(data, sc, bo).decisions);
              }
            }
          }
          per_rep[r] = std::move(d);
        } catch (const NumericalError&) {
        } catch (const ConstantColumn&) {
        }
      },
      options.threads);

  ExperimentResult res;
  res.scenario = config.name;
  res.n = n;
  res.reps = reps;
  res.seed = seed;
  res.tau = options.tau;
  res.eta_grid = options.eta_grid;
  res.beta = config.beta;
  for (std::size_t r = 0; r < reps; ++r) res.replicate_seeds.push_back(replicate_seed(seed, r));

  std::size_t kept = 0;
  for (TestMethod m : methods) {
    const std::size_t slots = m == TestMethod::PvalueOls ? 1 : n_eta;
    res.rejection[to_string(m)] = std::vector<Matrix>(slots, Matrix::Zero(k, p));
  }
  for (const auto& d : per_rep) {
    if (!d) {
      ++res.failures;
      continue;
    }
    ++kept;
    for (const auto& [m, mats] : *d) {
      auto& acc = res.rejection[to_string(m)];
      for (std::size_t e = 0; e < mats.size(); ++e) acc[e] += mats[e];
    }
  }
  check_failures(res.failures, reps, options.max_failure_fraction);
  for (auto& [name, mats] : res.rejection) {
    for (auto& m : mats) m /= static_cast<double>(kept);
  }
  return res;
}

ExperimentResult bias_experiment(const ScenarioConfig& config, std::size_t n, std::size_t reps,
                                 std::span<const Estimator> estimators, std::uint64_t seed,
                                 const BiasOptions& options) {
  check_reps(reps, n, config);
  const std::vector<PairIndex> nc = options.nc_assignment.empty()
                                        ? default_nc_assignment(config.num_outcomes())
                                        : options.nc_assignment;
  using Errors = std::map<Estimator, Matrix>;
  std::vector<std::optional<Errors>> per_rep(reps);

  parallel_for(
      reps,
      [&](std::size_t r) {
        try {
          const Dataset data = center(generate(config, n, replicate_seed(seed, r)));
          const GammaMatrix g = fit_gamma(data);
          Errors e;
          for (Estimator est : estimators) {
            switch (est) {
              case Estimator::Ols: e[est] = g.values - config.beta; break;
              case Estimator::Spc: e[est] = spc_estimate(g, options.spc).beta - config.beta; break;
              case Estimator::NcOracle: e[est] = nc_estimate(g.values, nc) - config.beta; break;
            }
          }
          per_rep[r] = std::move(e);
        } catch (const NumericalError&) {
        }
      },
      options.threads);

  ExperimentResult res;
  res.scenario = config.name;
  res.n = n;
  res.reps = reps;
  res.seed = seed;
  res.beta = config.beta;
  for (std::size_t r = 0; r < reps; ++r) res.replicate_seeds.push_back(replicate_seed(seed, r));

  const Index k = config.num_treatments();
  const Index p = config.num_outcomes();
  for (Estimator est : estimators) {
    res.bias[to_string(est)] = Matrix::Zero(k, p);
    res.mean_abs_error[to_string(est)] = Matrix::Zero(k, p);
  }
  std::size_t kept = 0;
  for (const auto& e : per_rep) {
    if (!e) {
      ++res.failures;
      continue;
    }
    ++kept;
    for (const auto& [est, err] : *e) {
      res.bias[to_string(est)] += err;
      res.mean_abs_error[to_string(est)] += err.cwiseAbs();
    }
  }
  check_failures(res.failures, reps, options.max_failure_fraction);
  for (auto& [name, m] : res.bias) m /= static_cast<double>(kept);
  for (auto& [name, m] : res.mean_abs_error) m /= static_cast<double>(kept);
  return res;
}

}  // namespace spectool
