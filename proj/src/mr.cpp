#include "spectool/mr.hpp"

#include <sstream>

#include "spectool/errors.hpp"

namespace spectool {
namespace {

std::vector<std::string> fill_names(std::vector<std::string> names, const char* prefix, Index count,
                                    const char* what) {
  if (names.empty()) {
    for (Index i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i + 1));
  }
  if (static_cast<Index>(names.size()) != count) {
    throw InputError(std::string(what) + " name count does not match the matrix");
  }
  return names;
}

}  // namespace

MrSummary MrSummary::make(Matrix gamma_zy, Matrix delta_zx, std::vector<std::string> instrument_names,
                          std::vector<std::string> exposure_names,
                          std::vector<std::string> outcome_names) {
  if (gamma_zy.rows() != delta_zx.rows()) {
    throw InputError("instrument-outcome and instrument-exposure tables have different instrument counts");
  }
  if (delta_zx.rows() < delta_zx.cols()) {
    std::ostringstream msg;
    msg << "need at least as many instruments as exposures (L=" << delta_zx.rows()
        << ", K=" << delta_zx.cols() << ")";
    throw InputError(msg.str());
  }
  if (delta_zx.cols() < 1 || gamma_zy.cols() < 1) throw InputError("empty summary tables");
  if (!gamma_zy.allFinite() || !delta_zx.allFinite()) throw InputError("summary statistics contain non-finite values");

  MrSummary s;
  s.instrument_names = fill_names(std::move(instrument_names), "Z", delta_zx.rows(), "instrument");
  s.exposure_names = fill_names(std::move(exposure_names), "X", delta_zx.cols(), "exposure");
  s.outcome_names = fill_names(std::move(outcome_names), "Y", gamma_zy.cols(), "outcome");
  s.gamma_zy = std::move(gamma_zy);
  s.delta_zx = std::move(delta_zx);
  return s;
}

GammaMatrix mr_reduce(const MrSummary& summary) {
  Eigen::ColPivHouseholderQR<Matrix> qr(summary.delta_zx);
  const Index k = summary.delta_zx.cols();
  if (qr.rank() < k) {
    std::ostringstream msg;
    msg << "instrument-exposure matrix has column rank " << qr.rank() << " < " << k;
    throw RankDeficient(msg.str());
  }
  GammaMatrix g;
  g.values = qr.solve(summary.gamma_zy);
  const Vector sv = Eigen::JacobiSVD<Matrix>(summary.delta_zx).singularValues();
  const double ratio = sv(0) / sv(k - 1);
  g.gram_condition = ratio * ratio;
  return g;
}

}  // namespace spectool
