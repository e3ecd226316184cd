#include "richspec/importance.hpp"

#include "richspec/error.hpp"

#include <algorithm>
#include <cmath>

namespace richspec {

namespace {

// Residual of v after least squares on [1, controls].
Eigen::VectorXd residualize(const Eigen::VectorXd& v, const Eigen::MatrixXd& controls) {
  Eigen::MatrixXd A(v.size(), controls.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(controls.cols()) = controls;
  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(v);
  return v - A * beta;
}

}  // namespace

double partial_correlation(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, Eigen::Index j) {
  const Eigen::Index n = T.rows();
  const Eigen::Index k = T.cols();
  if (y.size() != n) throw ValidationError("response length does not match row count");
  if (j < 0 || j >= k) throw ConfigError("component index out of range");
  if (n < k + 2) throw ConfigError("partial correlation needs n >= k + 2");

  Eigen::MatrixXd controls(n, k - 1);
  for (Eigen::Index c = 0, at = 0; c < k; ++c) {
    if (c != j) controls.col(at++) = T.col(c);
  }
  const Eigen::VectorXd tj = T.col(j);
  const Eigen::VectorXd rt = residualize(tj, controls);
  const Eigen::VectorXd ry = residualize(y, controls);
  const double var_t = (tj.array() - tj.mean()).square().sum();
  const double var_y = (y.array() - y.mean()).square().sum();
  if (!(var_t > 0.0) || !(var_y > 0.0) || rt.squaredNorm() <= 1e-20 * var_t ||
      ry.squaredNorm() <= 1e-20 * var_y) {
    throw NumericalError("degenerate partial correlation for component " + std::to_string(j + 1));
  }
  // Residuals of a fit with intercept have zero mean.
  const double r = rt.dot(ry) / std::sqrt(rt.squaredNorm() * ry.squaredNorm());
  return std::clamp(r, -1.0, 1.0);
}

Eigen::VectorXd partial_correlations(const Eigen::MatrixXd& T, const Eigen::VectorXd& y) {
  Eigen::VectorXd p(T.cols());
  for (Eigen::Index j = 0; j < T.cols(); ++j) p(j) = partial_correlation(T, y, j);
  return p;
}

ImportanceProfile band_importance(const ComponentModel& model, const Eigen::VectorXd& partials) {
  if (partials.size() != model.k()) {
    throw ConfigError("expected " + std::to_string(model.k()) + " partial correlations, got " +
                      std::to_string(partials.size()));
  }
  ImportanceProfile prof;
  prof.method = model.method;
  prof.k_used = model.k();
  prof.raw = (model.W.array().rowwise() * partials.transpose().array()).matrix().rowwise().norm();
  const double total = prof.raw.sum();
  if (!(total > 0.0)) throw NumericalError("uninformative model: all band importances are zero");
  prof.normalized = prof.raw / total;
  return prof;
}

ImportanceProfile importance_report(const Dataset& d, Method method, Eigen::Index k,
                                    const ExtractionOptions& opt) {
  require_valid(d);
  const ComponentModel model = fit_extractor(method, d.X, d.y, k, opt);
  const Eigen::MatrixXd T = transform(model, d.X);
  ImportanceProfile prof = band_importance(model, partial_correlations(T, d.y));
  prof.band_centers_nm = d.grid.centers_nm;
  return prof;
}

ImportanceSpread importance_cv(const Dataset& d, Method method, Eigen::Index k,
                               const CVConfig& cfg, const ExtractionOptions& opt) {
  const auto folds = extract_fold_features(d, method, k, opt, cfg);
  const Eigen::Index m = d.bands();
  Eigen::MatrixXd profiles(m, static_cast<Eigen::Index>(folds.size()));
  for (std::size_t i = 0; i < folds.size(); ++i) {
    Eigen::VectorXd ytr(static_cast<Eigen::Index>(folds[i].train.size()));
    for (std::size_t r = 0; r < folds[i].train.size(); ++r) {
      ytr(static_cast<Eigen::Index>(r)) = d.y(folds[i].train[r]);
    }
    profiles.col(static_cast<Eigen::Index>(i)) =
        band_importance(folds[i].extractor, partial_correlations(folds[i].T_train, ytr)).normalized;
  }
  ImportanceSpread s;
  s.band_centers_nm = d.grid.centers_nm;
  s.folds = static_cast<int>(folds.size());
  s.mean = profiles.rowwise().mean();
  const double denom = static_cast<double>(std::max<Eigen::Index>(profiles.cols() - 1, 1));
  s.sd = ((profiles.colwise() - s.mean).array().square().rowwise().sum() / denom).sqrt();
  return s;
}

}  // namespace richspec
