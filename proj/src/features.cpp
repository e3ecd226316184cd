#include "richspec/features.hpp"

#include "richspec/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace richspec {

std::string to_string(Method m) {
  switch (m) {
    case Method::PCA: return "pca";
    case Method::CCA: return "cca";
    case Method::PLS: return "pls";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "pca") return Method::PCA;
  if (t == "cca") return Method::CCA;
  if (t == "pls") return Method::PLS;
  throw ConfigError("unknown extraction method '" + s + "' (expected pca, cca or pls)");
}

namespace {

constexpr double kConditionLimit = 1e10;
constexpr double kRidgeFactor = 1e-8;

struct Centered {
  Eigen::MatrixXd Xc;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
};

Centered center(const Eigen::MatrixXd& X, const ExtractionOptions& opt) {
  if (!X.allFinite()) throw ValidationError("non-finite value in feature matrix");
  Centered c;
  c.mean = X.colwise().mean().transpose();
  c.Xc = X.rowwise() - c.mean.transpose();
  c.scale = Eigen::VectorXd::Ones(X.cols());
  if (opt.scale_columns) {
    const double denom = static_cast<double>(std::max<Eigen::Index>(X.rows() - 1, 1));
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double sd = std::sqrt(c.Xc.col(j).squaredNorm() / denom);
      if (sd > 0.0) c.scale(j) = sd;
    }
    c.Xc = c.Xc.array().rowwise() / c.scale.transpose().array();
  }
  return c;
}

void check_k(Eigen::Index n, Eigen::Index m, Eigen::Index k) {
  if (k < 1) throw ConfigError("component count must be >= 1");
  if (k > std::min(n - 1, m)) {
    throw NumericalError("insufficient rank: k=" + std::to_string(k) + " exceeds min(n-1, m)=" +
                         std::to_string(std::min(n - 1, m)));
  }
}

Eigen::VectorXd score_variances(const Eigen::MatrixXd& T) {
  const double denom = static_cast<double>(std::max<Eigen::Index>(T.rows() - 1, 1));
  return T.colwise().squaredNorm().transpose() / denom;
}

// Direction maximizing corr(X w, y) for the current (deflated) X: the ridge
// least-squares coefficient vector. Ill-conditioned systems get gamma * I.
Eigen::VectorXd cca_direction(const Eigen::MatrixXd& Xj, const Eigen::VectorXd& yc,
                              double gamma) {
  const Eigen::Index n = Xj.rows();
  const Eigen::Index m = Xj.cols();
  if (n >= m) {
    const Eigen::MatrixXd A = Xj.transpose() * Xj;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const double lo = ev.minCoeff();
    const double hi = ev.maxCoeff();
    const bool ill = !(lo > 0.0) || hi / lo > kConditionLimit;
    const double g = ill ? gamma : 0.0;
    const Eigen::VectorXd rhs = es.eigenvectors().transpose() * (Xj.transpose() * yc);
    return es.eigenvectors() * (rhs.array() / (ev.array() + g)).matrix();
  }
  // n < m: X^T X is singular, so the ridge always applies. The dual form
  // keeps the solution inside the row space of X.
  Eigen::MatrixXd G = Xj * Xj.transpose();
  G.diagonal().array() += gamma;
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw NumericalError("CCA ridge system not positive definite");
  return Xj.transpose() * llt.solve(yc);
}

// Leading right singular vector, largest-magnitude entry positive.
Eigen::VectorXd leading_direction(const Eigen::MatrixXd& Xj) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Xj, Eigen::ComputeThinV);
  Eigen::VectorXd w = svd.matrixV().col(0);
  Eigen::Index at = 0;
  w.cwiseAbs().maxCoeff(&at);
  return w(at) < 0.0 ? Eigen::VectorXd(-w) : w;
}

ComponentModel fit_supervised(Method method, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              Eigen::Index k, const ExtractionOptions& opt) {
  const Eigen::Index n = X.rows();
  const Eigen::Index m = X.cols();
  if (y.size() != n) throw ValidationError("response length does not match row count");
  if (n < 3) throw ConfigError("at least 3 samples are required");
  check_k(n, m, k);
  if (!y.allFinite()) throw ValidationError("non-finite response value");

  Centered c = center(X, opt);
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;
  const double y_norm = yc.norm();
  if (!(y_norm > 0.0)) throw NumericalError("zero response variance");
  const double x_norm = c.Xc.norm();
  if (!(x_norm > 0.0)) throw NumericalError("zero variance");

  const double gamma = kRidgeFactor * c.Xc.squaredNorm() / static_cast<double>(m);

  Eigen::MatrixXd Xj = c.Xc;
  Eigen::MatrixXd Wd(m, k);  // directions in deflated space
  Eigen::MatrixXd P(m, k);   // loadings
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::VectorXd cov = Xj.transpose() * yc;
    Eigen::VectorXd w;
    if (cov.norm() > 1e-13 * x_norm * y_norm) {
      w = method == Method::PLS ? cov : cca_direction(Xj, yc, gamma);
    } else if (j == 0) {
      throw NumericalError("degenerate direction at component 1");
    } else {
      // Earlier components already explain y, so every remaining direction
      // scores zero; take the largest-variance one.
      w = leading_direction(Xj);
    }
    const double wn = w.norm();
    if (!(wn > 0.0) || !w.allFinite()) {
      throw NumericalError("degenerate direction at component " + std::to_string(j + 1));
    }
    w /= wn;
    const Eigen::VectorXd t = Xj * w;
    const double tt = t.squaredNorm();
    if (tt <= 1e-24 * x_norm * x_norm) {
      throw NumericalError("insufficient rank at component " + std::to_string(j + 1));
    }
    const Eigen::VectorXd p = Xj.transpose() * t / tt;
    Xj.noalias() -= t * p.transpose();
    Wd.col(j) = w;
    P.col(j) = p;
  }

  // Rotation onto the undeflated centred matrix: T = Xc * Wd (P^T Wd)^-1.
  const Eigen::MatrixXd PtW = P.transpose() * Wd;
  Eigen::MatrixXd R = PtW.transpose().partialPivLu().solve(Wd.transpose()).transpose();
  for (Eigen::Index j = 0; j < k; ++j) R.col(j).normalize();

  ComponentModel model;
  model.method = method;
  model.W = std::move(R);
  model.x_mean = std::move(c.mean);
  model.x_scale = std::move(c.scale);
  model.y_mean = y_mean;
  model.eigenvalues = score_variances(c.Xc * model.W);
  return model;
}

}  // namespace

ComponentModel fit_pca(const Eigen::MatrixXd& X, Eigen::Index k, const ExtractionOptions& opt) {
  const Eigen::Index n = X.rows();
  const Eigen::Index m = X.cols();
  if (n < 2) throw ConfigError("at least 2 samples are required");
  check_k(n, m, k);

  Centered c = center(X, opt);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(c.Xc, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (!(s(0) > 0.0)) throw NumericalError("zero variance");
  const double tol = static_cast<double>(std::max(n, m)) * std::numeric_limits<double>::epsilon() * s(0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;
  if (k > rank) {
    throw NumericalError("insufficient rank: k=" + std::to_string(k) + " exceeds numerical rank " +
                         std::to_string(rank));
  }

  ComponentModel model;
  model.method = Method::PCA;
  model.W = svd.matrixV().leftCols(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::Index at = 0;
    model.W.col(j).cwiseAbs().maxCoeff(&at);
    if (model.W(at, j) < 0.0) model.W.col(j) *= -1.0;
  }
  model.eigenvalues = s.head(k).array().square() / static_cast<double>(n - 1);
  model.x_mean = std::move(c.mean);
  model.x_scale = std::move(c.scale);
  return model;
}

ComponentModel fit_cca(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::Index k,
                       const ExtractionOptions& opt) {
  return fit_supervised(Method::CCA, X, y, k, opt);
}

ComponentModel fit_pls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::Index k,
                       const ExtractionOptions& opt) {
  return fit_supervised(Method::PLS, X, y, k, opt);
}

ComponentModel fit_extractor(Method method, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             Eigen::Index k, const ExtractionOptions& opt) {
  switch (method) {
    case Method::PCA: return fit_pca(X, k, opt);
    case Method::CCA: return fit_cca(X, y, k, opt);
    case Method::PLS: return fit_pls(X, y, k, opt);
  }
  throw ConfigError("unknown extraction method");
}

Eigen::MatrixXd transform(const ComponentModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.bands()) {
    throw ValidationError("dimension mismatch: model expects " + std::to_string(model.bands()) +
                          " bands, got " + std::to_string(X.cols()));
  }
  const Eigen::MatrixXd Z =
      (X.rowwise() - model.x_mean.transpose()).array().rowwise() / model.x_scale.transpose().array();
  return Z * model.W;
}

std::vector<VarianceRow> variance_table(const ComponentModel& model, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd T = transform(model, X);
  const Eigen::MatrixXd Z =
      (X.rowwise() - model.x_mean.transpose()).array().rowwise() / model.x_scale.transpose().array();
  const double denom = static_cast<double>(std::max<Eigen::Index>(X.rows() - 1, 1));
  const double total = Z.squaredNorm() / denom;
  if (!(total > 0.0)) throw NumericalError("zero variance");
  const Eigen::VectorXd ev = score_variances(T);
  std::vector<VarianceRow> rows;
  double cumulative = 0.0;
  for (Eigen::Index j = 0; j < ev.size(); ++j) {
    const double pct = 100.0 * ev(j) / total;
    cumulative += pct;
    rows.push_back({static_cast<int>(j + 1), ev(j), pct, cumulative});
  }
  return rows;
}

}  // namespace richspec
