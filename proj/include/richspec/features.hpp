#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace richspec {

enum class Method { PCA, CCA, PLS };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct ExtractionOptions {
  /// Divide centred bands by their standard deviation before extraction.
  bool scale_columns = false;
};

/// Fitted linear extractor: scores are T = ((X - x_mean) / x_scale) * W.
///
/// Columns of W have unit norm and the training scores are mutually
/// orthogonal for all three methods. For PCA the columns are also orthonormal
/// and each is signed so its largest-magnitude entry is positive. For PLS and
/// CCA the sign is the one giving a positive score covariance with y, so the
/// first PLS column is exactly X_c^T y_c / |X_c^T y_c|.
struct ComponentModel {
  Method method = Method::PCA;
  Eigen::MatrixXd W;        ///< m x k
  Eigen::VectorXd x_mean;   ///< m
  Eigen::VectorXd x_scale;  ///< m, all ones unless scale_columns
  double y_mean = 0.0;      ///< CCA/PLS only
  Eigen::VectorXd eigenvalues;  ///< training variance of each score column

  Eigen::Index k() const noexcept { return W.cols(); }
  Eigen::Index bands() const noexcept { return W.rows(); }
};

ComponentModel fit_pca(const Eigen::MatrixXd& X, Eigen::Index k, const ExtractionOptions& opt = {});
ComponentModel fit_cca(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::Index k,
                       const ExtractionOptions& opt = {});
ComponentModel fit_pls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::Index k,
                       const ExtractionOptions& opt = {});

/// Dispatch on method; PCA ignores y.
ComponentModel fit_extractor(Method method, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             Eigen::Index k, const ExtractionOptions& opt = {});

Eigen::MatrixXd transform(const ComponentModel& model, const Eigen::MatrixXd& X);

struct VarianceRow {
  int component = 0;  ///< 1-based
  double eigenvalue = 0.0;
  double pct_variance = 0.0;
  double cumulative_pct = 0.0;
};

/// Score variance per component as a share of the total (centred, optionally
/// scaled) variance of X. X is expected to be the training matrix.
std::vector<VarianceRow> variance_table(const ComponentModel& model, const Eigen::MatrixXd& X);

}  // namespace richspec
