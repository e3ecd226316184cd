#pragma once

#include "richspec/evaluation.hpp"
#include "richspec/features.hpp"
#include "richspec/spectral_core.hpp"

#include <Eigen/Dense>

#include <vector>

namespace richspec {

struct ImportanceProfile {
  std::vector<double> band_centers_nm;
  Eigen::VectorXd raw;         ///< I_i = sqrt(sum_j (w_ij p_j)^2)
  Eigen::VectorXd normalized;  ///< I_i / sum(I)
  Method method = Method::PCA;
  Eigen::Index k_used = 0;
};

/// Correlation of column j of T with y after regressing both on the other
/// columns (with intercept).
double partial_correlation(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, Eigen::Index j);

/// All k partial correlations.
Eigen::VectorXd partial_correlations(const Eigen::MatrixXd& T, const Eigen::VectorXd& y);

/// Band importance from the weight matrix and per-component partials.
ImportanceProfile band_importance(const ComponentModel& model, const Eigen::VectorXd& partials);

/// Fits the extractor on the whole dataset and profiles it.
ImportanceProfile importance_report(const Dataset& d, Method method, Eigen::Index k,
                                    const ExtractionOptions& opt = {});

/// Per-fold variant: one profile per CV training fold, summarized per band.
struct ImportanceSpread {
  std::vector<double> band_centers_nm;
  Eigen::VectorXd mean;  ///< of the normalized profiles
  Eigen::VectorXd sd;
  int folds = 0;
};
ImportanceSpread importance_cv(const Dataset& d, Method method, Eigen::Index k,
                               const CVConfig& cfg, const ExtractionOptions& opt = {});

}  // namespace richspec
