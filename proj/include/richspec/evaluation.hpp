#pragma once

#include "richspec/pipeline.hpp"
#include "richspec/spectral_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace richspec {

/// Repeated two-fold cross-validation settings.
struct CVConfig {
  int repetitions = 100;
  std::uint64_t seed = 42;
  unsigned threads = 0;  ///< 0 = all cores; results do not depend on this
  static constexpr int fold_count = 2;
};

/// Subset I holds ceil(n/2) rows, subset II floor(n/2). Round 0 trains on I
/// and validates on II; round 1 swaps them.
struct Partition {
  std::vector<Eigen::Index> subset1;
  std::vector<Eigen::Index> subset2;
};

/// One shuffled split per repetition, each from its own seed substream.
std::vector<Partition> make_partition_plan(Eigen::Index n, const CVConfig& cfg);

struct FoldRecord {
  int rep = 0;
  int fold = 0;
  double r = 0.0;
  double rmse = 0.0;
  bool operator==(const FoldRecord&) const = default;
};

struct PredictionRecord {
  std::string plot_id;
  std::string region;
  double truth = 0.0;
  double prediction = 0.0;
  int rep = 0;
  int fold = 0;
  bool operator==(const PredictionRecord&) const = default;
};

/// Per-fold metrics are the primary summary (mean_r, mean_rmse). The pooled
/// figures compute r and RMSE over all n out-of-fold predictions of each
/// repetition and average those over repetitions.
struct CVReport {
  int repetitions = 0;
  std::vector<FoldRecord> per_repetition;  ///< repetitions x 2, ordered by (rep, fold)
  std::vector<PredictionRecord> pooled_predictions;
  double mean_r = 0.0;
  double mean_rmse = 0.0;
  double pooled_r = 0.0;
  double pooled_rmse = 0.0;
  bool operator==(const CVReport&) const = default;
};

double pearson_r(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred);
double rmse(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred);

/// Everything a fold produced; handed to an optional observer.
struct FoldContext {
  int rep = 0;
  int fold = 0;
  const std::vector<Eigen::Index>& train;
  const std::vector<Eigen::Index>& validation;
  const FittedPipeline& pipeline;
};
using FoldObserver = std::function<void(const FoldContext&)>;

/// Feature extraction is fitted on the training fold only.
CVReport two_fold_cv(const Dataset& d, const PipelineSpec& spec, const CVConfig& cfg,
                     const FoldObserver& observer = {});

/// Concatenates the regional datasets (identical grids required) and runs
/// two_fold_cv; region labels survive in the prediction records.
CVReport pooled_region_eval(const std::vector<Dataset>& datasets, const PipelineSpec& spec,
                            const CVConfig& cfg);

/// Extracted features of one (rep, fold), reusable across regressor settings.
struct FoldFeatures {
  int rep = 0;
  int fold = 0;
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> validation;
  ComponentModel extractor;
  Eigen::MatrixXd T_train;
  Eigen::MatrixXd T_val;
};

/// Fits the extractor for every (rep, fold) of the plan.
std::vector<FoldFeatures> extract_fold_features(const Dataset& d, Method method, Eigen::Index k,
                                                const ExtractionOptions& opt, const CVConfig& cfg);

/// Regression and scoring on cached features; identical results to
/// two_fold_cv with the same extraction settings.
CVReport evaluate_fold_features(const Dataset& d, const std::vector<FoldFeatures>& folds,
                                const PipelineSpec& spec, const CVConfig& cfg);

/// Seed of the RFR stream used in (rep, fold).
std::uint64_t fold_seed(const CVConfig& cfg, int rep, int fold);

}  // namespace richspec
