#pragma once

#include "richspec/features.hpp"
#include "richspec/regression.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace richspec {

/// Extraction method, component count, regressor and its hyperparameters.
struct PipelineSpec {
  Method method = Method::PLS;
  Eigen::Index k = 2;
  ExtractionOptions extraction;
  Regressor regressor = Regressor::KRR;
  KernelConfig kernel;     ///< KRR kernel, GPR starting point
  double lambda = 1.0;     ///< KRR
  double epsilon = 1.0;    ///< GPR
  GprOptions gpr;          ///< GPR optimizer (gpr.optimize defaults to true here)
  RfrOptions rfr;          ///< RFR; the seed is replaced per fit by the caller's substream

  PipelineSpec() { gpr.optimize = true; }
};

struct FittedPipeline {
  ComponentModel extractor;
  RegressorModel regressor;
};

/// Fits the extractor on (X, y) and the regressor on the training scores.
/// `seed` feeds the RFR tree streams.
FittedPipeline fit_pipeline(const PipelineSpec& spec, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y, std::uint64_t seed = 0);

Eigen::VectorXd predict(const FittedPipeline& p, const Eigen::MatrixXd& X);

/// Regressor only, on precomputed features.
RegressorModel fit_regressor(const PipelineSpec& spec, const Eigen::MatrixXd& T,
                             const Eigen::VectorXd& y, std::uint64_t seed = 0);

}  // namespace richspec
