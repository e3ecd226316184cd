#include "richspec/pipeline.hpp"

#include "richspec/error.hpp"

namespace richspec {

RegressorModel fit_regressor(const PipelineSpec& spec, const Eigen::MatrixXd& T,
                             const Eigen::VectorXd& y, std::uint64_t seed) {
  switch (spec.regressor) {
    case Regressor::KRR: return fit_krr(T, y, spec.kernel, spec.lambda);
    case Regressor::GPR: return fit_gpr(T, y, spec.kernel, spec.epsilon, spec.gpr);
    case Regressor::RFR: {
      RfrOptions opt = spec.rfr;
      opt.seed = seed;
      return fit_rfr(T, y, opt);
    }
  }
  throw ConfigError("unknown regressor");
}

FittedPipeline fit_pipeline(const PipelineSpec& spec, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y, std::uint64_t seed) {
  FittedPipeline p;
  p.extractor = fit_extractor(spec.method, X, y, spec.k, spec.extraction);
  p.regressor = fit_regressor(spec, transform(p.extractor, X), y, seed);
  return p;
}

Eigen::VectorXd predict(const FittedPipeline& p, const Eigen::MatrixXd& X) {
  return predict(p.regressor, transform(p.extractor, X));
}

}  // namespace richspec
