#include "richspec/evaluation.hpp"

#include "richspec/error.hpp"
#include "richspec/parallel.hpp"
#include "richspec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace richspec {

std::vector<Partition> make_partition_plan(Eigen::Index n, const CVConfig& cfg) {
  if (cfg.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (n < 4) throw ConfigError("two-fold cross-validation needs at least 4 samples");
  const auto first = static_cast<std::size_t>((n + 1) / 2);
  std::vector<Partition> plan(static_cast<std::size_t>(cfg.repetitions));
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(rep));
    std::shuffle(rows.begin(), rows.end(), rng);
    Partition& p = plan[static_cast<std::size_t>(rep)];
    p.subset1.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(first));
    p.subset2.assign(rows.begin() + static_cast<std::ptrdiff_t>(first), rows.end());
  }
  return plan;
}

double pearson_r(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
  if (truth.size() != pred.size()) throw ValidationError("length mismatch");
  if (truth.size() < 2) throw ValidationError("correlation needs at least 2 values");
  const Eigen::ArrayXd a = truth.array() - truth.mean();
  const Eigen::ArrayXd b = pred.array() - pred.mean();
  const double saa = (a * a).sum();
  const double sbb = (b * b).sum();
  if (!(saa > 0.0) || !(sbb > 0.0)) throw NumericalError("undefined correlation");
  return std::clamp((a * b).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

double rmse(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
  if (truth.size() != pred.size()) throw ValidationError("length mismatch");
  if (truth.size() < 1) throw ValidationError("rmse needs at least 1 value");
  return std::sqrt((truth - pred).squaredNorm() / static_cast<double>(truth.size()));
}

std::uint64_t fold_seed(const CVConfig& cfg, int rep, int fold) {
  return substream_seed(cfg.seed, static_cast<std::uint64_t>(rep),
                        0x52465200ULL + static_cast<std::uint64_t>(fold));
}

namespace {

void check_fold_sizes(Eigen::Index n, Eigen::Index k) {
  const Eigen::Index smallest = n / 2;
  if (k >= smallest - 1) {
    throw ConfigError("fold too small: k=" + std::to_string(k) + " needs training folds of at least " +
                      std::to_string(k + 2) + " samples, smallest fold has " +
                      std::to_string(smallest));
  }
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
  return out;
}

Eigen::VectorXd entries_of(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(idx[i]);
  return out;
}

std::string fold_label(int rep, int fold) {
  return "repetition " + std::to_string(rep) + " fold " + std::to_string(fold);
}

struct FoldOutcome {
  RegressorModel model;
  Eigen::VectorXd prediction;
};

CVReport score(const Dataset& d, const std::vector<FoldFeatures>& folds,
               const std::vector<FoldOutcome>& outcomes, const CVConfig& cfg) {
  CVReport rep;
  rep.repetitions = cfg.repetitions;
  rep.per_repetition.reserve(folds.size());
  std::vector<Eigen::VectorXd> oof(static_cast<std::size_t>(cfg.repetitions),
                                   Eigen::VectorXd(d.rows()));
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const FoldFeatures& f = folds[i];
    const Eigen::VectorXd truth = entries_of(d.y, f.validation);
    const Eigen::VectorXd& pred = outcomes[i].prediction;
    FoldRecord rec{f.rep, f.fold, 0.0, rmse(truth, pred)};
    try {
      rec.r = pearson_r(truth, pred);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " in " + fold_label(f.rep, f.fold));
    }
    rep.per_repetition.push_back(rec);
    for (std::size_t j = 0; j < f.validation.size(); ++j) {
      const Eigen::Index row = f.validation[j];
      oof[static_cast<std::size_t>(f.rep)](row) = pred(static_cast<Eigen::Index>(j));
      rep.pooled_predictions.push_back({d.plot_ids[static_cast<std::size_t>(row)],
                                        d.regions.empty() ? std::string{}
                                                          : d.regions[static_cast<std::size_t>(row)],
                                        d.y(row), pred(static_cast<Eigen::Index>(j)), f.rep,
                                        f.fold});
    }
  }
  double sr = 0.0, se = 0.0;
  for (const auto& r : rep.per_repetition) {
    sr += r.r;
    se += r.rmse;
  }
  rep.mean_r = sr / static_cast<double>(rep.per_repetition.size());
  rep.mean_rmse = se / static_cast<double>(rep.per_repetition.size());
  double pr = 0.0, pe = 0.0;
  for (const auto& v : oof) {
    pr += pearson_r(d.y, v);
    pe += rmse(d.y, v);
  }
  rep.pooled_r = pr / static_cast<double>(oof.size());
  rep.pooled_rmse = pe / static_cast<double>(oof.size());
  return rep;
}

std::vector<FoldOutcome> run_regressions(const Dataset& d, const std::vector<FoldFeatures>& folds,
                                         const PipelineSpec& spec, const CVConfig& cfg) {
  std::vector<FoldOutcome> out(folds.size());
  parallel_for(folds.size(), cfg.threads, [&](std::size_t i) {
    const FoldFeatures& f = folds[i];
    try {
      out[i].model = fit_regressor(spec, f.T_train, entries_of(d.y, f.train),
                                   fold_seed(cfg, f.rep, f.fold));
      out[i].prediction = predict(out[i].model, f.T_val);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " in " + fold_label(f.rep, f.fold));
    }
    if (!out[i].prediction.allFinite()) {
      throw NumericalError("non-finite prediction in " + fold_label(f.rep, f.fold));
    }
  });
  return out;
}

}  // namespace

std::vector<FoldFeatures> extract_fold_features(const Dataset& d, Method method, Eigen::Index k,
                                                const ExtractionOptions& opt, const CVConfig& cfg) {
  require_valid(d);
  check_fold_sizes(d.rows(), k);
  const auto plan = make_partition_plan(d.rows(), cfg);
  std::vector<FoldFeatures> folds(plan.size() * 2);
  parallel_for(folds.size(), cfg.threads, [&](std::size_t i) {
    const Partition& p = plan[i / 2];
    FoldFeatures& f = folds[i];
    f.rep = static_cast<int>(i / 2);
    f.fold = static_cast<int>(i % 2);
    f.train = f.fold == 0 ? p.subset1 : p.subset2;
    f.validation = f.fold == 0 ? p.subset2 : p.subset1;
    const Eigen::MatrixXd Xtr = rows_of(d.X, f.train);
    try {
      f.extractor = fit_extractor(method, Xtr, entries_of(d.y, f.train), k, opt);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " in " + fold_label(f.rep, f.fold));
    }
    f.T_train = transform(f.extractor, Xtr);
    f.T_val = transform(f.extractor, rows_of(d.X, f.validation));
  });
  return folds;
}

CVReport evaluate_fold_features(const Dataset& d, const std::vector<FoldFeatures>& folds,
                                const PipelineSpec& spec, const CVConfig& cfg) {
  return score(d, folds, run_regressions(d, folds, spec, cfg), cfg);
}

CVReport two_fold_cv(const Dataset& d, const PipelineSpec& spec, const CVConfig& cfg,
                     const FoldObserver& observer) {
  const auto folds = extract_fold_features(d, spec.method, spec.k, spec.extraction, cfg);
  const auto outcomes = run_regressions(d, folds, spec, cfg);
  if (observer) {
    for (std::size_t i = 0; i < folds.size(); ++i) {
      const FittedPipeline p{folds[i].extractor, outcomes[i].model};
      observer(FoldContext{folds[i].rep, folds[i].fold, folds[i].train, folds[i].validation, p});
    }
  }
  return score(d, folds, outcomes, cfg);
}

CVReport pooled_region_eval(const std::vector<Dataset>& datasets, const PipelineSpec& spec,
                            const CVConfig& cfg) {
  if (datasets.empty()) throw ConfigError("no datasets to pool");
  if (datasets.size() == 1) return two_fold_cv(datasets.front(), spec, cfg);
  return two_fold_cv(concat_datasets(datasets), spec, cfg);
}

}  // namespace richspec
