#include "richspec/model_selection.hpp"

#include "richspec/error.hpp"
#include "richspec/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace richspec {

GridSpec GridSpec::decades(int lo_exp, int hi_exp) {
  GridSpec g;
  for (int e = lo_exp; e <= hi_exp; ++e) {
    const double v = std::pow(10.0, e);
    g.sigma_values.push_back(v);
    g.length_values.push_back(v);
    g.delta_values.push_back(v);
  }
  return g;
}

void check_grid_spec(const GridSpec& g) {
  for (const auto* list : {&g.sigma_values, &g.length_values, &g.delta_values}) {
    if (list->empty()) throw ConfigError("grid lists must be nonempty");
    for (double v : *list) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("grid values must be positive");
    }
  }
}

std::string to_string(SelectionMetric m) { return m == SelectionMetric::MaxR ? "max_r" : "min_rmse"; }

SelectionMetric parse_selection_metric(const std::string& s) {
  if (s == "max_r") return SelectionMetric::MaxR;
  if (s == "min_rmse") return SelectionMetric::MinRmse;
  throw ConfigError("unknown selection metric '" + s + "' (expected max_r or min_rmse)");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// True when a beats b: metric first, then smaller RMSE. Equal scores fall
// through to the caller's key order.
template <class Score>
bool better(const Score& a, const Score& b, SelectionMetric metric) {
  if (metric == SelectionMetric::MaxR) {
    if (a.mean_r != b.mean_r) return a.mean_r > b.mean_r;
    return a.mean_rmse < b.mean_rmse;
  }
  if (a.mean_rmse != b.mean_rmse) return a.mean_rmse < b.mean_rmse;
  return false;
}

auto config_key(const KernelConfig& c) {
  return std::make_tuple(c.sigma, c.length_scale, c.white_noise);
}

}  // namespace

KernelSelection grid_search_kernel(const Dataset& d, const PipelineSpec& spec, const GridSpec& grid,
                                   const CVConfig& cv, SelectionMetric metric) {
  check_grid_spec(grid);
  if (d.rows() < 4) throw ConfigError("grid search needs at least 4 samples");
  if (spec.regressor == Regressor::RFR) {
    throw ConfigError("kernel grid search applies to krr or gpr, not rfr");
  }
  const auto folds = extract_fold_features(d, spec.method, spec.k, spec.extraction, cv);

  KernelSelection sel;
  sel.metric = metric;
  for (double s : grid.sigma_values) {
    for (double l : grid.length_values) {
      for (double w : grid.delta_values) {
        KernelScore cell;
        cell.config = spec.kernel;
        cell.config.sigma = s;
        cell.config.length_scale = l;
        cell.config.white_noise = w;
        sel.table.push_back(cell);
      }
    }
  }

  CVConfig inner = cv;
  inner.threads = 1;
  parallel_for(sel.table.size(), cv.threads, [&](std::size_t i) {
    KernelScore& cell = sel.table[i];
    PipelineSpec cell_spec = spec;
    cell_spec.kernel = cell.config;
    cell_spec.gpr.optimize = false;
    try {
      const CVReport r = evaluate_fold_features(d, folds, cell_spec, inner);
      cell.mean_r = r.mean_r;
      cell.mean_rmse = r.mean_rmse;
    } catch (const Error& e) {
      cell.ok = false;
      cell.error = e.what();
      cell.mean_r = cell.mean_rmse = kNaN;
    }
  });

  const KernelScore* best = nullptr;
  for (const auto& cell : sel.table) {
    if (!cell.ok) continue;
    if (!best || better(cell, *best, metric) ||
        (!better(*best, cell, metric) && config_key(cell.config) < config_key(best->config))) {
      best = &cell;
    }
  }
  if (!best) throw NumericalError("every grid cell failed: " + sel.table.front().error);
  sel.best = best->config;
  return sel;
}

namespace {

ComponentSelection pick_k(std::vector<ComponentScore> table, SelectionMetric metric) {
  ComponentSelection sel;
  sel.metric = metric;
  sel.table = std::move(table);
  const ComponentScore* best = nullptr;
  for (const auto& row : sel.table) {
    if (!row.ok) continue;
    // Rows are in ascending k, so keeping the incumbent on ties picks the smaller k.
    if (!best || better(row, *best, metric)) best = &row;
  }
  if (!best) throw NumericalError("every component count failed: " + sel.table.front().error);
  sel.best_k = best->k;
  return sel;
}

void check_k_range(const Dataset& d, int k_min, int k_max) {
  const auto limit = std::min<Eigen::Index>(d.rows() - 2, d.bands());
  if (k_min < 1 || k_max < k_min || k_max > limit) {
    throw ConfigError("k range [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                      "] must lie within [1, " + std::to_string(limit) + "]");
  }
}

std::vector<ComponentScore> score_ks(const Dataset& d, const PipelineSpec& spec, int k_min,
                                     int k_max, const CVConfig& cv) {
  std::vector<ComponentScore> table;
  for (int k = k_min; k <= k_max; ++k) {
    ComponentScore row;
    row.k = k;
    PipelineSpec s = spec;
    s.k = k;
    try {
      const CVReport r = two_fold_cv(d, s, cv);
      row.mean_r = r.mean_r;
      row.mean_rmse = r.mean_rmse;
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
      row.mean_r = row.mean_rmse = kNaN;
    }
    table.push_back(row);
  }
  return table;
}

}  // namespace

ComponentSelection select_components(const Dataset& d, const PipelineSpec& spec, int k_min,
                                     int k_max, const CVConfig& cv, SelectionMetric metric) {
  check_k_range(d, k_min, k_max);
  return pick_k(score_ks(d, spec, k_min, k_max, cv), metric);
}

ComponentSelection select_components_averaged(const std::vector<Dataset>& datasets,
                                              const PipelineSpec& spec, int k_min, int k_max,
                                              const CVConfig& cv, SelectionMetric metric) {
  if (datasets.empty()) throw ConfigError("no datasets");
  for (const auto& d : datasets) check_k_range(d, k_min, k_max);
  std::vector<ComponentScore> avg;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const auto t = score_ks(datasets[i], spec, k_min, k_max, cv);
    if (i == 0) {
      avg = t;
      continue;
    }
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (!t[j].ok && avg[j].ok) {
        avg[j].ok = false;
        avg[j].error = t[j].error;
      }
      avg[j].mean_r += t[j].mean_r;
      avg[j].mean_rmse += t[j].mean_rmse;
    }
  }
  for (auto& row : avg) {
    row.mean_r /= static_cast<double>(datasets.size());
    row.mean_rmse /= static_cast<double>(datasets.size());
  }
  return pick_k(std::move(avg), metric);
}

}  // namespace richspec
