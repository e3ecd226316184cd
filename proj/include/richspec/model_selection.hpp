#pragma once

#include "richspec/evaluation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace richspec {

/// Candidate values per kernel hyperparameter; the search covers their product.
struct GridSpec {
  std::vector<double> sigma_values;
  std::vector<double> length_values;
  std::vector<double> delta_values;

  /// 10^-5 .. 10^5 in decade steps for all three.
  static GridSpec decades(int lo_exp = -5, int hi_exp = 5);
  std::size_t cells() const noexcept {
    return sigma_values.size() * length_values.size() * delta_values.size();
  }
};

void check_grid_spec(const GridSpec& g);

enum class SelectionMetric { MaxR, MinRmse };

std::string to_string(SelectionMetric m);
SelectionMetric parse_selection_metric(const std::string& s);

struct KernelScore {
  KernelConfig config;
  double mean_r = 0.0;
  double mean_rmse = 0.0;
  bool ok = true;       ///< false when the cell failed; scores are then NaN
  std::string error;
};

struct KernelSelection {
  KernelConfig best;
  std::vector<KernelScore> table;  ///< sigma-major, then length, then delta
  SelectionMetric metric = SelectionMetric::MaxR;
};

/// Every (sigma, l, delta) cell is scored with the same CV partitions. The
/// regressor must be KRR or GPR; GPR cells use the kernel as given (no
/// marginal-likelihood refit).
KernelSelection grid_search_kernel(const Dataset& d, const PipelineSpec& spec, const GridSpec& grid,
                                   const CVConfig& cv,
                                   SelectionMetric metric = SelectionMetric::MaxR);

struct ComponentScore {
  int k = 0;
  double mean_r = 0.0;
  double mean_rmse = 0.0;
  bool ok = true;
  std::string error;
};

struct ComponentSelection {
  int best_k = 0;
  std::vector<ComponentScore> table;  ///< ascending k
  SelectionMetric metric = SelectionMetric::MaxR;
};

/// Scores spec.method/spec.regressor for every k in [k_min, k_max].
ComponentSelection select_components(const Dataset& d, const PipelineSpec& spec, int k_min,
                                     int k_max, const CVConfig& cv,
                                     SelectionMetric metric = SelectionMetric::MaxR);

/// Averages each k's scores over several datasets before choosing; a k that
/// fails on any dataset is missing.
ComponentSelection select_components_averaged(const std::vector<Dataset>& datasets,
                                              const PipelineSpec& spec, int k_min, int k_max,
                                              const CVConfig& cv,
                                              SelectionMetric metric = SelectionMetric::MaxR);

}  // namespace richspec
