#pragma once

#include "richspec/model_selection.hpp"
#include "richspec/pipeline.hpp"
#include "richspec/preprocess.hpp"
#include "richspec/synthetic.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace richspec {

/// 10.2 nm binning, DESIS mask, mean normalization.
PreprocessSpec default_preprocess();

struct SyntheticSource {
  Eigen::Index n = 40;
  int latent_patterns = 2;
  double noise_sd = 0.0;
  double richness_offset = 25.0;
  double band_noise_sd = 1e-3;
  std::string region = "synthetic";
};

/// Everything a full run needs. Data come either from spectra/plots files or,
/// when `synthetic` is set, from the generator on the 52-band DESIS-like grid.
struct RunConfig {
  std::string spectra_path;
  std::string plots_path;
  std::string srf_path;  ///< optional; adds a simulated multispectral CV when set
  std::string output_dir;
  std::optional<SyntheticSource> synthetic;

  PreprocessSpec preprocess = default_preprocess();
  PipelineSpec pipeline;

  int repetitions = 100;
  std::uint64_t seed = 42;

  bool tune_kernel = false;
  int grid_lo_exp = -5;
  int grid_hi_exp = 5;
  bool tune_k = false;
  int k_min = 1;
  int k_max = 10;
  SelectionMetric selection_metric = SelectionMetric::MaxR;
};

nlohmann::json run_config_to_json(const RunConfig& cfg);

/// Missing keys keep their defaults; unknown keys and bad values raise
/// ConfigError naming the field.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Throws ConfigError naming the first missing or unusable field.
void check_run_config(const RunConfig& cfg);

struct RunData {
  Assembly assembly;                ///< joined table on the raw grid
  std::vector<RichnessPlot> plots;  ///< records of the joined rows
};

/// Spectra and plots from files or the generator, before preprocessing.
RunData load_run_data(const RunConfig& cfg);

struct RunSummary {
  CVReport cv;
  Eigen::Index k = 0;
  KernelConfig kernel;
};

/// Full pipeline. Writes into cfg.output_dir:
///   preprocessed_spectra.csv, plots.csv, variance.csv, cv_folds.csv,
///   cv_predictions.csv, cv_summary.csv, importance.csv, model.txt,
///   k_selection.csv / kernel_selection.csv when tuning, manifest.json.
/// An INCOMPLETE marker exists while the run is in progress and is left
/// behind, holding the diagnostic, when it fails.
RunSummary run_pipeline(const RunConfig& cfg, unsigned threads = 0);

std::string tool_version();

}  // namespace richspec
