#pragma once

#include "richspec/evaluation.hpp"
#include "richspec/features.hpp"
#include "richspec/importance.hpp"
#include "richspec/model_selection.hpp"
#include "richspec/pipeline.hpp"
#include "richspec/preprocess.hpp"
#include "richspec/spectral_core.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace richspec {

// All text files are UTF-8 CSV with LF line endings and '.' decimals. Floats
// are written with 17 significant digits so they read back bit-identically.

std::string format_double(double v);

/// Strict decimal parse; `where` names the location for the error message.
double parse_double(std::string_view text, const std::string& where);

std::vector<std::string> split_csv_line(std::string_view line);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// --- spectra: plot_id,cloud,wl_<center>x<fwhm>,... ---------------------------

struct SpectraTable {
  std::vector<SpectralSample> samples;
  BandGrid grid;
};

SpectraTable parse_spectra_csv(const std::string& text, const std::string& grid_id = "file");
SpectraTable load_spectra_csv(const std::filesystem::path& path);
std::string spectra_csv(const std::vector<SpectralSample>& samples, const BandGrid& grid);
void write_spectra_csv(const std::filesystem::path& path, const std::vector<SpectralSample>& samples,
                       const BandGrid& grid);

/// Column label for one band, e.g. "wl_402.8x2.55".
std::string band_label(double center_nm, double fwhm_nm);

/// Dataset rows as samples on the dataset grid (cloud flag cleared).
std::vector<SpectralSample> dataset_samples(const Dataset& d);

// --- plots: plot_id,region,richness,plot_area_m2,survey_date ----------------

std::vector<RichnessPlot> parse_plots_csv(const std::string& text);
std::vector<RichnessPlot> load_plots_csv(const std::filesystem::path& path);
std::string plots_csv(const std::vector<RichnessPlot>& plots);

/// Plot records for a dataset (area 400 m^2, the given survey date).
std::vector<RichnessPlot> dataset_plots(const Dataset& d, const std::string& survey_date = "2020-01-15");

/// True for a valid YYYY-MM-DD calendar date.
bool is_iso_date(std::string_view s);

// --- SRF: band_name,center_nm,fwhm_nm -----------------------------------------

SrfSet parse_srf_csv(const std::string& text);
SrfSet load_srf_csv(const std::filesystem::path& path);
std::string srf_csv(const SrfSet& srf);

/// Gaussian approximation of the Sentinel-2A visible/NIR bands B1-B9.
SrfSet sentinel2_vnir_srf();

// --- reports -----------------------------------------------------------------

std::string variance_csv(const std::vector<VarianceRow>& rows);
std::string cv_folds_csv(const CVReport& r);
std::string cv_predictions_csv(const CVReport& r);
std::string cv_summary_csv(const CVReport& r);
std::string importance_csv(const ImportanceProfile& p);
std::string importance_spread_csv(const ImportanceSpread& s);
std::string kernel_table_csv(const KernelSelection& s);
std::string component_table_csv(const ComponentSelection& s);

/// Writes cv_folds.csv, cv_predictions.csv and cv_summary.csv into `dir`.
void write_cv_report(const std::filesystem::path& dir, const CVReport& r);

// --- model files -------------------------------------------------------------

/// Versioned text format: a "richspec-model 1" header, then entries
/// "@text <name> <value>" or "@matrix <name> <rows> <cols>" followed by the
/// values row-major, one matrix row per line.
std::string serialize_pipeline(const FittedPipeline& p);
FittedPipeline deserialize_pipeline(const std::string& text);

}  // namespace richspec
