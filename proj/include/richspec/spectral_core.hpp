#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace richspec {

/// Band layout of a spectrum: centre wavelength and FWHM per band, both in nm.
struct BandGrid {
  std::string id;
  std::vector<double> centers_nm;
  std::vector<double> fwhm_nm;

  std::size_t size() const noexcept { return centers_nm.size(); }
  bool operator==(const BandGrid&) const = default;
};

/// Throws ValidationError unless centres are positive and strictly increasing,
/// every FWHM is positive, and both lists have the same length.
void check_grid(const BandGrid& grid);

/// Grid whose bands all share one FWHM.
BandGrid make_grid(std::vector<double> centers_nm, double fwhm_nm, std::string id = {});

struct SpectralSample {
  std::string plot_id;
  Eigen::VectorXd values;  ///< reflectance, one entry per band of `grid_id`
  std::string grid_id;
  bool cloud_flagged = false;
};

struct RichnessPlot {
  std::string plot_id;
  std::string region;
  int richness = 0;
  double plot_area_m2 = 400.0;
  std::string survey_date;  ///< ISO-8601 calendar date, YYYY-MM-DD
};

/// Joined modelling table: one row per plot, one column per band.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  BandGrid grid;
  std::vector<std::string> plot_ids;
  std::vector<std::string> regions;

  Eigen::Index rows() const noexcept { return X.rows(); }
  Eigen::Index bands() const noexcept { return X.cols(); }
};

struct Diagnostic {
  std::string message;
  Eigen::Index row = -1;   ///< -1 when not row-specific
  Eigen::Index band = -1;  ///< -1 when not band-specific
  std::string plot_id;
};

/// Result of assemble_dataset: the table plus what was dropped along the way.
struct Assembly {
  Dataset dataset;
  std::vector<std::string> dropped_cloud;     ///< matched but cloud-flagged
  std::vector<std::string> unmatched_spectra; ///< spectra without a plot record
  std::vector<std::string> unmatched_plots;   ///< plot records without a spectrum
};

/// Inner join of spectra and plots on plot_id. Cloud-flagged spectra are
/// dropped, rows come out in ascending plot_id order.
Assembly assemble_dataset(const std::vector<SpectralSample>& spectra,
                          const std::vector<RichnessPlot>& plots, const BandGrid& grid);

/// One diagnostic per violated Dataset invariant; empty when well formed.
std::vector<Diagnostic> validate_dataset(const Dataset& d);

/// Throws ValidationError carrying the first diagnostic, if any.
void require_valid(const Dataset& d);

/// Row subset in the given order.
Dataset take_rows(const Dataset& d, const std::vector<Eigen::Index>& rows);

/// Row-wise concatenation; every input must be on the same band grid.
Dataset concat_datasets(const std::vector<Dataset>& parts);

}  // namespace richspec
