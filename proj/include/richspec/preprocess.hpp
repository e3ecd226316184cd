#pragma once

#include "richspec/spectral_core.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace richspec {

/// One Gaussian spectral response function.
struct SrfBand {
  std::string name;
  double center_nm = 0.0;
  double fwhm_nm = 0.0;
};

struct SrfSet {
  std::vector<SrfBand> bands;

  std::size_t size() const noexcept { return bands.size(); }
  /// Grid with the same centres and widths, band names dropped.
  BandGrid as_grid(std::string id = {}) const;
};

/// Throws ValidationError on non-positive FWHM or duplicate names.
void check_srf(const SrfSet& srf);

/// Bands to drop, matched by centre wavelength within +/- tolerance_nm.
struct BandMask {
  std::vector<double> remove_centers_nm;
  double tolerance_nm = 0.5;
};

/// Atmospheric-absorption and edge bands removed from the 10.2 nm DESIS product.
BandMask desis_default_mask();

/// Gaussian sd for a given FWHM.
double fwhm_to_sigma(double fwhm_nm) noexcept;

/// Response of a Gaussian SRF (centre, fwhm) at `wavelength_nm`, peak 1.
double srf_weight(double center_nm, double fwhm_nm, double wavelength_nm) noexcept;

/// Weighted mean of source bands under each destination Gaussian. Only source
/// centres within +/- 3 fwhm of a destination centre contribute and the
/// weights are renormalized over that window.
Eigen::VectorXd gaussian_resample(const Eigen::VectorXd& values, const BandGrid& src,
                                  const SrfSet& dst);

/// The same operation against a target grid (band names are not needed).
Eigen::VectorXd gaussian_resample(const Eigen::VectorXd& values, const BandGrid& src,
                                  const BandGrid& dst);

/// Sensor simulation: gaussian_resample onto the SRF set, with the SRF band
/// names attached to the output.
struct SimulatedSpectrum {
  Eigen::VectorXd values;
  std::vector<std::string> band_names;
};
SimulatedSpectrum simulate_multispectral(const Eigen::VectorXd& values, const BandGrid& src,
                                         const SrfSet& srf);

struct MaskedSpectrum {
  Eigen::VectorXd values;
  BandGrid grid;
};

MaskedSpectrum apply_band_mask(const Eigen::VectorXd& values, const BandGrid& grid,
                               const BandMask& mask);

/// Indices of bands kept by `mask`, ascending.
std::vector<Eigen::Index> kept_bands(const BandGrid& grid, const BandMask& mask);

/// Divides every band by the mean over all bands.
Eigen::VectorXd mean_normalize(const Eigen::VectorXd& values);

/// Uniformly spaced destination grid for spectral binning.
struct BinningSpec {
  double step_nm = 10.2;
  double fwhm_nm = 10.2;
  std::optional<double> start_nm;  ///< default: first source centre
  std::optional<double> end_nm;    ///< default: last source centre
};

/// Centres start, start+step, ... up to end (inclusive within 1e-9 nm).
BandGrid binning_grid(const BandGrid& src, const BinningSpec& spec, std::string id = "binned");

/// 60-band 10.2 nm DESIS-like layout from 402.8 to 999.5 nm containing every
/// wavelength of desis_default_mask() exactly.
BandGrid desis_like_grid60();

/// desis_like_grid60() with the default mask applied (52 bands).
BandGrid desis_like_grid52();

/// Dataset-level preprocessing chain, applied per spectrum.
struct PreprocessSpec {
  std::optional<BinningSpec> binning;
  std::optional<BandMask> mask;
  bool normalize = true;
};

Dataset preprocess_dataset(const Dataset& d, const PreprocessSpec& spec);

/// Same chain on raw samples; cloud flags and ids are carried through.
std::vector<SpectralSample> preprocess_samples(const std::vector<SpectralSample>& samples,
                                               const BandGrid& grid, const PreprocessSpec& spec,
                                               BandGrid& out_grid);

}  // namespace richspec
