#include "richspec/preprocess.hpp"

#include "richspec/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace richspec {

BandGrid SrfSet::as_grid(std::string id) const {
  BandGrid g;
  g.id = std::move(id);
  for (const auto& b : bands) {
    g.centers_nm.push_back(b.center_nm);
    g.fwhm_nm.push_back(b.fwhm_nm);
  }
  return g;
}

void check_srf(const SrfSet& srf) {
  if (srf.bands.empty()) throw ValidationError("SRF set is empty");
  std::set<std::string> names;
  for (const auto& b : srf.bands) {
    if (!(b.fwhm_nm > 0.0) || !std::isfinite(b.fwhm_nm)) {
      throw ValidationError("SRF band " + b.name + ": fwhm must be positive");
    }
    if (!(b.center_nm > 0.0) || !std::isfinite(b.center_nm)) {
      throw ValidationError("SRF band " + b.name + ": center must be positive");
    }
    if (!names.insert(b.name).second) throw ValidationError("duplicate SRF band name " + b.name);
  }
}

BandMask desis_default_mask() {
  return BandMask{{402.8, 410.3, 759.0, 769.0, 933.4, 943.4, 953.2, 999.5}, 0.5};
}

double fwhm_to_sigma(double fwhm_nm) noexcept {
  return fwhm_nm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

double srf_weight(double center_nm, double fwhm_nm, double wavelength_nm) noexcept {
  const double s = fwhm_to_sigma(fwhm_nm);
  const double d = wavelength_nm - center_nm;
  return std::exp(-d * d / (2.0 * s * s));
}

namespace {

Eigen::VectorXd resample_impl(const Eigen::VectorXd& values, const BandGrid& src,
                              const std::vector<double>& centers,
                              const std::vector<double>& fwhms,
                              const std::vector<std::string>* names) {
  if (static_cast<std::size_t>(values.size()) != src.size()) {
    throw ValidationError("spectrum has " + std::to_string(values.size()) +
                          " values for a " + std::to_string(src.size()) + "-band grid");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(centers.size()));
  for (std::size_t j = 0; j < centers.size(); ++j) {
    const double half_window = 3.0 * fwhms[j];
    double wsum = 0.0;
    double acc = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double lambda = src.centers_nm[i];
      if (std::abs(lambda - centers[j]) > half_window) continue;
      const double w = srf_weight(centers[j], fwhms[j], lambda);
      const double v = values(static_cast<Eigen::Index>(i));
      wsum += w;
      acc += w * v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(wsum > 0.0)) {
      const std::string label =
          names ? (*names)[j] : std::to_string(centers[j]) + " nm";
      throw ValidationError("band has no source coverage: " + label);
    }
    // The exact mean lies in [lo, hi]; clamping removes rounding only, so
    // constants come through unchanged.
    out(static_cast<Eigen::Index>(j)) = std::clamp(acc / wsum, lo, hi);
  }
  return out;
}

}  // namespace

Eigen::VectorXd gaussian_resample(const Eigen::VectorXd& values, const BandGrid& src,
                                  const SrfSet& dst) {
  std::vector<std::string> names;
  for (const auto& b : dst.bands) names.push_back(b.name);
  const BandGrid g = dst.as_grid();
  return resample_impl(values, src, g.centers_nm, g.fwhm_nm, &names);
}

Eigen::VectorXd gaussian_resample(const Eigen::VectorXd& values, const BandGrid& src,
                                  const BandGrid& dst) {
  return resample_impl(values, src, dst.centers_nm, dst.fwhm_nm, nullptr);
}

SimulatedSpectrum simulate_multispectral(const Eigen::VectorXd& values, const BandGrid& src,
                                         const SrfSet& srf) {
  check_srf(srf);
  SimulatedSpectrum out;
  out.values = gaussian_resample(values, src, srf);
  for (const auto& b : srf.bands) out.band_names.push_back(b.name);
  return out;
}

std::vector<Eigen::Index> kept_bands(const BandGrid& grid, const BandMask& mask) {
  if (mask.tolerance_nm < 0.0) throw ValidationError("mask tolerance must be >= 0");
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool removed = false;
    for (double c : mask.remove_centers_nm) {
      if (std::abs(grid.centers_nm[i] - c) <= mask.tolerance_nm) {
        removed = true;
        break;
      }
    }
    if (!removed) keep.push_back(static_cast<Eigen::Index>(i));
  }
  if (keep.empty()) throw ValidationError("empty spectrum: mask removes every band");
  return keep;
}

MaskedSpectrum apply_band_mask(const Eigen::VectorXd& values, const BandGrid& grid,
                               const BandMask& mask) {
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw ValidationError("spectrum length does not match grid");
  }
  const auto keep = kept_bands(grid, mask);
  MaskedSpectrum out;
  out.grid.id = grid.id;
  out.values.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.values(static_cast<Eigen::Index>(i)) = values(keep[i]);
    out.grid.centers_nm.push_back(grid.centers_nm[keep[i]]);
    out.grid.fwhm_nm.push_back(grid.fwhm_nm[keep[i]]);
  }
  return out;
}

Eigen::VectorXd mean_normalize(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw ValidationError("empty spectrum");
  if (!values.allFinite()) throw ValidationError("non-finite reflectance");
  const double mean = values.mean();
  if (std::abs(mean) <= 1e-15) throw NumericalError("zero-mean spectrum");
  return values / mean;
}

BandGrid binning_grid(const BandGrid& src, const BinningSpec& spec, std::string id) {
  check_grid(src);
  if (!(spec.step_nm > 0.0) || !(spec.fwhm_nm > 0.0)) {
    throw ConfigError("binning step and fwhm must be positive");
  }
  const double start = spec.start_nm.value_or(src.centers_nm.front());
  const double end = spec.end_nm.value_or(src.centers_nm.back());
  if (end < start) throw ConfigError("binning end precedes start");
  std::vector<double> centers;
  for (std::size_t j = 0;; ++j) {
    const double c = start + static_cast<double>(j) * spec.step_nm;
    if (c > end + 1e-9) break;
    centers.push_back(c);
  }
  return make_grid(std::move(centers), spec.fwhm_nm, std::move(id));
}

BandGrid desis_like_grid60() {
  constexpr int kBands = 60;
  constexpr double kFirst = 402.8;
  constexpr double kLast = 999.5;
  std::vector<double> centers(kBands);
  for (int i = 0; i < kBands; ++i) centers[i] = kFirst + (kLast - kFirst) * i / (kBands - 1);
  // Snap the nearest uniform centre onto each masked wavelength.
  for (double w : desis_default_mask().remove_centers_nm) {
    const auto idx = static_cast<std::size_t>(
        std::lround((w - kFirst) / ((kLast - kFirst) / (kBands - 1))));
    centers[idx] = w;
  }
  return make_grid(std::move(centers), 10.2, "desis60");
}

BandGrid desis_like_grid52() {
  const BandGrid g60 = desis_like_grid60();
  auto masked = apply_band_mask(Eigen::VectorXd::Zero(60), g60, desis_default_mask());
  masked.grid.id = "desis52";
  return masked.grid;
}

namespace {

struct Chain {
  BandGrid binned;
  BandGrid out;
  std::vector<Eigen::Index> keep;
};

Chain plan_chain(const BandGrid& grid, const PreprocessSpec& spec) {
  Chain c;
  c.binned = spec.binning ? binning_grid(grid, *spec.binning, grid.id + "+bin") : grid;
  if (spec.mask) {
    c.keep = kept_bands(c.binned, *spec.mask);
  } else {
    for (std::size_t i = 0; i < c.binned.size(); ++i) c.keep.push_back(static_cast<Eigen::Index>(i));
  }
  c.out.id = c.binned.id + (spec.mask ? "+mask" : "");
  for (auto k : c.keep) {
    c.out.centers_nm.push_back(c.binned.centers_nm[k]);
    c.out.fwhm_nm.push_back(c.binned.fwhm_nm[k]);
  }
  return c;
}

Eigen::VectorXd run_chain(const Eigen::VectorXd& v, const BandGrid& grid, const Chain& c,
                          const PreprocessSpec& spec) {
  Eigen::VectorXd cur = spec.binning ? gaussian_resample(v, grid, c.binned) : v;
  Eigen::VectorXd kept(static_cast<Eigen::Index>(c.keep.size()));
  for (std::size_t i = 0; i < c.keep.size(); ++i) kept(static_cast<Eigen::Index>(i)) = cur(c.keep[i]);
  return spec.normalize ? mean_normalize(kept) : kept;
}

}  // namespace

Dataset preprocess_dataset(const Dataset& d, const PreprocessSpec& spec) {
  const Chain c = plan_chain(d.grid, spec);
  Dataset out;
  out.grid = c.out;
  out.y = d.y;
  out.plot_ids = d.plot_ids;
  out.regions = d.regions;
  out.X.resize(d.rows(), static_cast<Eigen::Index>(c.out.size()));
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    out.X.row(i) = run_chain(d.X.row(i).transpose(), d.grid, c, spec).transpose();
  }
  return out;
}

std::vector<SpectralSample> preprocess_samples(const std::vector<SpectralSample>& samples,
                                               const BandGrid& grid, const PreprocessSpec& spec,
                                               BandGrid& out_grid) {
  const Chain c = plan_chain(grid, spec);
  out_grid = c.out;
  std::vector<SpectralSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    SpectralSample p = s;
    p.grid_id = c.out.id;
    try {
      p.values = run_chain(s.values, grid, c, spec);
    } catch (const NumericalError&) {
      // Cloud-masked pixels are often zero-filled; they are dropped at assembly.
      if (!s.cloud_flagged) throw;
      p.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.out.size()));
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace richspec
