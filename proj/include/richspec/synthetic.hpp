#pragma once

#include "richspec/spectral_core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace richspec {

/// Gaussian absorption/reflectance bump whose per-sample amplitude is a
/// latent N(0, 1) weight. The response gains response_weight per unit weight.
struct LatentPattern {
  double center_nm = 700.0;
  double width_nm = 30.0;   ///< Gaussian sd
  double amplitude = 0.04;  ///< reflectance change per unit latent weight
  double response_weight = 5.0;
};

/// Synthetic plots: spectra = vegetation-like baseline + sum_j z_j * pattern_j
/// + band noise; richness = round(max(0, offset + sum_j w_j z_j + noise)).
struct SyntheticSpec {
  std::uint64_t seed = 0;
  Eigen::Index n = 40;
  BandGrid grid;
  int latent_patterns = 2;             ///< used when `patterns` is empty
  std::vector<LatentPattern> patterns; ///< explicit patterns override the defaults
  double noise_sd = 0.0;               ///< response noise, species
  double richness_offset = 25.0;
  double band_noise_sd = 1e-3;         ///< per-band reflectance noise
  std::string region = "synthetic";
  std::string id_prefix;               ///< default: region
};

/// Equal-norm bumps spread over 520-860 nm.
std::vector<LatentPattern> default_patterns(int count);

/// Patterns actually used by `spec`.
std::vector<LatentPattern> resolved_patterns(const SyntheticSpec& spec);

/// Population sd of the noise-free response, sqrt(sum_j w_j^2).
double synthetic_signal_sd(const SyntheticSpec& spec);

/// Smooth green-peak plus red-edge reflectance curve.
double vegetation_baseline(double wavelength_nm);

Dataset generate_synthetic_dataset(const SyntheticSpec& spec);

Dataset generate_synthetic_dataset(std::uint64_t seed, Eigen::Index n, const BandGrid& grid,
                                   int latent_patterns, double noise_sd, double richness_offset);

}  // namespace richspec
