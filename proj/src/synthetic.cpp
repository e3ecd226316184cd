#include "richspec/synthetic.hpp"

#include "richspec/error.hpp"
#include "richspec/rng.hpp"

#include <cmath>
#include <cstdio>

namespace richspec {

std::vector<LatentPattern> default_patterns(int count) {
  if (count < 1) throw ConfigError("latent_patterns must be >= 1");
  std::vector<LatentPattern> out;
  for (int j = 0; j < count; ++j) {
    LatentPattern p;
    p.center_nm = 520.0 + 340.0 * (j + 0.5) / count;
    p.width_nm = 30.0;
    p.amplitude = 0.04;
    p.response_weight = 5.0;
    out.push_back(p);
  }
  return out;
}

std::vector<LatentPattern> resolved_patterns(const SyntheticSpec& spec) {
  return spec.patterns.empty() ? default_patterns(spec.latent_patterns) : spec.patterns;
}

double synthetic_signal_sd(const SyntheticSpec& spec) {
  double s = 0.0;
  for (const auto& p : resolved_patterns(spec)) s += p.response_weight * p.response_weight;
  return std::sqrt(s);
}

double vegetation_baseline(double wavelength_nm) {
  const double green = (wavelength_nm - 550.0) / 35.0;
  const double edge = (wavelength_nm - 715.0) / 18.0;
  return 0.04 + 0.04 * std::exp(-0.5 * green * green) + 0.32 / (1.0 + std::exp(-edge));
}

Dataset generate_synthetic_dataset(const SyntheticSpec& spec) {
  check_grid(spec.grid);
  if (spec.n < 1) throw ConfigError("synthetic n must be >= 1");
  if (!(spec.noise_sd >= 0.0) || !(spec.band_noise_sd >= 0.0)) {
    throw ConfigError("noise levels must be >= 0");
  }
  const auto patterns = resolved_patterns(spec);
  const auto m = static_cast<Eigen::Index>(spec.grid.size());
  const auto p = static_cast<Eigen::Index>(patterns.size());

  Eigen::VectorXd baseline(m);
  Eigen::MatrixXd shapes(m, p);
  for (Eigen::Index b = 0; b < m; ++b) {
    const double lambda = spec.grid.centers_nm[static_cast<std::size_t>(b)];
    baseline(b) = vegetation_baseline(lambda);
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto& pat = patterns[static_cast<std::size_t>(j)];
      const double u = (lambda - pat.center_nm) / pat.width_nm;
      shapes(b, j) = pat.amplitude * std::exp(-0.5 * u * u);
    }
  }

  Rng rng = make_rng(spec.seed, 0x53594E54ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::string prefix = spec.id_prefix.empty() ? spec.region : spec.id_prefix;

  Dataset d;
  d.grid = spec.grid;
  d.X.resize(spec.n, m);
  d.y.resize(spec.n);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    Eigen::VectorXd z(p);
    for (Eigen::Index j = 0; j < p; ++j) z(j) = normal(rng);
    Eigen::VectorXd row = baseline + shapes * z;
    for (Eigen::Index b = 0; b < m; ++b) row(b) += spec.band_noise_sd * normal(rng);
    double signal = spec.richness_offset;
    for (Eigen::Index j = 0; j < p; ++j) {
      signal += patterns[static_cast<std::size_t>(j)].response_weight * z(j);
    }
    const double noisy = signal + spec.noise_sd * normal(rng);
    d.X.row(i) = row.transpose();
    d.y(i) = std::round(std::max(0.0, noisy));
    char id[32];
    std::snprintf(id, sizeof id, "-P%04lld", static_cast<long long>(i + 1));
    d.plot_ids.push_back(prefix + id);
    d.regions.push_back(spec.region);
  }
  return d;
}

Dataset generate_synthetic_dataset(std::uint64_t seed, Eigen::Index n, const BandGrid& grid,
                                   int latent_patterns, double noise_sd, double richness_offset) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.n = n;
  spec.grid = grid;
  spec.latent_patterns = latent_patterns;
  spec.noise_sd = noise_sd;
  spec.richness_offset = richness_offset;
  return generate_synthetic_dataset(spec);
}

}  // namespace richspec
