#include "richspec/spectral_core.hpp"

#include "richspec/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace richspec {

void check_grid(const BandGrid& grid) {
  if (grid.centers_nm.size() != grid.fwhm_nm.size()) {
    throw ValidationError("band grid: " + std::to_string(grid.centers_nm.size()) + " centers but " +
                          std::to_string(grid.fwhm_nm.size()) + " fwhm values");
  }
  if (grid.centers_nm.empty()) throw ValidationError("band grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid.centers_nm[i] > 0.0) || !std::isfinite(grid.centers_nm[i])) {
      throw ValidationError("band grid: center " + std::to_string(i) + " is not positive");
    }
    if (!(grid.fwhm_nm[i] > 0.0) || !std::isfinite(grid.fwhm_nm[i])) {
      throw ValidationError("band grid: fwhm " + std::to_string(i) + " is not positive");
    }
    if (i > 0 && !(grid.centers_nm[i] > grid.centers_nm[i - 1])) {
      throw ValidationError("band grid: centers not strictly increasing at band " +
                            std::to_string(i));
    }
  }
}

BandGrid make_grid(std::vector<double> centers_nm, double fwhm_nm, std::string id) {
  BandGrid g;
  g.id = std::move(id);
  g.fwhm_nm.assign(centers_nm.size(), fwhm_nm);
  g.centers_nm = std::move(centers_nm);
  return g;
}

Assembly assemble_dataset(const std::vector<SpectralSample>& spectra,
                          const std::vector<RichnessPlot>& plots, const BandGrid& grid) {
  check_grid(grid);

  std::map<std::string, const SpectralSample*> by_id;
  for (const auto& s : spectra) {
    if (s.grid_id != grid.id) {
      throw ValidationError("spectrum " + s.plot_id + " is on grid '" + s.grid_id +
                            "', expected '" + grid.id + "'");
    }
    if (static_cast<std::size_t>(s.values.size()) != grid.size()) {
      throw ValidationError("spectrum " + s.plot_id + " has " + std::to_string(s.values.size()) +
                            " values for a " + std::to_string(grid.size()) + "-band grid");
    }
    if (!by_id.emplace(s.plot_id, &s).second) {
      throw ValidationError("duplicate plot_id in spectra: " + s.plot_id);
    }
  }

  std::map<std::string, const RichnessPlot*> plot_by_id;
  for (const auto& p : plots) {
    if (!plot_by_id.emplace(p.plot_id, &p).second) {
      throw ValidationError("duplicate plot_id in plots: " + p.plot_id);
    }
  }

  Assembly out;
  std::vector<std::pair<const SpectralSample*, const RichnessPlot*>> rows;
  for (const auto& [id, s] : by_id) {
    auto it = plot_by_id.find(id);
    if (it == plot_by_id.end()) {
      out.unmatched_spectra.push_back(id);
    } else if (s->cloud_flagged) {
      out.dropped_cloud.push_back(id);
    } else {
      rows.emplace_back(s, it->second);
    }
  }
  for (const auto& [id, p] : plot_by_id) {
    if (!by_id.count(id)) out.unmatched_plots.push_back(id);
  }
  if (rows.empty()) throw ValidationError("no matched samples");

  Dataset& d = out.dataset;
  const auto n = static_cast<Eigen::Index>(rows.size());
  d.grid = grid;
  d.X.resize(n, static_cast<Eigen::Index>(grid.size()));
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.X.row(i) = rows[i].first->values.transpose();
    d.y(i) = rows[i].second->richness;
    d.plot_ids.push_back(rows[i].first->plot_id);
    d.regions.push_back(rows[i].second->region);
  }
  return out;
}

std::vector<Diagnostic> validate_dataset(const Dataset& d) {
  std::vector<Diagnostic> out;
  const Eigen::Index n = d.X.rows();
  if (d.y.size() != n) {
    out.push_back({"response length " + std::to_string(d.y.size()) + " != row count " +
                   std::to_string(n)});
  }
  if (static_cast<Eigen::Index>(d.plot_ids.size()) != n) {
    out.push_back({"plot_ids length " + std::to_string(d.plot_ids.size()) + " != row count " +
                   std::to_string(n)});
  }
  if (!d.regions.empty() && static_cast<Eigen::Index>(d.regions.size()) != n) {
    out.push_back({"regions length " + std::to_string(d.regions.size()) + " != row count " +
                   std::to_string(n)});
  }
  if (static_cast<std::size_t>(d.X.cols()) != d.grid.size()) {
    out.push_back({"column count " + std::to_string(d.X.cols()) + " != grid band count " +
                   std::to_string(d.grid.size())});
  }
  try {
    check_grid(d.grid);
  } catch (const ValidationError& e) {
    out.push_back({e.what()});
  }

  std::set<std::string> seen;
  for (std::size_t i = 0; i < d.plot_ids.size(); ++i) {
    if (!seen.insert(d.plot_ids[i]).second) {
      Diagnostic diag{"duplicate plot_id " + d.plot_ids[i], static_cast<Eigen::Index>(i)};
      diag.plot_id = d.plot_ids[i];
      out.push_back(diag);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
      if (!std::isfinite(d.X(i, j))) {
        out.push_back({"non-finite reflectance at row " + std::to_string(i) + ", band " +
                           std::to_string(j),
                       i, j});
      }
    }
  }
  for (Eigen::Index i = 0; i < d.y.size(); ++i) {
    if (!std::isfinite(d.y(i)) || d.y(i) < 0.0) {
      out.push_back({"invalid response at row " + std::to_string(i), i});
    }
  }
  return out;
}

void require_valid(const Dataset& d) {
  const auto diags = validate_dataset(d);
  if (!diags.empty()) throw ValidationError(diags.front().message);
}

Dataset take_rows(const Dataset& d, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.grid = d.grid;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.X.resize(n, d.X.cols());
  out.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = rows[i];
    out.X.row(i) = d.X.row(r);
    out.y(i) = d.y(r);
    out.plot_ids.push_back(d.plot_ids[r]);
    if (!d.regions.empty()) out.regions.push_back(d.regions[r]);
  }
  return out;
}

Dataset concat_datasets(const std::vector<Dataset>& parts) {
  if (parts.empty()) throw ValidationError("no datasets to concatenate");
  Eigen::Index n = 0;
  for (const auto& p : parts) {
    if (p.grid.centers_nm != parts.front().grid.centers_nm ||
        p.grid.fwhm_nm != parts.front().grid.fwhm_nm) {
      throw ValidationError("incompatible band grids");
    }
    n += p.rows();
  }
  Dataset out;
  out.grid = parts.front().grid;
  out.X.resize(n, parts.front().bands());
  out.y.resize(n);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.X.middleRows(at, p.rows()) = p.X;
    out.y.segment(at, p.rows()) = p.y;
    at += p.rows();
    out.plot_ids.insert(out.plot_ids.end(), p.plot_ids.begin(), p.plot_ids.end());
    if (p.regions.empty()) {
      out.regions.insert(out.regions.end(), static_cast<std::size_t>(p.rows()), std::string{});
    } else {
      out.regions.insert(out.regions.end(), p.regions.begin(), p.regions.end());
    }
  }
  require_valid(out);
  return out;
}

}  // namespace richspec
