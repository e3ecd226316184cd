#include "richspec/io.hpp"

#include "richspec/error.hpp"

#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <type_traits>
#include <variant>

namespace richspec {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view text, const std::string& where) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  const auto res = std::from_chars(b, e, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != e) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ValidationError("non-numeric value '" + std::string(text) + "' at " + where);
  }
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(line);
  }
  return out;
}

std::string where(std::size_t line, std::size_t col) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void expect_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                   const std::string& what) {
  if (got != want) {
    std::string w;
    for (const auto& s : want) w += (w.empty() ? "" : ",") + s;
    throw ValidationError("malformed " + what + " header, expected '" + w + "'");
  }
}

bool parse_flag(const std::string& s, const std::string& at) {
  if (s == "0" || s == "false") return false;
  if (s == "1" || s == "true") return true;
  throw ValidationError("invalid cloud flag '" + s + "' at " + at);
}

}  // namespace

std::string band_label(double center_nm, double fwhm_nm) {
  return "wl_" + format_double(center_nm) + "x" + format_double(fwhm_nm);
}

SpectraTable parse_spectra_csv(const std::string& text, const std::string& grid_id) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ValidationError("spectra file is empty");
  const auto header = split_csv_line(lines[0]);
  if (header.size() < 3 || header[0] != "plot_id" || header[1] != "cloud") {
    throw ValidationError("malformed spectra header, expected 'plot_id,cloud,wl_<center>x<fwhm>,...'");
  }
  SpectraTable t;
  t.grid.id = grid_id;
  for (std::size_t c = 2; c < header.size(); ++c) {
    const std::string& h = header[c];
    const auto x = h.find('x', 3);
    if (h.rfind("wl_", 0) != 0 || x == std::string::npos) {
      throw ValidationError("malformed wavelength column '" + h + "' at column " + std::to_string(c + 1));
    }
    const std::string at = "header column " + std::to_string(c + 1) + " ('" + h + "')";
    const double center = parse_double(std::string_view(h).substr(3, x - 3), at);
    const double fwhm = parse_double(std::string_view(h).substr(x + 1), at);
    if (!t.grid.centers_nm.empty() && !(center > t.grid.centers_nm.back())) {
      throw ValidationError("wavelengths not strictly increasing at column " +
                            std::to_string(c + 1) + " ('" + h + "')");
    }
    t.grid.centers_nm.push_back(center);
    t.grid.fwhm_nm.push_back(fwhm);
  }
  check_grid(t.grid);
  const auto m = static_cast<Eigen::Index>(t.grid.size());
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split_csv_line(lines[li]);
    if (cells.size() != header.size()) {
      throw ValidationError("line " + std::to_string(li + 1) + " has " + std::to_string(cells.size()) +
                            " fields, header has " + std::to_string(header.size()));
    }
    SpectralSample s;
    s.plot_id = cells[0];
    if (s.plot_id.empty()) throw ValidationError("empty plot_id at line " + std::to_string(li + 1));
    s.cloud_flagged = parse_flag(cells[1], where(li + 1, 2));
    s.grid_id = grid_id;
    s.values.resize(m);
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto col = static_cast<std::size_t>(b) + 2;
      s.values(b) = parse_double(cells[col], where(li + 1, col + 1));
      if (!std::isfinite(s.values(b))) {
        throw ValidationError("non-finite value at " + where(li + 1, col + 1));
      }
    }
    t.samples.push_back(std::move(s));
  }
  return t;
}

SpectraTable load_spectra_csv(const fs::path& path) {
  return parse_spectra_csv(read_file(path), path.stem().string());
}

std::string spectra_csv(const std::vector<SpectralSample>& samples, const BandGrid& grid) {
  std::string out = "plot_id,cloud";
  for (std::size_t b = 0; b < grid.size(); ++b) {
    out += "," + band_label(grid.centers_nm[b], grid.fwhm_nm[b]);
  }
  out += "\n";
  for (const auto& s : samples) {
    if (static_cast<std::size_t>(s.values.size()) != grid.size()) {
      throw ValidationError("spectrum " + s.plot_id + " does not match the grid");
    }
    out += s.plot_id + (s.cloud_flagged ? ",1" : ",0");
    for (Eigen::Index b = 0; b < s.values.size(); ++b) out += "," + format_double(s.values(b));
    out += "\n";
  }
  return out;
}

void write_spectra_csv(const fs::path& path, const std::vector<SpectralSample>& samples,
                       const BandGrid& grid) {
  write_file_atomic(path, spectra_csv(samples, grid));
}

std::vector<SpectralSample> dataset_samples(const Dataset& d) {
  std::vector<SpectralSample> out;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    out.push_back({d.plot_ids[static_cast<std::size_t>(i)], d.X.row(i).transpose(), d.grid.id, false});
  }
  return out;
}

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  auto num = [&](std::size_t at, std::size_t len, int& v) {
    const auto r = std::from_chars(s.data() + at, s.data() + at + len, v);
    return r.ec == std::errc{} && r.ptr == s.data() + at + len;
  };
  int y = 0, m = 0, d = 0;
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return false;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  return ymd.ok();
}

std::vector<RichnessPlot> parse_plots_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ValidationError("plots file is empty");
  expect_header(split_csv_line(lines[0]),
                {"plot_id", "region", "richness", "plot_area_m2", "survey_date"}, "plots");
  std::vector<RichnessPlot> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto c = split_csv_line(lines[li]);
    if (c.size() != 5) {
      throw ValidationError("line " + std::to_string(li + 1) + " must have 5 fields");
    }
    RichnessPlot p;
    p.plot_id = c[0];
    if (p.plot_id.empty()) throw ValidationError("empty plot_id at line " + std::to_string(li + 1));
    p.region = c[1];
    int r = 0;
    const auto res = std::from_chars(c[2].data(), c[2].data() + c[2].size(), r);
    if (c[2].empty() || res.ec != std::errc{} || res.ptr != c[2].data() + c[2].size()) {
      throw ValidationError("richness '" + c[2] + "' is not an integer at " + where(li + 1, 3));
    }
    if (r < 0) throw ValidationError("negative richness at " + where(li + 1, 3));
    p.richness = r;
    p.plot_area_m2 = parse_double(c[3], where(li + 1, 4));
    if (!(p.plot_area_m2 > 0.0)) throw ValidationError("plot area must be positive at " + where(li + 1, 4));
    if (!is_iso_date(c[4])) throw ValidationError("bad date '" + c[4] + "' at " + where(li + 1, 5));
    p.survey_date = c[4];
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<RichnessPlot> load_plots_csv(const fs::path& path) { return parse_plots_csv(read_file(path)); }

std::string plots_csv(const std::vector<RichnessPlot>& plots) {
  std::string out = "plot_id,region,richness,plot_area_m2,survey_date\n";
  for (const auto& p : plots) {
    out += p.plot_id + "," + p.region + "," + std::to_string(p.richness) + "," +
           format_double(p.plot_area_m2) + "," + p.survey_date + "\n";
  }
  return out;
}

std::vector<RichnessPlot> dataset_plots(const Dataset& d, const std::string& survey_date) {
  std::vector<RichnessPlot> out;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    out.push_back({d.plot_ids[u], d.regions.empty() ? std::string{} : d.regions[u],
                   static_cast<int>(std::lround(d.y(i))), 400.0, survey_date});
  }
  return out;
}

SrfSet parse_srf_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ValidationError("SRF file is empty");
  expect_header(split_csv_line(lines[0]), {"band_name", "center_nm", "fwhm_nm"}, "SRF");
  SrfSet srf;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto c = split_csv_line(lines[li]);
    if (c.size() != 3) throw ValidationError("line " + std::to_string(li + 1) + " must have 3 fields");
    srf.bands.push_back({c[0], parse_double(c[1], where(li + 1, 2)), parse_double(c[2], where(li + 1, 3))});
  }
  check_srf(srf);
  return srf;
}

SrfSet load_srf_csv(const fs::path& path) { return parse_srf_csv(read_file(path)); }

std::string srf_csv(const SrfSet& srf) {
  std::string out = "band_name,center_nm,fwhm_nm\n";
  for (const auto& b : srf.bands) {
    out += b.name + "," + format_double(b.center_nm) + "," + format_double(b.fwhm_nm) + "\n";
  }
  return out;
}

SrfSet sentinel2_vnir_srf() {
  return SrfSet{{{"B1", 442.7, 21.0},
                 {"B2", 492.4, 66.0},
                 {"B3", 559.8, 36.0},
                 {"B4", 664.6, 31.0},
                 {"B5", 704.1, 15.0},
                 {"B6", 740.5, 15.0},
                 {"B7", 782.8, 20.0},
                 {"B8", 832.8, 106.0},
                 {"B8A", 864.7, 21.0},
                 {"B9", 945.1, 20.0}}};
}

std::string variance_csv(const std::vector<VarianceRow>& rows) {
  std::string out = "component,eigenvalue,pct,cumulative\n";
  for (const auto& r : rows) {
    out += std::to_string(r.component) + "," + format_double(r.eigenvalue) + "," +
           format_double(r.pct_variance) + "," + format_double(r.cumulative_pct) + "\n";
  }
  return out;
}

std::string cv_folds_csv(const CVReport& r) {
  std::string out = "rep,fold,r,rmse\n";
  for (const auto& f : r.per_repetition) {
    out += std::to_string(f.rep) + "," + std::to_string(f.fold) + "," + format_double(f.r) + "," +
           format_double(f.rmse) + "\n";
  }
  return out;
}

std::string cv_predictions_csv(const CVReport& r) {
  std::string out = "plot_id,truth,prediction,rep,fold,region\n";
  for (const auto& p : r.pooled_predictions) {
    out += p.plot_id + "," + format_double(p.truth) + "," + format_double(p.prediction) + "," +
           std::to_string(p.rep) + "," + std::to_string(p.fold) + "," + p.region + "\n";
  }
  return out;
}

std::string cv_summary_csv(const CVReport& r) {
  std::string out = "metric,value\n";
  out += "repetitions," + std::to_string(r.repetitions) + "\n";
  out += "aggregation,per_fold_mean\n";
  out += "mean_r," + format_double(r.mean_r) + "\n";
  out += "mean_rmse," + format_double(r.mean_rmse) + "\n";
  out += "pooled_r," + format_double(r.pooled_r) + "\n";
  out += "pooled_rmse," + format_double(r.pooled_rmse) + "\n";
  return out;
}

void write_cv_report(const fs::path& dir, const CVReport& r) {
  write_file_atomic(dir / "cv_folds.csv", cv_folds_csv(r));
  write_file_atomic(dir / "cv_predictions.csv", cv_predictions_csv(r));
  write_file_atomic(dir / "cv_summary.csv", cv_summary_csv(r));
}

std::string importance_csv(const ImportanceProfile& p) {
  std::string out = "wavelength_nm,raw_importance,normalized_importance\n";
  for (std::size_t i = 0; i < p.band_centers_nm.size(); ++i) {
    const auto b = static_cast<Eigen::Index>(i);
    out += format_double(p.band_centers_nm[i]) + "," + format_double(p.raw(b)) + "," +
           format_double(p.normalized(b)) + "\n";
  }
  return out;
}

std::string importance_spread_csv(const ImportanceSpread& s) {
  std::string out = "wavelength_nm,mean_normalized_importance,sd_normalized_importance\n";
  for (std::size_t i = 0; i < s.band_centers_nm.size(); ++i) {
    const auto b = static_cast<Eigen::Index>(i);
    out += format_double(s.band_centers_nm[i]) + "," + format_double(s.mean(b)) + "," +
           format_double(s.sd(b)) + "\n";
  }
  return out;
}

std::string kernel_table_csv(const KernelSelection& s) {
  std::string out = "sigma,length,delta,mean_r,mean_rmse\n";
  for (const auto& c : s.table) {
    out += format_double(c.config.sigma) + "," + format_double(c.config.length_scale) + "," +
           format_double(c.config.white_noise) + "," + format_double(c.mean_r) + "," +
           format_double(c.mean_rmse) + "\n";
  }
  return out;
}

std::string component_table_csv(const ComponentSelection& s) {
  std::string out = "k,mean_r,mean_rmse\n";
  for (const auto& c : s.table) {
    out += std::to_string(c.k) + "," + format_double(c.mean_r) + "," + format_double(c.mean_rmse) + "\n";
  }
  return out;
}

// --- model files -------------------------------------------------------------

namespace {

constexpr std::string_view kMagic = "richspec-model 1";

class ModelWriter {
 public:
  void text(const std::string& name, const std::string& value) {
    out_ += "@text " + name + " " + value + "\n";
  }
  void matrix(const std::string& name, const Eigen::MatrixXd& M) {
    out_ += "@matrix " + name + " " + std::to_string(M.rows()) + " " + std::to_string(M.cols()) + "\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      for (Eigen::Index j = 0; j < M.cols(); ++j) {
        if (j) out_ += " ";
        out_ += format_double(M(i, j));
      }
      out_ += "\n";
    }
  }
  void scalar(const std::string& name, double v) { matrix(name, Eigen::MatrixXd::Constant(1, 1, v)); }
  void kernel(const KernelConfig& k) {
    scalar("kernel.sigma", k.sigma);
    scalar("kernel.length_scale", k.length_scale);
    scalar("kernel.white_noise", k.white_noise);
    text("kernel.terms", std::string(k.use_dot ? "d" : "-") + (k.use_rbf ? "r" : "-") +
                             (k.use_white ? "w" : "-"));
  }
  std::string str() { return std::string(kMagic) + "\n" + out_ + "@end\n"; }

 private:
  std::string out_;
};

class ModelReader {
 public:
  explicit ModelReader(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMagic) throw ValidationError("not a richspec model file (or unsupported version)");
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string tag, name;
      ls >> tag;
      if (tag == "@end") return;
      ls >> name;
      if (tag == "@text") {
        std::string value;
        std::getline(ls >> std::ws, value);
        texts_[name] = value;
      } else if (tag == "@matrix") {
        Eigen::Index r = 0, c = 0;
        if (!(ls >> r >> c) || r < 0 || c < 0) throw ValidationError("bad shape for " + name);
        Eigen::MatrixXd M(r, c);
        for (Eigen::Index i = 0; i < r; ++i) {
          if (!std::getline(in, line)) throw ValidationError("truncated matrix " + name);
          std::istringstream vs(line);
          for (Eigen::Index j = 0; j < c; ++j) {
            std::string tok;
            if (!(vs >> tok)) throw ValidationError("short row in matrix " + name);
            M(i, j) = parse_double(tok, "matrix " + name);
          }
        }
        matrices_[name] = std::move(M);
      } else if (!tag.empty()) {
        throw ValidationError("unknown model entry '" + tag + "'");
      }
    }
    throw ValidationError("model file missing @end");
  }

  const std::string& text(const std::string& name) const {
    const auto it = texts_.find(name);
    if (it == texts_.end()) throw ValidationError("model file missing " + name);
    return it->second;
  }
  const Eigen::MatrixXd& matrix(const std::string& name) const {
    const auto it = matrices_.find(name);
    if (it == matrices_.end()) throw ValidationError("model file missing " + name);
    return it->second;
  }
  double scalar(const std::string& name) const {
    const auto& M = matrix(name);
    if (M.size() != 1) throw ValidationError(name + " is not a scalar");
    return M(0, 0);
  }
  Eigen::VectorXd vector(const std::string& name) const {
    const auto& M = matrix(name);
    if (M.cols() != 1) throw ValidationError(name + " is not a column vector");
    return M.col(0);
  }
  KernelConfig kernel() const {
    KernelConfig k;
    k.sigma = scalar("kernel.sigma");
    k.length_scale = scalar("kernel.length_scale");
    k.white_noise = scalar("kernel.white_noise");
    const std::string& t = text("kernel.terms");
    if (t.size() != 3) throw ValidationError("bad kernel.terms");
    k.use_dot = t[0] == 'd';
    k.use_rbf = t[1] == 'r';
    k.use_white = t[2] == 'w';
    return k;
  }

 private:
  std::map<std::string, std::string> texts_;
  std::map<std::string, Eigen::MatrixXd> matrices_;
};

}  // namespace

std::string serialize_pipeline(const FittedPipeline& p) {
  ModelWriter w;
  const ComponentModel& e = p.extractor;
  w.text("extractor.method", to_string(e.method));
  w.matrix("extractor.W", e.W);
  w.matrix("extractor.x_mean", e.x_mean);
  w.matrix("extractor.x_scale", e.x_scale);
  w.scalar("extractor.y_mean", e.y_mean);
  w.matrix("extractor.eigenvalues", e.eigenvalues);

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KrrModel>) {
          w.text("regressor", "krr");
          w.kernel(m.kernel);
          w.scalar("krr.lambda", m.lambda);
          w.scalar("krr.y_mean", m.y_mean);
          w.matrix("krr.alpha", m.alpha);
          w.matrix("krr.train_T", m.train_T);
        } else if constexpr (std::is_same_v<T, GprModel>) {
          w.text("regressor", "gpr");
          w.kernel(m.kernel);
          w.scalar("gpr.epsilon", m.epsilon);
          w.scalar("gpr.y_mean", m.y_mean);
          w.scalar("gpr.mean_fn_value", m.mean_fn_value);
          w.scalar("gpr.log_marginal_likelihood", m.log_marginal_likelihood);
          w.matrix("gpr.alpha", m.alpha);
          w.matrix("gpr.train_T", m.train_T);
        } else {
          w.text("regressor", "rfr");
          w.text("rfr.seed", std::to_string(m.rng_seed));
          w.scalar("rfr.features", static_cast<double>(m.features));
          w.scalar("rfr.trees", static_cast<double>(m.trees.size()));
          for (std::size_t t = 0; t < m.trees.size(); ++t) {
            const auto& nodes = m.trees[t].nodes;
            Eigen::MatrixXd N(static_cast<Eigen::Index>(nodes.size()), 5);
            for (std::size_t i = 0; i < nodes.size(); ++i) {
              const auto r = static_cast<Eigen::Index>(i);
              N(r, 0) = nodes[i].feature;
              N(r, 1) = nodes[i].threshold;
              N(r, 2) = nodes[i].left;
              N(r, 3) = nodes[i].right;
              N(r, 4) = nodes[i].value;
            }
            w.matrix("rfr.tree." + std::to_string(t), N);
          }
        }
      },
      p.regressor);
  return w.str();
}

FittedPipeline deserialize_pipeline(const std::string& text) {
  const ModelReader r(text);
  FittedPipeline p;
  ComponentModel& e = p.extractor;
  e.method = parse_method(r.text("extractor.method"));
  e.W = r.matrix("extractor.W");
  e.x_mean = r.vector("extractor.x_mean");
  e.x_scale = r.vector("extractor.x_scale");
  e.y_mean = r.scalar("extractor.y_mean");
  e.eigenvalues = r.vector("extractor.eigenvalues");
  if (e.x_mean.size() != e.W.rows() || e.x_scale.size() != e.W.rows()) {
    throw ValidationError("extractor shapes are inconsistent");
  }

  const std::string kind = r.text("regressor");
  if (kind == "krr") {
    KrrModel m;
    m.kernel = r.kernel();
    m.lambda = r.scalar("krr.lambda");
    m.y_mean = r.scalar("krr.y_mean");
    m.alpha = r.vector("krr.alpha");
    m.train_T = r.matrix("krr.train_T");
    p.regressor = std::move(m);
  } else if (kind == "gpr") {
    GprModel m;
    m.kernel = r.kernel();
    m.epsilon = r.scalar("gpr.epsilon");
    m.y_mean = r.scalar("gpr.y_mean");
    m.mean_fn_value = r.scalar("gpr.mean_fn_value");
    m.log_marginal_likelihood = r.scalar("gpr.log_marginal_likelihood");
    m.alpha = r.vector("gpr.alpha");
    m.train_T = r.matrix("gpr.train_T");
    p.regressor = std::move(m);
  } else if (kind == "rfr") {
    RfrModel m;
    m.rng_seed = std::stoull(r.text("rfr.seed"));
    m.features = static_cast<Eigen::Index>(r.scalar("rfr.features"));
    const auto count = static_cast<std::size_t>(r.scalar("rfr.trees"));
    for (std::size_t t = 0; t < count; ++t) {
      const auto& N = r.matrix("rfr.tree." + std::to_string(t));
      if (N.cols() != 5 || N.rows() < 1) throw ValidationError("bad tree table " + std::to_string(t));
      RegressionTree tree;
      for (Eigen::Index i = 0; i < N.rows(); ++i) {
        TreeNode node{static_cast<int>(N(i, 0)), N(i, 1), static_cast<int>(N(i, 2)),
                      static_cast<int>(N(i, 3)), N(i, 4)};
        const int limit = static_cast<int>(N.rows());
        if (node.feature >= 0 && (node.left <= i || node.right <= i || node.left >= limit ||
                                  node.right >= limit || node.feature >= m.features)) {
          throw ValidationError("corrupt tree table " + std::to_string(t));
        }
        tree.nodes.push_back(node);
      }
      m.trees.push_back(std::move(tree));
    }
    p.regressor = std::move(m);
  } else {
    throw ValidationError("unknown regressor kind '" + kind + "'");
  }
  return p;
}

}  // namespace richspec
