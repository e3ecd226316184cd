#include "richspec/run_config.hpp"

#include "richspec/error.hpp"
#include "richspec/importance.hpp"
#include "richspec/io.hpp"
#include "richspec/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace richspec {

namespace fs = std::filesystem;
using nlohmann::json;

PreprocessSpec default_preprocess() {
  PreprocessSpec p;
  p.binning = BinningSpec{};
  p.mask = desis_default_mask();
  p.normalize = true;
  return p;
}

std::string tool_version() { return "0.1.0"; }

// --- JSON --------------------------------------------------------------------

namespace {

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json kernel_json(const KernelConfig& k) {
  return {{"sigma", k.sigma},     {"length_scale", k.length_scale}, {"white_noise", k.white_noise},
          {"dot", k.use_dot},     {"rbf", k.use_rbf},               {"white", k.use_white}};
}

// Reads an object field by field; leftover keys are rejected.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + " must be an object");
    for (const auto& [key, value] : j_.items()) pending_.insert(key);
  }

  const json* get(const std::string& key) {
    pending_.erase(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T>
  void read(const std::string& key, T& out) {
    const json* v = get(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_arithmetic_v<T>) {
        if (!v->is_number()) throw ConfigError("");
        if constexpr (std::is_integral_v<T>) {
          if (!v->is_number_integer()) throw ConfigError("");
          if constexpr (std::is_unsigned_v<T>) {
            if (!v->is_number_unsigned()) throw ConfigError("");
          }
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ConfigError("");
      }
      out = v->get<T>();
    } catch (const std::exception&) {
      throw ConfigError("invalid value for " + field(key));
    }
  }

  void optional_number(const std::string& key, std::optional<double>& out) {
    const json* v = get(key);
    if (!v) return;
    if (v->is_null()) {
      out.reset();
    } else if (v->is_number()) {
      out = v->get<double>();
    } else {
      throw ConfigError("invalid value for " + field(key));
    }
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    if (!pending_.empty()) throw ConfigError("unknown config field " + field(*pending_.begin()));
  }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> pending_;
};

template <class Enum, class Parse>
void read_enum(Fields& f, const std::string& key, Enum& out, Parse parse) {
  std::string s;
  if (!f.get(key)) return;
  f.read(key, s);
  try {
    out = parse(s);
  } catch (const ConfigError& e) {
    throw ConfigError(f.field(key) + ": " + e.what());
  }
}

}  // namespace

json run_config_to_json(const RunConfig& c) {
  json j;
  j["spectra_path"] = c.spectra_path;
  j["plots_path"] = c.plots_path;
  j["srf_path"] = c.srf_path;
  j["output_dir"] = c.output_dir;
  if (c.synthetic) {
    const auto& s = *c.synthetic;
    j["synthetic"] = {{"n", s.n},
                      {"latent_patterns", s.latent_patterns},
                      {"noise_sd", s.noise_sd},
                      {"richness_offset", s.richness_offset},
                      {"band_noise_sd", s.band_noise_sd},
                      {"region", s.region}};
  } else {
    j["synthetic"] = nullptr;
  }

  json pre;
  if (c.preprocess.binning) {
    const auto& b = *c.preprocess.binning;
    pre["binning"] = {{"step_nm", b.step_nm},
                      {"fwhm_nm", b.fwhm_nm},
                      {"start_nm", opt_number(b.start_nm)},
                      {"end_nm", opt_number(b.end_nm)}};
  } else {
    pre["binning"] = nullptr;
  }
  if (c.preprocess.mask) {
    pre["mask"] = {{"remove_centers_nm", c.preprocess.mask->remove_centers_nm},
                   {"tolerance_nm", c.preprocess.mask->tolerance_nm}};
  } else {
    pre["mask"] = nullptr;
  }
  pre["normalize"] = c.preprocess.normalize;
  j["preprocess"] = pre;

  const PipelineSpec& p = c.pipeline;
  j["method"] = to_string(p.method);
  j["k"] = p.k;
  j["scale_columns"] = p.extraction.scale_columns;
  j["regressor"] = to_string(p.regressor);
  j["kernel"] = kernel_json(p.kernel);
  j["lambda"] = p.lambda;
  j["epsilon"] = p.epsilon;
  j["gpr"] = {{"optimize", p.gpr.optimize},
              {"restarts", p.gpr.restarts},
              {"max_iterations", p.gpr.max_iterations},
              {"gradient_tol", p.gpr.gradient_tol},
              {"restart_scale", p.gpr.restart_scale},
              {"seed", p.gpr.seed}};
  j["rfr"] = {{"trees", p.rfr.trees},
              {"bootstrap", p.rfr.bootstrap},
              {"max_features", p.rfr.max_features},
              {"min_leaf", p.rfr.min_leaf},
              {"max_depth", p.rfr.max_depth}};
  j["repetitions"] = c.repetitions;
  j["seed"] = c.seed;
  j["tuning"] = {{"tune_kernel", c.tune_kernel}, {"grid_lo_exp", c.grid_lo_exp},
                 {"grid_hi_exp", c.grid_hi_exp}, {"tune_k", c.tune_k},
                 {"k_min", c.k_min},             {"k_max", c.k_max},
                 {"metric", to_string(c.selection_metric)}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  Fields f(j, "");
  f.read("spectra_path", c.spectra_path);
  f.read("plots_path", c.plots_path);
  f.read("srf_path", c.srf_path);
  f.read("output_dir", c.output_dir);

  if (const json* s = f.get("synthetic"); s && !s->is_null()) {
    SyntheticSource src;
    Fields g(*s, "synthetic");
    g.read("n", src.n);
    g.read("latent_patterns", src.latent_patterns);
    g.read("noise_sd", src.noise_sd);
    g.read("richness_offset", src.richness_offset);
    g.read("band_noise_sd", src.band_noise_sd);
    g.read("region", src.region);
    g.finish();
    c.synthetic = src;
  }

  if (const json* pj = f.get("preprocess")) {
    Fields g(*pj, "preprocess");
    if (const json* b = g.get("binning")) {
      if (b->is_null()) {
        c.preprocess.binning.reset();
      } else {
        BinningSpec spec;
        Fields h(*b, "preprocess.binning");
        h.read("step_nm", spec.step_nm);
        h.read("fwhm_nm", spec.fwhm_nm);
        h.optional_number("start_nm", spec.start_nm);
        h.optional_number("end_nm", spec.end_nm);
        h.finish();
        c.preprocess.binning = spec;
      }
    }
    if (const json* m = g.get("mask")) {
      if (m->is_null()) {
        c.preprocess.mask.reset();
      } else {
        BandMask mask = desis_default_mask();
        Fields h(*m, "preprocess.mask");
        h.read("remove_centers_nm", mask.remove_centers_nm);
        h.read("tolerance_nm", mask.tolerance_nm);
        h.finish();
        c.preprocess.mask = mask;
      }
    }
    g.read("normalize", c.preprocess.normalize);
    g.finish();
  }

  PipelineSpec& p = c.pipeline;
  read_enum(f, "method", p.method, parse_method);
  f.read("k", p.k);
  f.read("scale_columns", p.extraction.scale_columns);
  read_enum(f, "regressor", p.regressor, parse_regressor);
  if (const json* k = f.get("kernel")) {
    Fields g(*k, "kernel");
    g.read("sigma", p.kernel.sigma);
    g.read("length_scale", p.kernel.length_scale);
    g.read("white_noise", p.kernel.white_noise);
    g.read("dot", p.kernel.use_dot);
    g.read("rbf", p.kernel.use_rbf);
    g.read("white", p.kernel.use_white);
    g.finish();
  }
  f.read("lambda", p.lambda);
  f.read("epsilon", p.epsilon);
  if (const json* g_ = f.get("gpr")) {
    Fields g(*g_, "gpr");
    g.read("optimize", p.gpr.optimize);
    g.read("restarts", p.gpr.restarts);
    g.read("max_iterations", p.gpr.max_iterations);
    g.read("gradient_tol", p.gpr.gradient_tol);
    g.read("restart_scale", p.gpr.restart_scale);
    g.read("seed", p.gpr.seed);
    g.finish();
  }
  if (const json* r = f.get("rfr")) {
    Fields g(*r, "rfr");
    g.read("trees", p.rfr.trees);
    g.read("bootstrap", p.rfr.bootstrap);
    g.read("max_features", p.rfr.max_features);
    g.read("min_leaf", p.rfr.min_leaf);
    g.read("max_depth", p.rfr.max_depth);
    g.finish();
  }
  f.read("repetitions", c.repetitions);
  f.read("seed", c.seed);
  if (const json* t = f.get("tuning")) {
    Fields g(*t, "tuning");
    g.read("tune_kernel", c.tune_kernel);
    g.read("grid_lo_exp", c.grid_lo_exp);
    g.read("grid_hi_exp", c.grid_hi_exp);
    g.read("tune_k", c.tune_k);
    g.read("k_min", c.k_min);
    g.read("k_max", c.k_max);
    read_enum(g, "metric", c.selection_metric, parse_selection_metric);
    g.finish();
  }
  f.finish();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

void check_run_config(const RunConfig& c) {
  auto need_file = [](const std::string& value, const std::string& field) {
    if (value.empty()) throw ConfigError("missing required field " + field);
    if (!fs::is_regular_file(value)) throw ConfigError(field + " does not exist: " + value);
  };
  if (c.output_dir.empty()) throw ConfigError("missing required field output_dir");
  if (c.synthetic) {
    if (c.synthetic->n < 4) throw ConfigError("synthetic.n must be at least 4");
    if (c.synthetic->latent_patterns < 1) throw ConfigError("synthetic.latent_patterns must be positive");
    if (!(c.synthetic->noise_sd >= 0.0)) throw ConfigError("synthetic.noise_sd must be non-negative");
    if (!(c.synthetic->band_noise_sd >= 0.0)) throw ConfigError("synthetic.band_noise_sd must be non-negative");
  } else {
    need_file(c.spectra_path, "spectra_path");
    need_file(c.plots_path, "plots_path");
  }
  if (!c.srf_path.empty() && !fs::is_regular_file(c.srf_path)) {
    throw ConfigError("srf_path does not exist: " + c.srf_path);
  }
  if (c.pipeline.k < 1) throw ConfigError("k must be positive");
  if (c.repetitions < 1) throw ConfigError("repetitions must be positive");
  if (!(c.pipeline.lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(c.pipeline.epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
  check_kernel(c.pipeline.kernel);
  if (c.pipeline.rfr.trees < 1) throw ConfigError("rfr.trees must be positive");
  if (!(c.pipeline.rfr.max_features > 0.0 && c.pipeline.rfr.max_features <= 1.0)) {
    throw ConfigError("rfr.max_features must lie in (0, 1]");
  }
  if (c.preprocess.binning && !(c.preprocess.binning->step_nm > 0.0 && c.preprocess.binning->fwhm_nm > 0.0)) {
    throw ConfigError("preprocess.binning step and fwhm must be positive");
  }
  if (c.tune_kernel) {
    if (c.pipeline.regressor == Regressor::RFR) throw ConfigError("tuning.tune_kernel needs krr or gpr");
    if (c.grid_hi_exp < c.grid_lo_exp) throw ConfigError("tuning.grid_hi_exp below grid_lo_exp");
  }
  if (c.tune_k && (c.k_min < 1 || c.k_max < c.k_min)) throw ConfigError("tuning k range is empty");
}

// --- run ---------------------------------------------------------------------

RunData load_run_data(const RunConfig& c) {
  RunData out;
  if (c.synthetic) {
    SyntheticSpec s;
    s.seed = c.seed;
    s.n = c.synthetic->n;
    s.grid = desis_like_grid52();
    s.latent_patterns = c.synthetic->latent_patterns;
    s.noise_sd = c.synthetic->noise_sd;
    s.richness_offset = c.synthetic->richness_offset;
    s.band_noise_sd = c.synthetic->band_noise_sd;
    s.region = c.synthetic->region;
    out.assembly.dataset = generate_synthetic_dataset(s);
    out.plots = dataset_plots(out.assembly.dataset);
    return out;
  }
  const SpectraTable spectra = load_spectra_csv(c.spectra_path);
  const auto plots = load_plots_csv(c.plots_path);
  out.assembly = assemble_dataset(spectra.samples, plots, spectra.grid);
  std::map<std::string, const RichnessPlot*> by_id;
  for (const auto& p : plots) by_id[p.plot_id] = &p;
  for (const auto& id : out.assembly.dataset.plot_ids) out.plots.push_back(*by_id.at(id));
  return out;
}

namespace {

// FNV-1a, to tie the manifest to the exact input bytes.
std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json input_record(const std::string& path) {
  const std::string bytes = read_file(path);
  return {{"path", path}, {"bytes", bytes.size()}, {"fnv1a64", digest(bytes)}};
}

std::string compiler_id() {
#if defined(__clang__)
  return "clang " __clang_version__;
#elif defined(__GNUC__)
  return "gcc " __VERSION__;
#else
  return "unknown";
#endif
}

void write_text(const fs::path& dir, const std::string& name, const std::string& content,
                std::vector<std::string>& written) {
  write_file_atomic(dir / name, content);
  written.push_back(name);
}

}  // namespace

RunSummary run_pipeline(const RunConfig& c, unsigned threads) {
  check_run_config(c);
  const fs::path dir(c.output_dir);
  const fs::path marker = dir / "INCOMPLETE";
  fs::create_directories(dir);
  fs::remove(dir / "manifest.json");
  write_file_atomic(marker, "running\n");

  try {
    std::vector<std::string> written;
    const RunData data = load_run_data(c);
    const Dataset d = preprocess_dataset(data.assembly.dataset, c.preprocess);
    require_valid(d);
    write_text(dir, "preprocessed_spectra.csv", spectra_csv(dataset_samples(d), d.grid), written);
    write_text(dir, "plots.csv", plots_csv(data.plots), written);

    PipelineSpec spec = c.pipeline;
    CVConfig cv;
    cv.repetitions = c.repetitions;
    cv.seed = c.seed;
    cv.threads = threads;

    if (c.tune_k) {
      const ComponentSelection sel =
          select_components(d, spec, c.k_min, c.k_max, cv, c.selection_metric);
      spec.k = sel.best_k;
      write_text(dir, "k_selection.csv", component_table_csv(sel), written);
    }
    if (c.tune_kernel) {
      const KernelSelection sel = grid_search_kernel(
          d, spec, GridSpec::decades(c.grid_lo_exp, c.grid_hi_exp), cv, c.selection_metric);
      spec.kernel = sel.best;
      write_text(dir, "kernel_selection.csv", kernel_table_csv(sel), written);
    }

    RunSummary summary;
    summary.cv = two_fold_cv(d, spec, cv);
    summary.k = spec.k;
    summary.kernel = spec.kernel;
    write_text(dir, "cv_folds.csv", cv_folds_csv(summary.cv), written);
    write_text(dir, "cv_predictions.csv", cv_predictions_csv(summary.cv), written);
    write_text(dir, "cv_summary.csv", cv_summary_csv(summary.cv), written);

    spec.rfr.threads = threads;
    const FittedPipeline full = fit_pipeline(spec, d.X, d.y, substream_seed(c.seed, 0x46554C4C));
    write_text(dir, "model.txt", serialize_pipeline(full), written);
    write_text(dir, "variance.csv", variance_csv(variance_table(full.extractor, d.X)), written);

    ImportanceProfile prof = band_importance(
        full.extractor, partial_correlations(transform(full.extractor, d.X), d.y));
    prof.band_centers_nm = d.grid.centers_nm;
    write_text(dir, "importance.csv", importance_csv(prof), written);

    json ms = nullptr;
    if (!c.srf_path.empty()) {
      const SrfSet srf = load_srf_csv(c.srf_path);
      const Dataset& raw = data.assembly.dataset;
      Dataset msd = raw;
      msd.grid = srf.as_grid("multispectral");
      msd.X.resize(raw.rows(), static_cast<Eigen::Index>(srf.size()));
      for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        Eigen::VectorXd v = simulate_multispectral(raw.X.row(i).transpose(), raw.grid, srf).values;
        if (c.preprocess.normalize) v = mean_normalize(v);
        msd.X.row(i) = v.transpose();
      }
      write_text(dir, "ms_spectra.csv", spectra_csv(dataset_samples(msd), msd.grid), written);
      const CVReport msr = two_fold_cv(msd, spec, cv);
      write_text(dir, "ms_cv_summary.csv", cv_summary_csv(msr), written);
      ms = {{"mean_r", msr.mean_r}, {"mean_rmse", msr.mean_rmse}};
    }

    json manifest;
    manifest["tool"] = "richspec";
    manifest["version"] = tool_version();
    manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                                std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION);
    manifest["json_version"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                               std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    manifest["compiler"] = compiler_id();
    manifest["seed"] = c.seed;
    manifest["config"] = run_config_to_json(c);
    json inputs = json::object();
    if (!c.synthetic) {
      inputs["spectra"] = input_record(c.spectra_path);
      inputs["plots"] = input_record(c.plots_path);
    }
    if (!c.srf_path.empty()) inputs["srf"] = input_record(c.srf_path);
    manifest["inputs"] = inputs;
    manifest["data"] = {{"rows", d.rows()},
                        {"bands", d.bands()},
                        {"grid_id", d.grid.id},
                        {"dropped_cloud", data.assembly.dropped_cloud},
                        {"unmatched_spectra", data.assembly.unmatched_spectra},
                        {"unmatched_plots", data.assembly.unmatched_plots}};
    manifest["resolved"] = {{"k", spec.k}, {"kernel", kernel_json(spec.kernel)}};
    manifest["results"] = {{"mean_r", summary.cv.mean_r},
                           {"mean_rmse", summary.cv.mean_rmse},
                           {"pooled_r", summary.cv.pooled_r},
                           {"pooled_rmse", summary.cv.pooled_rmse},
                           {"multispectral", ms}};
    manifest["outputs"] = written;
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    fs::remove(marker);
    return summary;
  } catch (const Error& e) {
    write_file_atomic(marker, std::string("failed: ") + e.what() + "\n");
    throw;
  }
}

}  // namespace richspec
