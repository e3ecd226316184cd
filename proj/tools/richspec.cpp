// Command-line front end. Every subcommand reads an optional JSON config
// (--config) and then applies the flags given on the command line.

#include "richspec/error.hpp"
#include "richspec/importance.hpp"
#include "richspec/io.hpp"
#include "richspec/rng.hpp"
#include "richspec/run_config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <memory>

namespace rs = richspec;
namespace fs = std::filesystem;

namespace {

// Flag values plus the options that carry them, so that only flags actually
// given override the config file.
struct Flags {
  std::string config;
  std::string spectra, plots, srf, out;
  bool synthetic = false;
  rs::SyntheticSource synth;
  bool binning = true, mask = true, normalize = true, scale_columns = false;
  double bin_step = 10.2, bin_fwhm = 10.2, bin_start = 0, bin_end = 0;
  std::string method, regressor, kernel_terms, metric;
  long k = 2;
  double sigma = 0, length = 0, white = 0, lambda = 0, epsilon = 0, max_features = 0;
  bool gpr_optimize = true, bootstrap = true, tune_k = false, tune_kernel = false;
  int gpr_restarts = 3, trees = 100, min_leaf = 1, max_depth = -1, repetitions = 100;
  int grid_lo = -5, grid_hi = 5, k_min = 1, k_max = 10;
  std::uint64_t seed = 42;
  unsigned threads = 0;

  std::map<std::string, CLI::Option*> opts;

  bool given(const std::string& name) const {
    const auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

void add_common(CLI::App* app, Flags& f, bool needs_plots) {
  f.opts["config"] = app->add_option("--config", f.config, "JSON run configuration; flags override it")
                         ->check(CLI::ExistingFile);
  f.opts["spectra"] = app->add_option("--spectra", f.spectra, "spectra CSV (plot_id,cloud,wl_<c>x<w>,...)");
  if (needs_plots) {
    f.opts["plots"] = app->add_option("--plots", f.plots, "plots CSV (plot_id,region,richness,plot_area_m2,survey_date)");
    f.opts["synthetic"] = app->add_flag("--synthetic", f.synthetic, "use generated data instead of files");
    f.opts["synthetic-n"] = app->add_option("--synthetic-n", f.synth.n, "generated sample count");
    f.opts["synthetic-patterns"] = app->add_option("--synthetic-patterns", f.synth.latent_patterns,
                                                   "generated latent pattern count");
    f.opts["synthetic-noise-sd"] = app->add_option("--synthetic-noise-sd", f.synth.noise_sd,
                                                   "response noise sd of generated data");
  }
  f.opts["out"] = app->add_option("--out", f.out, "output directory");
  f.opts["binning"] = app->add_flag("--binning,!--no-binning", f.binning, "resample to a regular grid");
  f.opts["bin-step"] = app->add_option("--bin-step", f.bin_step, "binning step in nm");
  f.opts["bin-fwhm"] = app->add_option("--bin-fwhm", f.bin_fwhm, "binning band FWHM in nm");
  f.opts["bin-start"] = app->add_option("--bin-start", f.bin_start, "first bin centre in nm");
  f.opts["bin-end"] = app->add_option("--bin-end", f.bin_end, "last bin centre in nm");
  f.opts["mask"] = app->add_flag("--mask,!--no-mask", f.mask, "drop absorption and edge bands");
  f.opts["normalize"] = app->add_flag("--normalize,!--no-normalize", f.normalize,
                                      "divide each spectrum by its mean");
  f.opts["threads"] = app->add_option("--threads", f.threads, "worker cap, 0 = all cores");
}

void add_model(CLI::App* app, Flags& f) {
  f.opts["method"] = app->add_option("--method", f.method, "feature extraction: pca, cca or pls");
  f.opts["k"] = app->add_option("--k", f.k, "component count");
  f.opts["scale-columns"] = app->add_flag("--scale-columns", f.scale_columns, "scale bands to unit variance");
  f.opts["regressor"] = app->add_option("--regressor", f.regressor, "krr, gpr or rfr");
  f.opts["sigma"] = app->add_option("--sigma", f.sigma, "dot-product kernel offset");
  f.opts["length-scale"] = app->add_option("--length-scale", f.length, "RBF length scale");
  f.opts["white-noise"] = app->add_option("--white-noise", f.white, "white-noise kernel level");
  f.opts["kernel-terms"] = app->add_option("--kernel-terms", f.kernel_terms,
                                           "enabled kernel terms, subset of 'drw' (dot, rbf, white)");
  f.opts["lambda"] = app->add_option("--lambda", f.lambda, "KRR regularization");
  f.opts["epsilon"] = app->add_option("--epsilon", f.epsilon, "GPR noise level");
  f.opts["gpr-optimize"] = app->add_flag("--gpr-optimize,!--no-gpr-optimize", f.gpr_optimize,
                                         "fit GPR kernel parameters by marginal likelihood");
  f.opts["gpr-restarts"] = app->add_option("--gpr-restarts", f.gpr_restarts, "perturbed GPR restarts");
  f.opts["trees"] = app->add_option("--trees", f.trees, "RFR tree count");
  f.opts["bootstrap"] = app->add_flag("--bootstrap,!--no-bootstrap", f.bootstrap, "RFR bootstrap samples");
  f.opts["max-features"] = app->add_option("--max-features", f.max_features,
                                           "RFR fraction of features per split");
  f.opts["min-leaf"] = app->add_option("--min-leaf", f.min_leaf, "RFR minimum leaf size");
  f.opts["max-depth"] = app->add_option("--max-depth", f.max_depth, "RFR depth limit, -1 = none");
  f.opts["repetitions"] = app->add_option("--repetitions", f.repetitions, "CV repetitions");
  f.opts["seed"] = app->add_option("--seed", f.seed, "master seed");
}

void add_tuning(CLI::App* app, Flags& f, bool kernel, bool k) {
  if (kernel) {
    f.opts["grid-lo"] = app->add_option("--grid-lo", f.grid_lo, "lowest grid exponent (base 10)");
    f.opts["grid-hi"] = app->add_option("--grid-hi", f.grid_hi, "highest grid exponent (base 10)");
  }
  if (k) {
    f.opts["k-min"] = app->add_option("--k-min", f.k_min, "smallest component count");
    f.opts["k-max"] = app->add_option("--k-max", f.k_max, "largest component count");
  }
  f.opts["metric"] = app->add_option("--metric", f.metric, "max_r or min_rmse");
}

rs::RunConfig resolve(const Flags& f) {
  rs::RunConfig c = f.config.empty() ? rs::RunConfig{} : rs::load_run_config(f.config);
  auto set = [&](const char* name, auto& target, const auto& value) {
    if (f.given(name)) target = value;
  };
  set("spectra", c.spectra_path, f.spectra);
  set("plots", c.plots_path, f.plots);
  set("srf", c.srf_path, f.srf);
  set("out", c.output_dir, f.out);
  if (f.given("synthetic") || f.given("synthetic-n") || f.given("synthetic-patterns") ||
      f.given("synthetic-noise-sd")) {
    if (!c.synthetic) c.synthetic = rs::SyntheticSource{};
    set("synthetic-n", c.synthetic->n, f.synth.n);
    set("synthetic-patterns", c.synthetic->latent_patterns, f.synth.latent_patterns);
    set("synthetic-noise-sd", c.synthetic->noise_sd, f.synth.noise_sd);
  }
  if (f.given("binning")) {
    if (f.binning && !c.preprocess.binning) c.preprocess.binning = rs::BinningSpec{};
    if (!f.binning) c.preprocess.binning.reset();
  }
  if (c.preprocess.binning) {
    set("bin-step", c.preprocess.binning->step_nm, f.bin_step);
    set("bin-fwhm", c.preprocess.binning->fwhm_nm, f.bin_fwhm);
    if (f.given("bin-start")) c.preprocess.binning->start_nm = f.bin_start;
    if (f.given("bin-end")) c.preprocess.binning->end_nm = f.bin_end;
  }
  if (f.given("mask")) {
    if (f.mask && !c.preprocess.mask) c.preprocess.mask = rs::desis_default_mask();
    if (!f.mask) c.preprocess.mask.reset();
  }
  set("normalize", c.preprocess.normalize, f.normalize);

  rs::PipelineSpec& p = c.pipeline;
  if (f.given("method")) p.method = rs::parse_method(f.method);
  set("k", p.k, static_cast<Eigen::Index>(f.k));
  set("scale-columns", p.extraction.scale_columns, f.scale_columns);
  if (f.given("regressor")) p.regressor = rs::parse_regressor(f.regressor);
  set("sigma", p.kernel.sigma, f.sigma);
  set("length-scale", p.kernel.length_scale, f.length);
  set("white-noise", p.kernel.white_noise, f.white);
  if (f.given("kernel-terms")) {
    if (f.kernel_terms.find_first_not_of("drw") != std::string::npos) {
      throw rs::ConfigError("--kernel-terms takes letters from 'drw'");
    }
    p.kernel.use_dot = f.kernel_terms.find('d') != std::string::npos;
    p.kernel.use_rbf = f.kernel_terms.find('r') != std::string::npos;
    p.kernel.use_white = f.kernel_terms.find('w') != std::string::npos;
  }
  set("lambda", p.lambda, f.lambda);
  set("epsilon", p.epsilon, f.epsilon);
  set("gpr-optimize", p.gpr.optimize, f.gpr_optimize);
  set("gpr-restarts", p.gpr.restarts, f.gpr_restarts);
  set("trees", p.rfr.trees, f.trees);
  set("bootstrap", p.rfr.bootstrap, f.bootstrap);
  set("max-features", p.rfr.max_features, f.max_features);
  set("min-leaf", p.rfr.min_leaf, f.min_leaf);
  set("max-depth", p.rfr.max_depth, f.max_depth);
  set("repetitions", c.repetitions, f.repetitions);
  set("seed", c.seed, f.seed);
  set("grid-lo", c.grid_lo_exp, f.grid_lo);
  set("grid-hi", c.grid_hi_exp, f.grid_hi);
  set("k-min", c.k_min, f.k_min);
  set("k-max", c.k_max, f.k_max);
  set("tune-k", c.tune_k, f.tune_k);
  set("tune-kernel", c.tune_kernel, f.tune_kernel);
  if (f.given("metric")) c.selection_metric = rs::parse_selection_metric(f.metric);
  return c;
}

rs::CVConfig cv_of(const rs::RunConfig& c, unsigned threads) {
  rs::CVConfig cv;
  cv.repetitions = c.repetitions;
  cv.seed = c.seed;
  cv.threads = threads;
  return cv;
}

rs::Dataset prepared_data(const rs::RunConfig& c) {
  rs::check_run_config(c);
  return rs::preprocess_dataset(rs::load_run_data(c).assembly.dataset, c.preprocess);
}

void need(const std::string& value, const char* field) {
  if (value.empty()) throw rs::ConfigError(std::string("missing required field ") + field);
}

void report(const char* what, double r, double rmse) {
  std::printf("%s mean_r=%s mean_rmse=%s\n", what, rs::format_double(r).c_str(),
              rs::format_double(rmse).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Species richness from hyperspectral reflectance"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Flags>> all;
  auto flags = [&] { return all.emplace_back(std::make_unique<Flags>()).get(); };

  auto* pre = app.add_subcommand("preprocess", "bin, mask and normalize spectra -> preprocessed_spectra.csv");
  Flags* pre_f = flags();
  add_common(pre, *pre_f, false);

  auto* sim = app.add_subcommand("simulate-ms", "resample spectra onto sensor bands -> ms_spectra.csv");
  Flags* sim_f = flags();
  add_common(sim, *sim_f, false);
  sim_f->opts["srf"] = sim->add_option("--srf", sim_f->srf, "SRF CSV (default: built-in Sentinel-2 B1-B9)");

  auto* fit = app.add_subcommand("fit", "fit the pipeline on all data -> model.txt");
  Flags* fit_f = flags();
  add_common(fit, *fit_f, true);
  add_model(fit, *fit_f);

  auto* pred = app.add_subcommand("predict", "apply model.txt to spectra -> predictions.csv");
  Flags* pred_f = flags();
  add_common(pred, *pred_f, false);
  std::string model_path;
  pred->add_option("--model", model_path, "model file written by fit")->required()->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("evaluate", "repeated two-fold CV -> cv_folds.csv, cv_predictions.csv, cv_summary.csv");
  Flags* eval_f = flags();
  add_common(eval, *eval_f, true);
  add_model(eval, *eval_f);

  auto* tk = app.add_subcommand("tune-kernel", "grid search over sigma, l, delta -> kernel_selection.csv");
  Flags* tk_f = flags();
  add_common(tk, *tk_f, true);
  add_model(tk, *tk_f);
  add_tuning(tk, *tk_f, true, false);

  auto* tkk = app.add_subcommand("tune-k", "component count selection -> k_selection.csv");
  Flags* tkk_f = flags();
  add_common(tkk, *tkk_f, true);
  add_model(tkk, *tkk_f);
  add_tuning(tkk, *tkk_f, false, true);

  auto* imp = app.add_subcommand("importance", "band importance -> importance.csv, importance_spread.csv");
  Flags* imp_f = flags();
  add_common(imp, *imp_f, true);
  add_model(imp, *imp_f);

  auto* syn = app.add_subcommand("synth", "generate synthetic plots -> spectra.csv, plots.csv");
  Flags* syn_f = flags();
  syn_f->opts["out"] = syn->add_option("--out", syn_f->out, "output directory")->required();
  syn->add_option("--seed", syn_f->seed, "generator seed");
  syn->add_option("--n", syn_f->synth.n, "sample count");
  syn->add_option("--patterns", syn_f->synth.latent_patterns, "latent pattern count");
  syn->add_option("--noise-sd", syn_f->synth.noise_sd, "response noise sd");
  syn->add_option("--offset", syn_f->synth.richness_offset, "richness offset");
  syn->add_option("--band-noise-sd", syn_f->synth.band_noise_sd, "reflectance noise sd");
  syn->add_option("--region", syn_f->synth.region, "region label");

  auto* run = app.add_subcommand("run", "full pipeline with manifest");
  Flags* run_f = flags();
  add_common(run, *run_f, true);
  add_model(run, *run_f);
  add_tuning(run, *run_f, true, true);
  run_f->opts["srf"] = run->add_option("--srf", run_f->srf, "SRF CSV for an extra multispectral CV");
  run_f->opts["tune-k"] = run->add_flag("--tune-k", run_f->tune_k, "select k before evaluating");
  run_f->opts["tune-kernel"] = run->add_flag("--tune-kernel", run_f->tune_kernel,
                                             "grid-search the kernel before evaluating");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "richspec: error: %s\n", e.what());
    return 1;
  }

  try {
    if (*pre) {
      const rs::RunConfig c = resolve(*pre_f);
      need(c.spectra_path, "spectra_path");
      need(c.output_dir, "output_dir");
      const rs::SpectraTable t = rs::load_spectra_csv(c.spectra_path);
      rs::BandGrid grid;
      const auto out = rs::preprocess_samples(t.samples, t.grid, c.preprocess, grid);
      rs::write_spectra_csv(fs::path(c.output_dir) / "preprocessed_spectra.csv", out, grid);
      std::printf("preprocessed %zu spectra onto %zu bands\n", out.size(), grid.size());
    } else if (*sim) {
      const rs::RunConfig c = resolve(*sim_f);
      need(c.spectra_path, "spectra_path");
      need(c.output_dir, "output_dir");
      const rs::SpectraTable t = rs::load_spectra_csv(c.spectra_path);
      const rs::SrfSet srf = c.srf_path.empty() ? rs::sentinel2_vnir_srf() : rs::load_srf_csv(c.srf_path);
      std::vector<rs::SpectralSample> out;
      for (const auto& s : t.samples) {
        rs::SpectralSample m = s;
        m.values = rs::simulate_multispectral(s.values, t.grid, srf).values;
        m.grid_id = "multispectral";
        out.push_back(std::move(m));
      }
      rs::write_spectra_csv(fs::path(c.output_dir) / "ms_spectra.csv", out, srf.as_grid("multispectral"));
      std::printf("simulated %zu spectra on %zu bands\n", out.size(), srf.size());
    } else if (*fit) {
      const rs::RunConfig c = resolve(*fit_f);
      const rs::Dataset d = prepared_data(c);
      rs::PipelineSpec spec = c.pipeline;
      spec.rfr.threads = fit_f->threads;
      const auto model = rs::fit_pipeline(spec, d.X, d.y, rs::substream_seed(c.seed, 0x46554C4C));
      std::visit(
          [](const auto& m) {
            if constexpr (!std::is_same_v<std::decay_t<decltype(m)>, rs::RfrModel>) {
              if (m.duplicate_rows) {
                std::fprintf(stderr, "richspec: warning: duplicate feature rows share the white-noise term\n");
              }
            }
          },
          model.regressor);
      rs::write_file_atomic(fs::path(c.output_dir) / "model.txt", rs::serialize_pipeline(model));
      std::printf("fitted %s k=%ld + %s on %ld samples\n", rs::to_string(spec.method).c_str(),
                  static_cast<long>(spec.k), rs::to_string(spec.regressor).c_str(),
                  static_cast<long>(d.rows()));
    } else if (*pred) {
      const rs::RunConfig c = resolve(*pred_f);
      need(c.spectra_path, "spectra_path");
      need(c.output_dir, "output_dir");
      const auto model = rs::deserialize_pipeline(rs::read_file(model_path));
      const rs::SpectraTable t = rs::load_spectra_csv(c.spectra_path);
      rs::BandGrid grid;
      const auto samples = rs::preprocess_samples(t.samples, t.grid, c.preprocess, grid);
      if (static_cast<Eigen::Index>(grid.size()) != model.extractor.bands()) {
        throw rs::ValidationError("spectra have " + std::to_string(grid.size()) +
                                  " bands after preprocessing, model expects " +
                                  std::to_string(model.extractor.bands()));
      }
      std::string csv = "plot_id,prediction\n";
      for (const auto& s : samples) {
        if (s.cloud_flagged) continue;
        const Eigen::MatrixXd X = s.values.transpose();
        csv += s.plot_id + "," + rs::format_double(rs::predict(model, X)(0)) + "\n";
      }
      rs::write_file_atomic(fs::path(c.output_dir) / "predictions.csv", csv);
    } else if (*eval) {
      const rs::RunConfig c = resolve(*eval_f);
      const rs::Dataset d = prepared_data(c);
      const rs::CVReport r = rs::two_fold_cv(d, c.pipeline, cv_of(c, eval_f->threads));
      rs::write_cv_report(c.output_dir, r);
      report("cv", r.mean_r, r.mean_rmse);
    } else if (*tk) {
      const rs::RunConfig c = resolve(*tk_f);
      const rs::Dataset d = prepared_data(c);
      const auto sel = rs::grid_search_kernel(d, c.pipeline, rs::GridSpec::decades(c.grid_lo_exp, c.grid_hi_exp),
                                              cv_of(c, tk_f->threads), c.selection_metric);
      rs::write_file_atomic(fs::path(c.output_dir) / "kernel_selection.csv", rs::kernel_table_csv(sel));
      std::printf("best sigma=%s length_scale=%s white_noise=%s\n", rs::format_double(sel.best.sigma).c_str(),
                  rs::format_double(sel.best.length_scale).c_str(),
                  rs::format_double(sel.best.white_noise).c_str());
    } else if (*tkk) {
      const rs::RunConfig c = resolve(*tkk_f);
      const rs::Dataset d = prepared_data(c);
      const auto sel = rs::select_components(d, c.pipeline, c.k_min, c.k_max, cv_of(c, tkk_f->threads),
                                             c.selection_metric);
      rs::write_file_atomic(fs::path(c.output_dir) / "k_selection.csv", rs::component_table_csv(sel));
      std::printf("best k=%d\n", sel.best_k);
    } else if (*imp) {
      const rs::RunConfig c = resolve(*imp_f);
      const rs::Dataset d = prepared_data(c);
      const auto& p = c.pipeline;
      const auto prof = rs::importance_report(d, p.method, p.k, p.extraction);
      const auto spread = rs::importance_cv(d, p.method, p.k, cv_of(c, imp_f->threads), p.extraction);
      rs::write_file_atomic(fs::path(c.output_dir) / "importance.csv", rs::importance_csv(prof));
      rs::write_file_atomic(fs::path(c.output_dir) / "importance_spread.csv", rs::importance_spread_csv(spread));
    } else if (*syn) {
      rs::SyntheticSpec s;
      s.seed = syn_f->seed;
      s.n = syn_f->synth.n;
      s.grid = rs::desis_like_grid52();
      s.latent_patterns = syn_f->synth.latent_patterns;
      s.noise_sd = syn_f->synth.noise_sd;
      s.richness_offset = syn_f->synth.richness_offset;
      s.band_noise_sd = syn_f->synth.band_noise_sd;
      s.region = syn_f->synth.region;
      const rs::Dataset d = rs::generate_synthetic_dataset(s);
      rs::write_spectra_csv(fs::path(syn_f->out) / "spectra.csv", rs::dataset_samples(d), d.grid);
      rs::write_file_atomic(fs::path(syn_f->out) / "plots.csv", rs::plots_csv(rs::dataset_plots(d)));
      std::printf("wrote %ld synthetic plots\n", static_cast<long>(d.rows()));
    } else if (*run) {
      const rs::RunConfig c = resolve(*run_f);
      const auto summary = rs::run_pipeline(c, run_f->threads);
      report("cv", summary.cv.mean_r, summary.cv.mean_rmse);
    }
  } catch (const rs::Error& e) {
    std::fprintf(stderr, "richspec: error: %s\n", e.what());
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "richspec: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
