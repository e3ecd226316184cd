#include "helpers.hpp"
#include "richspec/error.hpp"
#include "richspec/io.hpp"
#include "richspec/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace richspec;

namespace {

Dataset small_synth() {
  SyntheticSpec s;
  s.seed = 91;
  s.n = 24;
  s.grid = desis_like_grid52();
  s.noise_sd = 1.0;
  return generate_synthetic_dataset(s);
}

void check_roundtrip(const PipelineSpec& spec) {
  const Dataset d = small_synth();
  const FittedPipeline p = fit_pipeline(spec, d.X, d.y, 5);
  const std::string text = serialize_pipeline(p);
  const FittedPipeline q = deserialize_pipeline(text);
  CHECK(predict(q, d.X) == predict(p, d.X));
  CHECK(serialize_pipeline(q) == text);
}

}  // namespace

TEST_CASE("spectra header example") {
  const SpectraTable t = parse_spectra_csv("plot_id,cloud,wl_402.8x2.55,wl_405.4x2.55\nP1,0,0.1,0.2\n");
  REQUIRE(t.samples.size() == 1);
  CHECK(t.grid.size() == 2);
  CHECK(t.grid.centers_nm[1] == 405.4);
  CHECK(t.grid.fwhm_nm[0] == 2.55);
  CHECK(t.samples[0].values(1) == 0.2);
  CHECK_FALSE(t.samples[0].cloud_flagged);
  CHECK(parse_spectra_csv("plot_id,cloud,wl_500x10\nP1,true,0.3\n").samples[0].cloud_flagged);
}

TEST_CASE("spectra parse errors") {
  CHECK_THROWS_WITH_AS(parse_spectra_csv("plot_id,cloud,wl_405.4x2.55,wl_402.8x2.55\nP1,0,0.1,0.2\n"),
                       doctest::Contains("wl_402.8x2.55"), ValidationError);
  CHECK_THROWS_AS(parse_spectra_csv("id,cloud,wl_500x10\nP1,0,0.1\n"), ValidationError);
  CHECK_THROWS_AS(parse_spectra_csv("plot_id,cloud,band500\nP1,0,0.1\n"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_spectra_csv("plot_id,cloud,wl_500x10\nP1,0,abc\n"), doctest::Contains("line 2, column 3"),
                       ValidationError);
  CHECK_THROWS_AS(parse_spectra_csv("plot_id,cloud,wl_500x10\nP1,0,0.1,0.2\n"), ValidationError);
}

TEST_CASE("spectra round trip at full precision") {
  std::mt19937_64 g(92);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const BandGrid grid = make_grid({400.1, 410.3, 420.7}, 10.2, "x");
  std::vector<SpectralSample> in;
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd v(3);
    for (auto& x : v) x = u(g) / 3.0;
    in.push_back({"S" + std::to_string(i), v, "x", i == 2});
  }
  const SpectraTable back = parse_spectra_csv(spectra_csv(in, grid));
  REQUIRE(back.samples.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back.samples[i].values == in[i].values);
    CHECK(back.samples[i].plot_id == in[i].plot_id);
    CHECK(back.samples[i].cloud_flagged == in[i].cloud_flagged);
  }
  CHECK(back.grid.centers_nm == grid.centers_nm);
  CHECK(back.grid.fwhm_nm == grid.fwhm_nm);
}

TEST_CASE("number formatting") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23}) {
    CHECK(parse_double(format_double(v), "t") == v);
  }
  CHECK(std::isnan(parse_double(format_double(std::numeric_limits<double>::quiet_NaN()), "t")));
  CHECK_THROWS_WITH_AS(parse_double("1.2.3", "row 4 column x"), doctest::Contains("row 4 column x"),
                       ValidationError);
  CHECK(split_csv_line("a,,b") == std::vector<std::string>{"a", "", "b"});
}

TEST_CASE("plots file") {
  const auto plots = parse_plots_csv(
      "plot_id,region,richness,plot_area_m2,survey_date\nP1,snowy_mountains,23,400,2016-02-24\n");
  REQUIRE(plots.size() == 1);
  CHECK(plots[0].richness == 23);
  CHECK(plots[0].region == "snowy_mountains");
  CHECK(plots[0].plot_area_m2 == 400.0);
  CHECK(plots[0].survey_date == "2016-02-24");

  const std::string header = "plot_id,region,richness,plot_area_m2,survey_date\n";
  CHECK_THROWS_AS(parse_plots_csv(header + "P1,r,-1,400,2016-02-24\n"), ValidationError);
  CHECK_THROWS_AS(parse_plots_csv(header + "P1,r,2.5,400,2016-02-24\n"), ValidationError);
  CHECK_THROWS_AS(parse_plots_csv(header + "P1,r,3,400,2016-02-30\n"), ValidationError);
  CHECK_THROWS_AS(parse_plots_csv(header + "P1,r,3,400,24/02/2016\n"), ValidationError);

  std::string many = header;
  for (int i = 0; i < 29; ++i) many += "Q" + std::to_string(i) + ",grampians," + std::to_string(i) + ",400,2017-10-01\n";
  const auto p29 = parse_plots_csv(many);
  CHECK(p29.size() == 29);
  CHECK(parse_plots_csv(plots_csv(p29)).size() == 29);
  CHECK(is_iso_date("2020-02-29"));
  CHECK_FALSE(is_iso_date("2019-02-29"));
}

TEST_CASE("SRF files") {
  const SrfSet s = load_srf_csv(std::string(RICHSPEC_DATA_DIR) + "/sentinel2_vnir_srf.csv");
  REQUIRE(s.size() == 10);
  const SrfSet builtin = sentinel2_vnir_srf();
  for (std::size_t b = 0; b < 10; ++b) {
    CHECK(s.bands[b].name == builtin.bands[b].name);
    CHECK(s.bands[b].center_nm == builtin.bands[b].center_nm);
    CHECK(s.bands[b].fwhm_nm == builtin.bands[b].fwhm_nm);
  }
  CHECK(parse_srf_csv(srf_csv(s)).size() == 10);
  const std::string header = "band_name,center_nm,fwhm_nm\n";
  CHECK_THROWS_AS(parse_srf_csv(header + "B02,490,65\nB02,560,35\n"), ValidationError);
  CHECK_THROWS_AS(parse_srf_csv(header + "B02,490,0\n"), ValidationError);
  CHECK_THROWS_AS(parse_srf_csv("name,center,fwhm\nB02,490,65\n"), ValidationError);
}

TEST_CASE("report files") {
  const Dataset d = small_synth();
  CVConfig cfg;
  cfg.repetitions = 2;
  const CVReport r = two_fold_cv(d, PipelineSpec{}, cfg);
  const std::string pred = cv_predictions_csv(r);
  CHECK(pred.rfind("plot_id,truth,prediction,rep,fold,region\n", 0) == 0);
  CHECK(std::count(pred.begin(), pred.end(), '\n') == 1 + 2 * 24);
  const std::string folds = cv_folds_csv(r);
  CHECK(folds.rfind("rep,fold,r,rmse\n", 0) == 0);
  CHECK(std::count(folds.begin(), folds.end(), '\n') == 5);
  CHECK(cv_summary_csv(r).find("aggregation,per_fold_mean") != std::string::npos);

  const ImportanceProfile ip = importance_report(d, Method::PLS, 2);
  CHECK(importance_csv(ip).rfind("wavelength_nm,raw_importance,normalized_importance\n", 0) == 0);
  CHECK(variance_csv(variance_table(fit_pca(d.X, 2), d.X)).rfind("component,eigenvalue,pct,cumulative\n", 0) == 0);
}

TEST_CASE("model files round trip") {
  PipelineSpec krr;
  check_roundtrip(krr);

  PipelineSpec gpr;
  gpr.regressor = Regressor::GPR;
  gpr.method = Method::CCA;
  gpr.gpr.restarts = 0;
  gpr.gpr.max_iterations = 10;
  check_roundtrip(gpr);

  PipelineSpec rfr;
  rfr.regressor = Regressor::RFR;
  rfr.method = Method::PCA;
  rfr.k = 3;
  rfr.rfr.trees = 7;
  check_roundtrip(rfr);

  CHECK_THROWS_AS(deserialize_pipeline("not a model\n"), ValidationError);
  const Dataset d = small_synth();
  std::string text = serialize_pipeline(fit_pipeline(krr, d.X, d.y));
  text.resize(text.size() / 2);
  CHECK_THROWS_AS(deserialize_pipeline(text), ValidationError);
}

TEST_CASE("atomic writes") {
  const auto dir = std::filesystem::temp_directory_path() / "richspec_io_test";
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "a.csv", "x\n1\n");
  CHECK(read_file(dir / "a.csv") == "x\n1\n");
  CHECK_FALSE(std::filesystem::exists(dir / "a.csv.tmp"));
  CHECK_THROWS_AS(read_file(dir / "missing.csv"), ConfigError);
  std::filesystem::remove_all(dir);
}
