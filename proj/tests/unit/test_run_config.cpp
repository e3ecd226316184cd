#include "richspec/error.hpp"
#include "richspec/io.hpp"
#include "richspec/run_config.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>

using namespace richspec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("richspec_rc_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig synthetic_run(const fs::path& out) {
  RunConfig c;
  c.output_dir = out.string();
  c.synthetic = SyntheticSource{};
  c.synthetic->noise_sd = 2.0;
  c.preprocess.binning.reset();
  c.preprocess.mask.reset();
  c.repetitions = 5;
  c.seed = 42;
  return c;
}

}  // namespace

TEST_CASE("config JSON round trip") {
  RunConfig c = synthetic_run("/tmp/x");
  c.pipeline.method = Method::CCA;
  c.pipeline.k = 3;
  c.pipeline.regressor = Regressor::GPR;
  c.pipeline.kernel.sigma = 0.25;
  c.pipeline.kernel.use_rbf = false;
  c.pipeline.rfr.trees = 17;
  c.tune_k = true;
  c.k_max = 6;
  c.selection_metric = SelectionMetric::MinRmse;
  const nlohmann::json j = run_config_to_json(c);
  const RunConfig back = run_config_from_json(j);
  CHECK(run_config_to_json(back) == j);
  CHECK(back.pipeline.method == Method::CCA);
  CHECK(back.pipeline.kernel == c.pipeline.kernel);
  CHECK(back.synthetic->noise_sd == 2.0);
  CHECK_FALSE(back.preprocess.binning.has_value());

  const RunConfig defaults = run_config_from_json(nlohmann::json::object());
  CHECK(defaults.repetitions == 100);
  CHECK(defaults.seed == 42);
  CHECK(defaults.pipeline.k == 2);
  CHECK(defaults.preprocess.binning.has_value());
}

TEST_CASE("config errors name the field") {
  CHECK_THROWS_WITH_AS(run_config_from_json(nlohmann::json{{"sede", 1}}), doctest::Contains("sede"), ConfigError);
  CHECK_THROWS_WITH_AS(run_config_from_json(nlohmann::json{{"k", "two"}}), doctest::Contains("k"), ConfigError);
  CHECK_THROWS_WITH_AS(run_config_from_json(nlohmann::json{{"method", "ica"}}), doctest::Contains("ica"),
                       ConfigError);

  RunConfig c;
  c.output_dir = "/tmp/out";
  CHECK_THROWS_WITH_AS(check_run_config(c), "missing required field spectra_path", ConfigError);
  c.spectra_path = "/nonexistent/spectra.csv";
  CHECK_THROWS_WITH_AS(check_run_config(c), doctest::Contains("spectra_path"), ConfigError);
  CHECK_THROWS_WITH_AS(run_pipeline(RunConfig{}), doctest::Contains("missing required field"), ConfigError);
}

TEST_CASE("synthetic runs are byte-identical") {
  const fs::path a = scratch("a"), b = scratch("b");
  const RunSummary sa = run_pipeline(synthetic_run(a), 1);
  const RunSummary sb = run_pipeline(synthetic_run(b), 4);
  CHECK(sa.cv == sb.cv);
  CHECK_FALSE(fs::exists(a / "INCOMPLETE"));
  for (const char* name : {"preprocessed_spectra.csv", "plots.csv", "variance.csv", "cv_folds.csv",
                           "cv_predictions.csv", "cv_summary.csv", "importance.csv", "model.txt"}) {
    REQUIRE(fs::exists(a / name));
    CHECK_MESSAGE(read_file(a / name) == read_file(b / name), name);
  }
  const auto manifest = nlohmann::json::parse(read_file(a / "manifest.json"));
  CHECK(manifest["seed"] == 42);
  CHECK(manifest["version"] == tool_version());
  CHECK(run_config_from_json(manifest["config"]).repetitions == 5);
  CHECK(sa.cv.mean_r > 0.5);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("tuning writes selection tables") {
  const fs::path out = scratch("tune");
  RunConfig c = synthetic_run(out);
  c.repetitions = 2;
  c.tune_k = true;
  c.k_max = 3;
  c.tune_kernel = true;
  c.grid_lo_exp = -1;
  c.grid_hi_exp = 1;
  const RunSummary s = run_pipeline(c, 1);
  CHECK(s.k >= 1);
  CHECK(s.k <= 3);
  CHECK(fs::exists(out / "k_selection.csv"));
  const std::string table = read_file(out / "kernel_selection.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 27);
  fs::remove_all(out);
}

TEST_CASE("failed runs leave a marker") {
  const fs::path out = scratch("fail");
  RunConfig c = synthetic_run(out);
  c.synthetic->n = 6;
  c.pipeline.k = 3;
  CHECK_THROWS_AS(run_pipeline(c, 1), ConfigError);
  REQUIRE(fs::exists(out / "INCOMPLETE"));
  CHECK(read_file(out / "INCOMPLETE").find("failed") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "manifest.json"));
  fs::remove_all(out);
}
