#include "richspec/io.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path work = fs::temp_directory_path() / "richspec_cli_test";

struct Result {
  int code;
  std::string err;
};

Result cli(const std::string& args) {
  fs::create_directories(work);
  const fs::path err = work / "stderr.txt";
  const std::string cmd = std::string(RICHSPEC_CLI_PATH) + " " + args + " > " + (work / "stdout.txt").string() +
                          " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, richspec::read_file(err)};
}

std::string p(const std::string& name) { return (work / name).string(); }

}  // namespace

TEST_CASE("help and usage errors") {
  fs::remove_all(work);
  CHECK(cli("--help").code == 0);
  CHECK(cli("run --help").code == 0);
  CHECK(cli("run --no-such-flag").code == 1);
  CHECK(cli("").code == 1);
}

TEST_CASE("missing spectra path names the field") {
  richspec::write_file_atomic(work / "cfg.json", "{\"output_dir\": \"" + p("out_missing") + "\"}");
  const Result r = cli("run --config " + p("cfg.json"));
  CHECK(r.code == 1);
  CHECK(r.err.find("spectra_path") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("synthetic files through the full CLI") {
  REQUIRE(cli("synth --out " + p("data") + " --seed 3 --noise-sd 1").code == 0);
  const std::string data = "--spectra " + p("data/spectra.csv") + " --plots " + p("data/plots.csv") +
                           " --no-binning --no-mask --repetitions 3";
  CHECK(cli("run " + data + " --out " + p("run1")).code == 0);
  CHECK(cli("run " + data + " --out " + p("run2")).code == 0);
  for (const char* name : {"cv_summary.csv", "cv_predictions.csv", "importance.csv", "model.txt"}) {
    CHECK(richspec::read_file(work / "run1" / name) == richspec::read_file(work / "run2" / name));
  }
  CHECK(fs::exists(work / "run1" / "manifest.json"));

  CHECK(cli("evaluate " + data + " --out " + p("eval") + " --regressor rfr --trees 10").code == 0);
  CHECK(fs::exists(work / "eval" / "cv_folds.csv"));
  CHECK(cli("fit " + data + " --out " + p("fit")).code == 0);
  CHECK(cli("predict --spectra " + p("data/spectra.csv") + " --no-binning --no-mask --model " +
            p("fit/model.txt") + " --out " + p("pred")).code == 0);
  CHECK(fs::exists(work / "pred" / "predictions.csv"));
  CHECK(cli("importance " + data + " --out " + p("imp")).code == 0);
  CHECK(cli("simulate-ms --spectra " + p("data/spectra.csv") + " --srf " + RICHSPEC_DATA_DIR +
            "/sentinel2_vnir_srf.csv --out " + p("ms")).code == 0);
  CHECK(cli("tune-k " + data + " --k-max 3 --out " + p("tk")).code == 0);
  CHECK(fs::exists(work / "tk" / "k_selection.csv"));
  CHECK(cli("run " + data + " --method ica --out " + p("bad")).code == 1);
}

TEST_CASE("data and numerical failures map to exit codes") {
  const std::string header = "plot_id,region,richness,plot_area_m2,survey_date\n";
  richspec::write_file_atomic(work / "neg_plots.csv", header + "A,r,-1,400,2020-01-01\n");
  richspec::write_file_atomic(work / "spec.csv", "plot_id,cloud,wl_500x10,wl_510x10\nA,0,0.1,0.2\n");
  Result r = cli("run --spectra " + p("spec.csv") + " --plots " + p("neg_plots.csv") + " --out " + p("neg"));
  CHECK(r.code == 2);
  CHECK(r.err.rfind("richspec: error:", 0) == 0);

  std::string spectra = "plot_id,cloud,wl_500x10,wl_510x10\n";
  std::string plots = header;
  for (int i = 0; i < 8; ++i) {
    const std::string id = "Z" + std::to_string(i);
    spectra += id + ",0,0,0\n";
    plots += id + ",r," + std::to_string(i) + ",400,2020-01-01\n";
  }
  richspec::write_file_atomic(work / "zero_spectra.csv", spectra);
  richspec::write_file_atomic(work / "zero_plots.csv", plots);
  r = cli("run --spectra " + p("zero_spectra.csv") + " --plots " + p("zero_plots.csv") +
          " --no-binning --no-mask --out " + p("zero"));
  CHECK(r.code == 3);
  CHECK(fs::exists(work / "zero" / "INCOMPLETE"));
  fs::remove_all(work);
}
