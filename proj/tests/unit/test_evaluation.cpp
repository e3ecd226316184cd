#include "helpers.hpp"
#include "richspec/error.hpp"
#include "richspec/evaluation.hpp"
#include "richspec/preprocess.hpp"
#include "richspec/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace richspec;
using testing::max_abs;

namespace {

// Rank-one spectra with a response that is exactly linear in the latent weight.
Dataset linear_dataset(std::uint64_t seed, Eigen::Index n) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const BandGrid grid = desis_like_grid52();
  Eigen::VectorXd pattern(52), base(52);
  for (Eigen::Index b = 0; b < 52; ++b) {
    const double w = grid.centers_nm[static_cast<std::size_t>(b)];
    pattern(b) = 0.05 * std::exp(-0.5 * std::pow((w - 700.0) / 40.0, 2));
    base(b) = 0.1 + 0.0003 * (w - 400.0);
  }
  Dataset d;
  d.grid = grid;
  d.X.resize(n, 52);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = z(g);
    d.X.row(i) = (base + s * pattern).transpose();
    d.y(i) = 30.0 + 6.0 * s;
    d.plot_ids.push_back("L" + std::to_string(100 + i));
    d.regions.push_back("lin");
  }
  return d;
}

Dataset synth(std::uint64_t seed, double noise, Eigen::Index n = 40) {
  SyntheticSpec s;
  s.seed = seed;
  s.n = n;
  s.grid = desis_like_grid52();
  s.noise_sd = noise;
  return generate_synthetic_dataset(s);
}

PipelineSpec pls_dot(Eigen::Index k, double lambda) {
  PipelineSpec p;
  p.method = Method::PLS;
  p.k = k;
  p.kernel.sigma = 1.0;
  p.kernel.use_rbf = false;
  p.kernel.use_white = false;
  p.lambda = lambda;
  return p;
}

CVConfig reps(int r, std::uint64_t seed = 42) {
  CVConfig c;
  c.repetitions = r;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("pearson and rmse examples") {
  const Eigen::Vector4d t(1, 3, 2, 7);
  CHECK(pearson_r(t, t) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson_r(t, -t) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(pearson_r(t, (2.0 * t.array() + 3.0).matrix()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(pearson_r(t, Eigen::Vector4d::Constant(2.0)), "undefined correlation", NumericalError);

  CHECK(rmse(t, t) == 0.0);
  CHECK(rmse(t, (t.array() + 1.0).matrix()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rmse(Eigen::Vector2d::Zero(), Eigen::Vector2d(3, 4)) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK_THROWS_AS(rmse(t, Eigen::Vector3d::Zero()), ValidationError);
}

TEST_CASE("metric invariances") {
  std::mt19937_64 g(71);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd a = testing::random_vector(g, 12);
    const Eigen::VectorXd b = testing::random_vector(g, 12);
    const double r = pearson_r(a, b);
    CHECK(std::abs(pearson_r((5.0 * a.array() - 2.0).matrix(), b) - r) <= 1e-12);
    CHECK(std::abs(rmse(3.0 * a, 3.0 * b) - 3.0 * rmse(a, b)) <= 1e-12);
    CHECK(std::abs(r) <= 1.0);
  }
}

TEST_CASE("partitions") {
  const auto plan = make_partition_plan(44, reps(20));
  REQUIRE(plan.size() == 20);
  for (const Partition& p : plan) {
    CHECK(p.subset1.size() == 22);
    CHECK(p.subset2.size() == 22);
    std::set<Eigen::Index> all(p.subset1.begin(), p.subset1.end());
    all.insert(p.subset2.begin(), p.subset2.end());
    CHECK(all.size() == 44);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 43);
  }
  CHECK(plan[0].subset1 != plan[1].subset1);
  const auto odd = make_partition_plan(29, reps(3));
  CHECK(odd[0].subset1.size() == 15);
  CHECK(odd[0].subset2.size() == 14);
  CHECK(make_partition_plan(44, reps(20))[7].subset1 == plan[7].subset1);
  CHECK_THROWS_AS(make_partition_plan(3, reps(1)), ConfigError);
  CHECK_THROWS_AS(make_partition_plan(10, reps(0)), ConfigError);
}

TEST_CASE("report shape and aggregates") {
  const Dataset d = synth(3, 2.0);
  const CVReport r = two_fold_cv(d, PipelineSpec{}, reps(5));
  REQUIRE(r.per_repetition.size() == 10);
  CHECK(r.repetitions == 5);
  CHECK(r.pooled_predictions.size() == 5 * 40);
  double sr = 0.0, se = 0.0;
  for (std::size_t i = 0; i < r.per_repetition.size(); ++i) {
    CHECK(r.per_repetition[i].rep == static_cast<int>(i / 2));
    CHECK(r.per_repetition[i].fold == static_cast<int>(i % 2));
    sr += r.per_repetition[i].r;
    se += r.per_repetition[i].rmse;
  }
  CHECK(std::abs(r.mean_r - sr / 10.0) <= 1e-12);
  CHECK(std::abs(r.mean_rmse - se / 10.0) <= 1e-12);
}

TEST_CASE("feature extraction never sees the validation fold") {
  const Dataset d = synth(4, 1.0);
  int calls = 0;
  double worst = 0.0;
  bool disjoint = true;
  const FoldObserver obs = [&](const FoldContext& c) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d.bands());
    for (Eigen::Index i : c.train) mean += d.X.row(i).transpose();
    mean /= static_cast<double>(c.train.size());
    worst = std::max(worst, max_abs(mean - c.pipeline.extractor.x_mean));
    for (Eigen::Index i : c.validation) {
      disjoint = disjoint && std::find(c.train.begin(), c.train.end(), i) == c.train.end();
    }
    ++calls;
  };
  CVConfig cfg = reps(4);
  cfg.threads = 1;
  two_fold_cv(d, PipelineSpec{}, cfg, obs);
  CHECK(calls == 8);
  CHECK(worst <= 1e-12);
  CHECK(disjoint);
}

TEST_CASE("results do not depend on thread count") {
  const Dataset d = synth(5, 1.0);
  CVConfig one = reps(6);
  one.threads = 1;
  CVConfig four = reps(6);
  four.threads = 4;
  CHECK(two_fold_cv(d, PipelineSpec{}, one) == two_fold_cv(d, PipelineSpec{}, four));
  CHECK(two_fold_cv(d, PipelineSpec{}, one) == two_fold_cv(d, PipelineSpec{}, one));

  PipelineSpec rf;
  rf.regressor = Regressor::RFR;
  rf.rfr.trees = 20;
  CHECK(two_fold_cv(d, rf, one) == two_fold_cv(d, rf, four));
}

TEST_CASE("a linear response is recovered by PLS with a dot kernel") {
  const Dataset d = linear_dataset(8, 40);
  const CVReport r = two_fold_cv(d, pls_dot(1, 1e-8), reps(10));
  const double sd = std::sqrt(testing::centered(d.y).squaredNorm() / 39.0);
  CHECK(r.mean_r >= 0.999);
  CHECK(r.mean_rmse <= 1e-3 * sd);
}

TEST_CASE("noise-free two-pattern data are predictable") {
  PipelineSpec p;
  p.k = 2;
  p.regressor = Regressor::KRR;
  p.kernel.use_rbf = false;
  p.kernel.use_white = false;
  p.kernel.sigma = 1.0;
  p.lambda = 1e-3;
  CHECK(two_fold_cv(synth(9, 0.0), p, reps(10)).mean_r >= 0.99);
}

TEST_CASE("fold too small for the component count") {
  const Dataset d = synth(10, 1.0, 6);
  PipelineSpec p;
  p.k = 2;
  CHECK_THROWS_WITH_AS(two_fold_cv(d, p, reps(1)), doctest::Contains("fold too small"), ConfigError);
  p.k = 1;
  CHECK_NOTHROW(two_fold_cv(d, p, reps(1)));
}

TEST_CASE("pooled evaluation") {
  const Dataset a = synth(11, 1.0);
  CHECK(pooled_region_eval({a}, PipelineSpec{}, reps(3)) == two_fold_cv(a, PipelineSpec{}, reps(3)));

  SyntheticSpec s;
  s.seed = 12;
  s.grid = desis_like_grid52();
  s.region = "south";
  const Dataset b = generate_synthetic_dataset(s);
  const CVReport pooled = pooled_region_eval({a, b}, PipelineSpec{}, reps(3));
  CHECK(pooled.pooled_predictions.size() == 3 * 80);
  std::set<std::string> regions;
  for (const auto& p : pooled.pooled_predictions) regions.insert(p.region);
  CHECK(regions == std::set<std::string>{"south", "synthetic"});

  s.grid = desis_like_grid60();
  CHECK_THROWS_WITH_AS(pooled_region_eval({a, generate_synthetic_dataset(s)}, PipelineSpec{}, reps(1)),
                       "incompatible band grids", ValidationError);
}

TEST_CASE("synthetic generator") {
  const Dataset a = synth(13, 1.5);
  const Dataset b = synth(13, 1.5);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  CHECK(a.plot_ids == b.plot_ids);
  CHECK(synth(14, 1.5).X != a.X);
  CHECK((a.y.array() >= 0.0).all());
  CHECK((a.y.array() == a.y.array().round()).all());
  CHECK(a.rows() == 40);
  CHECK(a.bands() == 52);
  CHECK_THROWS_AS(synth(1, -1.0), ConfigError);
}

TEST_CASE("overwhelming noise leaves little correlation") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const double r = two_fold_cv(synth(seed, 1e6), PipelineSpec{}, CVConfig{}).mean_r;
    CHECK(std::abs(r) <= 0.3);
  }
}
