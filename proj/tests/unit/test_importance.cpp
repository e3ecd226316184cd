#include "helpers.hpp"
#include "richspec/error.hpp"
#include "richspec/importance.hpp"
#include "richspec/preprocess.hpp"
#include "richspec/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace richspec;
using testing::max_abs;
using testing::random_matrix;
using testing::random_vector;

namespace {

// Residual of v after least squares on [1, C].
Eigen::VectorXd residual(const Eigen::MatrixXd& C, const Eigen::VectorXd& v) {
  Eigen::MatrixXd A(C.rows(), C.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(C.cols()) = C;
  return v - A * A.colPivHouseholderQr().solve(v);
}

double two_stage(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, Eigen::Index j) {
  Eigen::MatrixXd others(T.rows(), T.cols() - 1);
  for (Eigen::Index c = 0, o = 0; c < T.cols(); ++c) {
    if (c != j) others.col(o++) = T.col(c);
  }
  return pearson_r(residual(others, T.col(j)), residual(others, y));
}

ComponentModel model_with(const Eigen::MatrixXd& W) {
  ComponentModel m;
  m.W = W;
  m.x_mean = Eigen::VectorXd::Zero(W.rows());
  m.x_scale = Eigen::VectorXd::Ones(W.rows());
  return m;
}

}  // namespace

TEST_CASE("single component partial correlation is the plain correlation") {
  std::mt19937_64 g(81);
  const Eigen::MatrixXd T = random_matrix(g, 20, 1);
  const Eigen::VectorXd y = T.col(0) + random_vector(g, 20);
  CHECK(partial_correlation(T, y, 0) == doctest::Approx(pearson_r(T.col(0), y)).epsilon(1e-12));
}

TEST_CASE("partial correlation against a two-stage oracle") {
  std::mt19937_64 g(82);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd T = random_matrix(g, 30, 3);
    const Eigen::VectorXd y = T * Eigen::Vector3d(1.0, -0.5, 0.2) + random_vector(g, 30);
    const Eigen::VectorXd p = partial_correlations(T, y);
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(std::abs(p(j) - two_stage(T, y, j)) <= 1e-10);
      CHECK(std::abs(p(j)) <= 1.0);
    }
  }
}

TEST_CASE("partial correlation errors") {
  std::mt19937_64 g(83);
  Eigen::MatrixXd T = random_matrix(g, 10, 2);
  T.col(1) = T.col(0);
  CHECK_THROWS_WITH_AS(partial_correlation(T, random_vector(g, 10), 0),
                       doctest::Contains("degenerate partial correlation"), NumericalError);
  CHECK_THROWS_AS(partial_correlation(random_matrix(g, 4, 3), random_vector(g, 4), 0), ConfigError);
  CHECK_THROWS_AS(partial_correlation(random_matrix(g, 10, 2), random_vector(g, 9), 0), ValidationError);
}

TEST_CASE("band importance arithmetic") {
  Eigen::MatrixXd e3 = Eigen::MatrixXd::Zero(6, 1);
  e3(2, 0) = 1.0;
  const ImportanceProfile a = band_importance(model_with(e3), Eigen::VectorXd::Ones(1));
  CHECK(a.raw == e3.col(0));
  CHECK(a.normalized == e3.col(0));

  Eigen::MatrixXd W(2, 2);
  W << 0.6, 0.8, 0.0, 1.0;
  const ImportanceProfile b = band_importance(model_with(W), Eigen::Vector2d(1, 1));
  CHECK(b.raw(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(b.raw(1) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_WITH_AS(band_importance(model_with(W), Eigen::Vector2d::Zero()),
                       doctest::Contains("uninformative model"), NumericalError);
  CHECK_THROWS_AS(band_importance(model_with(W), Eigen::Vector3d::Ones()), ConfigError);
}

TEST_CASE("importance identities on random input") {
  std::mt19937_64 g(84);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd W = random_matrix(g, 40, 3);
    const Eigen::VectorXd p = random_vector(g, 3);
    const ImportanceProfile ip = band_importance(model_with(W), p);
    CHECK(std::abs(ip.normalized.sum() - 1.0) <= 1e-10);
    CHECK(max_abs(ip.normalized - ip.raw / ip.raw.sum()) <= 1e-15);
    CHECK((ip.raw.array() >= 0.0).all());

    const ImportanceProfile scaled = band_importance(model_with(W), 2.5 * p);
    CHECK(max_abs(scaled.raw - 2.5 * ip.raw) <= 1e-12);
    CHECK(max_abs(scaled.normalized - ip.normalized) <= 1e-12);

    Eigen::MatrixXd Wf = W;
    Eigen::VectorXd pf = p;
    Wf.col(1) *= -1.0;
    pf(1) *= -1.0;
    CHECK(max_abs(band_importance(model_with(Wf), pf).raw - ip.raw) <= 1e-12);
  }
}

TEST_CASE("band permutation permutes the profile") {
  std::mt19937_64 g(85);
  const Eigen::MatrixXd X = random_matrix(g, 30, 12);
  const Eigen::VectorXd y = X.col(2) - X.col(9) + 0.3 * random_vector(g, 30);
  std::vector<Eigen::Index> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), g);
  Eigen::MatrixXd Xp(30, 12);
  for (Eigen::Index c = 0; c < 12; ++c) Xp.col(c) = X.col(perm[static_cast<std::size_t>(c)]);

  const ComponentModel m = fit_pls(X, y, 2);
  const ComponentModel mp = fit_pls(Xp, y, 2);
  const ImportanceProfile a = band_importance(m, partial_correlations(transform(m, X), y));
  const ImportanceProfile b = band_importance(mp, partial_correlations(transform(mp, Xp), y));
  for (Eigen::Index c = 0; c < 12; ++c) {
    CHECK(std::abs(b.raw(c) - a.raw(perm[static_cast<std::size_t>(c)])) <= 1e-10);
  }
}

TEST_CASE("top band lies inside the informative bump") {
  SyntheticSpec s;
  s.seed = 86;
  s.n = 60;
  s.grid = desis_like_grid52();
  s.patterns = {{715.0, 20.0, 0.04, 5.0}, {480.0, 40.0, 0.03, 0.0}};
  s.noise_sd = 0.5;
  const Dataset d = generate_synthetic_dataset(s);
  const ImportanceProfile ip = importance_report(d, Method::PLS, 2);
  Eigen::Index top = 0;
  ip.normalized.maxCoeff(&top);
  CHECK(std::abs(ip.band_centers_nm[static_cast<std::size_t>(top)] - 715.0) <= 2.0 * 20.0);
  CHECK(ip.k_used == 2);
  CHECK(ip.method == Method::PLS);
}

TEST_CASE("mirrored patterns give symmetric importance") {
  SyntheticSpec s;
  s.seed = 87;
  s.n = 400;
  s.grid = desis_like_grid52();
  s.patterns = {{550.0, 25.0, 0.04, 5.0}, {850.0, 25.0, 0.04, 5.0}};
  s.band_noise_sd = 2e-4;
  const Dataset d = generate_synthetic_dataset(s);
  const ImportanceProfile ip = importance_report(d, Method::PLS, 2);
  double left = 0.0, right = 0.0;
  for (std::size_t b = 0; b < ip.band_centers_nm.size(); ++b) {
    const double w = ip.band_centers_nm[b];
    if (std::abs(w - 550.0) <= 50.0) left = std::max(left, ip.normalized(static_cast<Eigen::Index>(b)));
    if (std::abs(w - 850.0) <= 50.0) right = std::max(right, ip.normalized(static_cast<Eigen::Index>(b)));
  }
  CHECK(std::abs(left - right) <= 0.1 * std::max(left, right));
}

TEST_CASE("pure noise response completes") {
  SyntheticSpec s;
  s.seed = 88;
  s.n = 200;
  s.grid = desis_like_grid52();
  s.patterns = {{650.0, 30.0, 0.04, 0.0}};
  s.noise_sd = 5.0;
  const Dataset d = generate_synthetic_dataset(s);
  const ImportanceProfile ip = importance_report(d, Method::PCA, 3);
  CHECK(std::abs(ip.normalized.sum() - 1.0) <= 1e-10);
  CHECK(ip.band_centers_nm == d.grid.centers_nm);
}

TEST_CASE("per-fold importance spread") {
  SyntheticSpec s;
  s.seed = 89;
  s.grid = desis_like_grid52();
  const Dataset d = generate_synthetic_dataset(s);
  CVConfig cfg;
  cfg.repetitions = 3;
  const ImportanceSpread sp = importance_cv(d, Method::PLS, 2, cfg);
  CHECK(sp.folds == 6);
  CHECK(std::abs(sp.mean.sum() - 1.0) <= 1e-10);
  CHECK((sp.sd.array() >= 0.0).all());
}
