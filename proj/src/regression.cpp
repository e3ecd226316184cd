#include "richspec/regression.hpp"

#include "richspec/error.hpp"
#include "richspec/parallel.hpp"
#include "richspec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace richspec {

void check_kernel(const KernelConfig& cfg) {
  if (cfg.use_rbf && !(cfg.length_scale > 0.0)) throw ConfigError("length_scale must be > 0");
  if (cfg.use_white && !(cfg.white_noise >= 0.0)) throw ConfigError("white_noise must be >= 0");
  if (!std::isfinite(cfg.sigma) || !std::isfinite(cfg.length_scale) ||
      !std::isfinite(cfg.white_noise)) {
    throw ConfigError("kernel parameters must be finite");
  }
  if (!cfg.use_dot && !cfg.use_rbf && !cfg.use_white) throw ConfigError("kernel has no terms");
}

double kernel_eval(const KernelConfig& cfg, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ValidationError("kernel arguments differ in length");
  double k = 0.0;
  if (cfg.use_dot) k += a.dot(b) + cfg.sigma * cfg.sigma;
  if (cfg.use_rbf) {
    k += std::exp(-(a - b).squaredNorm() / (2.0 * cfg.length_scale * cfg.length_scale));
  }
  if (cfg.use_white && a == b) k += cfg.white_noise;
  return k;
}

namespace {

// Shared by build_gram and cross_gram: identical arithmetic keeps training
// predictions consistent with the Gram matrix entries.
template <class RowA, class RowB>
double kernel_rows(const KernelConfig& cfg, const RowA& a, const RowB& b) {
  double k = 0.0;
  if (cfg.use_dot) k += a.dot(b) + cfg.sigma * cfg.sigma;
  if (cfg.use_rbf) {
    k += std::exp(-(a - b).squaredNorm() / (2.0 * cfg.length_scale * cfg.length_scale));
  }
  if (cfg.use_white && a == b) k += cfg.white_noise;
  return k;
}

}  // namespace

Eigen::MatrixXd build_gram(const KernelConfig& cfg, const Eigen::MatrixXd& T) {
  const Eigen::Index n = T.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      K(i, j) = K(j, i) = kernel_rows(cfg, T.row(i), T.row(j));
    }
  }
  return K;
}

Eigen::MatrixXd cross_gram(const KernelConfig& cfg, const Eigen::MatrixXd& T_new,
                           const Eigen::MatrixXd& T_train) {
  if (T_new.cols() != T_train.cols()) {
    throw ValidationError("dimension mismatch: model expects " + std::to_string(T_train.cols()) +
                          " features, got " + std::to_string(T_new.cols()));
  }
  Eigen::MatrixXd K(T_new.rows(), T_train.rows());
  for (Eigen::Index i = 0; i < T_new.rows(); ++i) {
    for (Eigen::Index j = 0; j < T_train.rows(); ++j) {
      K(i, j) = kernel_rows(cfg, T_new.row(i), T_train.row(j));
    }
  }
  return K;
}

bool has_duplicate_rows(const Eigen::MatrixXd& T) {
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (T.row(i) == T.row(j)) return true;
    }
  }
  return false;
}

SpdFactor factor_spd(const Eigen::MatrixXd& A) {
  if (!A.allFinite()) throw NumericalError("kernel matrix not positive definite (non-finite entry)");
  const double scale = std::max(A.diagonal().cwiseAbs().mean(), std::numeric_limits<double>::min());
  static constexpr double kJitter[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
  SpdFactor f;
  for (double j : kJitter) {
    Eigen::MatrixXd M = A;
    M.diagonal().array() += j * scale;
    f.llt.compute(M);
    if (f.llt.info() == Eigen::Success && (f.llt.matrixLLT().diagonal().array() > 0.0).all()) {
      f.jitter = j * scale;
      return f;
    }
  }
  throw NumericalError("kernel matrix not positive definite");
}

std::string to_string(Regressor r) {
  switch (r) {
    case Regressor::KRR: return "krr";
    case Regressor::GPR: return "gpr";
    case Regressor::RFR: return "rfr";
  }
  return "?";
}

Regressor parse_regressor(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "krr") return Regressor::KRR;
  if (t == "gpr") return Regressor::GPR;
  if (t == "rfr") return Regressor::RFR;
  throw ConfigError("unknown regressor '" + s + "' (expected krr, gpr or rfr)");
}

namespace {

void check_training(const Eigen::MatrixXd& T, const Eigen::VectorXd& y) {
  if (T.rows() != y.size()) throw ValidationError("feature rows do not match response length");
  if (T.rows() < 2) throw ConfigError("at least 2 training samples are required");
  if (!T.allFinite() || !y.allFinite()) throw ValidationError("non-finite training data");
}

}  // namespace

KrrModel fit_krr(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, const KernelConfig& cfg,
                 double lambda) {
  check_training(T, y);
  check_kernel(cfg);
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
  KrrModel m;
  m.kernel = cfg;
  m.lambda = lambda;
  m.train_T = T;
  m.y_mean = y.mean();
  m.duplicate_rows = cfg.use_white && has_duplicate_rows(T);
  Eigen::MatrixXd A = build_gram(cfg, T);
  A.diagonal().array() += lambda;
  const SpdFactor f = factor_spd(A);
  m.alpha = f.llt.solve((y.array() - m.y_mean).matrix());
  return m;
}

// --- GPR --------------------------------------------------------------------

Eigen::Vector3d kernel_log_params(const KernelConfig& cfg) {
  const double ninf = -std::numeric_limits<double>::infinity();
  const double s2 = cfg.sigma * cfg.sigma;
  return {s2 > 0.0 ? std::log(s2) : ninf,
          cfg.length_scale > 0.0 ? std::log(cfg.length_scale) : ninf,
          cfg.white_noise > 0.0 ? std::log(cfg.white_noise) : ninf};
}

KernelConfig with_log_params(KernelConfig cfg, const Eigen::Vector3d& theta) {
  cfg.sigma = std::isinf(theta(0)) ? 0.0 : std::exp(0.5 * theta(0));
  cfg.length_scale = std::exp(theta(1));
  cfg.white_noise = std::isinf(theta(2)) ? 0.0 : std::exp(theta(2));
  return cfg;
}

std::array<bool, 3> free_log_params(const KernelConfig& cfg) {
  return {cfg.use_dot && cfg.sigma != 0.0, cfg.use_rbf,
          cfg.use_white && cfg.white_noise > 0.0};
}

LmlResult gpr_log_marginal_likelihood(const Eigen::MatrixXd& T, const Eigen::VectorXd& yc,
                                      const KernelConfig& cfg, double epsilon) {
  const Eigen::Index n = T.rows();
  Eigen::MatrixXd Ky = build_gram(cfg, T);
  Ky.diagonal().array() += epsilon * epsilon;
  const SpdFactor f = factor_spd(Ky);
  const Eigen::VectorXd alpha = f.llt.solve(yc);

  LmlResult r;
  const double log_det = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  r.value = -0.5 * yc.dot(alpha) - 0.5 * log_det -
            0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  // dL/dtheta = 1/2 tr((alpha alpha^T - Ky^-1) dK/dtheta)
  const Eigen::MatrixXd Kinv = f.llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd M = alpha * alpha.transpose() - Kinv;
  const auto free = free_log_params(cfg);
  if (free[0]) r.gradient(0) = 0.5 * cfg.sigma * cfg.sigma * M.sum();
  if (free[1] || free[2]) {
    const double l2 = cfg.length_scale * cfg.length_scale;
    double g_len = 0.0;
    double g_white = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double d2 = (T.row(i) - T.row(j)).squaredNorm();
        if (free[1]) g_len += M(i, j) * std::exp(-d2 / (2.0 * l2)) * d2 / l2;
        if (free[2] && d2 == 0.0 && T.row(i) == T.row(j)) g_white += M(i, j) * cfg.white_noise;
      }
    }
    r.gradient(1) = 0.5 * g_len;
    r.gradient(2) = 0.5 * g_white;
  }
  return r;
}

namespace {

constexpr double kLogBound = 25.0;

struct Ascent {
  Eigen::Vector3d theta;
  double value = -std::numeric_limits<double>::infinity();
};

Ascent ascend(const Eigen::MatrixXd& T, const Eigen::VectorXd& yc, const KernelConfig& base,
              double epsilon, Eigen::Vector3d theta, const std::array<bool, 3>& free,
              const GprOptions& opt) {
  auto clamp = [&](Eigen::Vector3d t) {
    for (int i = 0; i < 3; ++i) {
      if (free[i]) t(i) = std::clamp(t(i), -kLogBound, kLogBound);
    }
    return t;
  };
  auto masked = [&](Eigen::Vector3d g) {
    for (int i = 0; i < 3; ++i) {
      if (!free[i]) g(i) = 0.0;
    }
    return g;
  };

  theta = clamp(theta);
  LmlResult cur;
  try {
    cur = gpr_log_marginal_likelihood(T, yc, with_log_params(base, theta), epsilon);
  } catch (const NumericalError&) {
    return {theta, -std::numeric_limits<double>::infinity()};
  }
  double step = 1.0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::Vector3d g = masked(cur.gradient);
    if (g.norm() < opt.gradient_tol) break;
    bool improved = false;
    for (int halving = 0; halving < 60; ++halving) {
      const Eigen::Vector3d cand = clamp(theta + step * g);
      if (cand == theta) break;
      try {
        const LmlResult next =
            gpr_log_marginal_likelihood(T, yc, with_log_params(base, cand), epsilon);
        if (std::isfinite(next.value) && next.value > cur.value) {
          theta = cand;
          cur = next;
          improved = true;
          step = std::min(step * 2.0, 1e8);
          break;
        }
      } catch (const NumericalError&) {
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return {theta, cur.value};
}

}  // namespace

GprModel fit_gpr(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, const KernelConfig& cfg,
                 double epsilon, const GprOptions& opt) {
  check_training(T, y);
  check_kernel(cfg);
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");

  GprModel m;
  m.epsilon = epsilon;
  m.train_T = T;
  m.y_mean = y.mean();
  m.duplicate_rows = cfg.use_white && has_duplicate_rows(T);
  const Eigen::VectorXd yc = y.array() - m.y_mean;

  KernelConfig best = cfg;
  const auto free = free_log_params(cfg);
  if (opt.optimize && (free[0] || free[1] || free[2])) {
    const Eigen::Vector3d start = kernel_log_params(cfg);
    Ascent top = ascend(T, yc, cfg, epsilon, start, free, opt);
    Rng rng(opt.seed);
    std::normal_distribution<double> normal(0.0, opt.restart_scale);
    for (int r = 0; r < opt.restarts; ++r) {
      Eigen::Vector3d s = start;
      for (int i = 0; i < 3; ++i) {
        const double z = normal(rng);
        if (free[i]) s(i) += z;
      }
      const Ascent a = ascend(T, yc, cfg, epsilon, s, free, opt);
      if (a.value > top.value) top = a;
    }
    if (std::isfinite(top.value)) best = with_log_params(cfg, top.theta);
  }

  m.kernel = best;
  Eigen::MatrixXd Ky = build_gram(best, T);
  Ky.diagonal().array() += epsilon * epsilon;
  const SpdFactor f = factor_spd(Ky);
  m.alpha = f.llt.solve(yc);
  const double log_det = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  m.log_marginal_likelihood = -0.5 * yc.dot(m.alpha) - 0.5 * log_det -
                              0.5 * static_cast<double>(T.rows()) * std::log(2.0 * std::numbers::pi);
  return m;
}

GprModel fit_gpr(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, const KernelConfig& cfg,
                 double epsilon, bool optimize) {
  GprOptions opt;
  opt.optimize = optimize;
  return fit_gpr(T, y, cfg, epsilon, opt);
}

// --- RFR --------------------------------------------------------------------

double RegressionTree::predict(const Eigen::Ref<const Eigen::VectorXd>& t) const {
  int at = 0;
  while (nodes[at].feature >= 0) {
    const TreeNode& node = nodes[at];
    at = t(node.feature) <= node.threshold ? node.left : node.right;
  }
  return nodes[at].value;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -std::numeric_limits<double>::infinity();
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, const RfrOptions& opt, Rng& rng)
      : T_(T), y_(y), opt_(opt), rng_(rng) {
    const auto k = static_cast<int>(T.cols());
    try_features_ = std::clamp(static_cast<int>(std::ceil(opt.max_features * k - 1e-12)), 1, k);
    order_.resize(static_cast<std::size_t>(k));
  }

  RegressionTree build(std::vector<Eigen::Index> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<Eigen::Index> rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    const double first = y_(rows.front());
    const bool pure = std::all_of(rows.begin(), rows.end(), [&](auto r) { return y_(r) == first; });
    if (pure) {
      tree_.nodes[id].value = first;
      return id;
    }
    double sum = 0.0;
    for (auto r : rows) sum += y_(r);
    tree_.nodes[id].value = sum / static_cast<double>(rows.size());

    const bool depth_ok = opt_.max_depth < 0 || depth < opt_.max_depth;
    if (!depth_ok || rows.size() < 2 * static_cast<std::size_t>(opt_.min_leaf)) return id;

    const Split s = best_split(rows, sum);
    if (s.feature < 0) return id;

    std::vector<Eigen::Index> left, right;
    for (auto r : rows) (T_(r, s.feature) <= s.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    tree_.nodes[id].feature = s.feature;
    tree_.nodes[id].threshold = s.threshold;
    const int l = grow(std::move(left), depth + 1);
    tree_.nodes[id].left = l;
    const int r = grow(std::move(right), depth + 1);
    tree_.nodes[id].right = r;
    return id;
  }

  Split best_split(const std::vector<Eigen::Index>& rows, double total) {
    const auto n = static_cast<double>(rows.size());
    const double parent = total * total / n;
    const double min_gain = 1e-14 * std::max(1.0, std::abs(parent));
    std::iota(order_.begin(), order_.end(), 0);
    // Fisher-Yates: features are visited in random order; at least
    // try_features_ of them are examined, more if none of those can split.
    Split best;
    std::vector<Eigen::Index> sorted(rows);
    for (std::size_t i = 0; i < order_.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, order_.size() - 1);
      std::swap(order_[i], order_[pick(rng_)]);
      if (static_cast<int>(i) >= try_features_ && best.feature >= 0) break;
      const int f = order_[i];
      std::sort(sorted.begin(), sorted.end(), [&](auto a, auto b) {
        const double va = T_(a, f);
        const double vb = T_(b, f);
        return va < vb || (va == vb && a < b);
      });
      double left_sum = 0.0;
      const std::size_t min_leaf = static_cast<std::size_t>(opt_.min_leaf);
      for (std::size_t c = 0; c + 1 < sorted.size(); ++c) {
        left_sum += y_(sorted[c]);
        const std::size_t nl = c + 1;
        const std::size_t nr = sorted.size() - nl;
        const double lo = T_(sorted[c], f);
        const double hi = T_(sorted[c + 1], f);
        if (!(lo < hi) || nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(nl) +
                             right_sum * right_sum / static_cast<double>(nr);
        if (score - parent > min_gain && score > best.score) {
          double mid = 0.5 * (lo + hi);
          if (!(mid < hi)) mid = lo;
          best = {f, mid, score};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& T_;
  const Eigen::VectorXd& y_;
  const RfrOptions& opt_;
  Rng& rng_;
  int try_features_ = 1;
  std::vector<int> order_;
  RegressionTree tree_;
};

}  // namespace

RfrModel fit_rfr(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, const RfrOptions& opt) {
  check_training(T, y);
  if (opt.trees < 1) throw ConfigError("tree count must be >= 1");
  if (!(opt.max_features > 0.0 && opt.max_features <= 1.0)) {
    throw ConfigError("max_features must be in (0, 1]");
  }
  if (opt.min_leaf < 1) throw ConfigError("min_leaf must be >= 1");

  RfrModel m;
  m.rng_seed = opt.seed;
  m.features = T.cols();
  m.trees.resize(static_cast<std::size_t>(opt.trees));
  const Eigen::Index n = T.rows();
  parallel_for(m.trees.size(), opt.threads, [&](std::size_t t) {
    Rng rng(substream_seed(opt.seed, t));
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    if (opt.bootstrap) {
      std::uniform_int_distribution<Eigen::Index> draw(0, n - 1);
      for (auto& r : rows) r = draw(rng);
    } else {
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    }
    TreeBuilder builder(T, y, opt, rng);
    m.trees[t] = builder.build(std::move(rows));
  });
  return m;
}

// --- prediction -------------------------------------------------------------

Eigen::VectorXd predict(const KrrModel& model, const Eigen::MatrixXd& T_new) {
  const Eigen::MatrixXd K = cross_gram(model.kernel, T_new, model.train_T);
  return (K * model.alpha).array() + model.y_mean;
}

Eigen::VectorXd predict(const GprModel& model, const Eigen::MatrixXd& T_new) {
  const Eigen::MatrixXd K = cross_gram(model.kernel, T_new, model.train_T);
  return (K * model.alpha).array() + model.y_mean + model.mean_fn_value;
}

Eigen::MatrixXd predict_trees(const RfrModel& model, const Eigen::MatrixXd& T_new) {
  if (T_new.cols() != model.features) {
    throw ValidationError("dimension mismatch: model expects " + std::to_string(model.features) +
                          " features, got " + std::to_string(T_new.cols()));
  }
  Eigen::MatrixXd P(T_new.rows(), static_cast<Eigen::Index>(model.trees.size()));
  for (Eigen::Index i = 0; i < T_new.rows(); ++i) {
    const Eigen::VectorXd t = T_new.row(i).transpose();
    for (std::size_t j = 0; j < model.trees.size(); ++j) {
      P(i, static_cast<Eigen::Index>(j)) = model.trees[j].predict(t);
    }
  }
  return P;
}

Eigen::VectorXd predict(const RfrModel& model, const Eigen::MatrixXd& T_new) {
  const Eigen::MatrixXd P = predict_trees(model, T_new);
  Eigen::VectorXd out(P.rows());
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j) s += P(i, j);
    out(i) = s / static_cast<double>(P.cols());
  }
  return out;
}

Eigen::VectorXd predict(const RegressorModel& model, const Eigen::MatrixXd& T_new) {
  return std::visit([&](const auto& m) { return predict(m, T_new); }, model);
}

}  // namespace richspec
