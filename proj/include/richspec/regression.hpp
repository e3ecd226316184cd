#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace richspec {

/// Composite kernel k(a, b) = (a.b + sigma^2) + exp(-|a-b|^2 / (2 l^2)) + delta [a == b].
struct KernelConfig {
  double sigma = 1e3;
  double length_scale = 1e3;
  double white_noise = 10.0;
  bool use_dot = true;
  bool use_rbf = true;
  bool use_white = true;

  bool operator==(const KernelConfig&) const = default;
};

/// Throws ConfigError unless length_scale > 0 and white_noise >= 0.
void check_kernel(const KernelConfig& cfg);

double kernel_eval(const KernelConfig& cfg, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// n x n Gram matrix over the rows of T.
Eigen::MatrixXd build_gram(const KernelConfig& cfg, const Eigen::MatrixXd& T);

/// q x n matrix of k(new_i, train_j).
Eigen::MatrixXd cross_gram(const KernelConfig& cfg, const Eigen::MatrixXd& T_new,
                           const Eigen::MatrixXd& T_train);

/// True when two rows of T are elementwise identical; the white term then
/// also fires off the diagonal of the training Gram matrix.
bool has_duplicate_rows(const Eigen::MatrixXd& T);

/// Cholesky factor of A + jitter * I. Jitter escalates from 0 through
/// 1e-10 .. 1e-6 times the mean diagonal; NumericalError if all attempts fail.
struct SpdFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};
SpdFactor factor_spd(const Eigen::MatrixXd& A);

enum class Regressor { KRR, GPR, RFR };

std::string to_string(Regressor r);
Regressor parse_regressor(const std::string& s);

// --- kernel ridge regression ---------------------------------------------

struct KrrModel {
  KernelConfig kernel;
  double lambda = 1.0;
  Eigen::VectorXd alpha;
  Eigen::MatrixXd train_T;
  double y_mean = 0.0;
  bool duplicate_rows = false;  ///< white term fired off the diagonal
};

/// alpha = (K + lambda I)^-1 (y - mean(y)); the mean is added back by predict.
KrrModel fit_krr(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, const KernelConfig& cfg,
                 double lambda);

// --- Gaussian process regression -------------------------------------------

struct GprModel {
  KernelConfig kernel;
  double epsilon = 1.0;
  Eigen::VectorXd alpha;
  Eigen::MatrixXd train_T;
  double y_mean = 0.0;
  double log_marginal_likelihood = 0.0;
  double mean_fn_value = 0.0;
  bool duplicate_rows = false;
};

struct GprOptions {
  bool optimize = false;
  int restarts = 3;             ///< perturbed starts in addition to the given one
  int max_iterations = 200;
  double gradient_tol = 1e-6;
  double restart_scale = 1.0;   ///< sd of the log-space perturbation
  std::uint64_t seed = 0x67707231;
};

/// Log marginal likelihood of centred targets and its gradient with respect to
/// log(sigma^2), log(l), log(delta). Gradient entries of disabled or
/// zero-valued terms are 0.
struct LmlResult {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
};
LmlResult gpr_log_marginal_likelihood(const Eigen::MatrixXd& T, const Eigen::VectorXd& y_centered,
                                      const KernelConfig& cfg, double epsilon);

/// (log sigma^2, log l, log delta) of `cfg`; entries for zero-valued terms are -inf.
Eigen::Vector3d kernel_log_params(const KernelConfig& cfg);
KernelConfig with_log_params(KernelConfig cfg, const Eigen::Vector3d& theta);
/// Which of the three log parameters the optimizer may move.
std::array<bool, 3> free_log_params(const KernelConfig& cfg);

GprModel fit_gpr(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, const KernelConfig& cfg,
                 double epsilon, const GprOptions& opt);
GprModel fit_gpr(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, const KernelConfig& cfg,
                 double epsilon, bool optimize);

// --- random forest regression ----------------------------------------------

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  ///< nodes[0] is the root
  double predict(const Eigen::Ref<const Eigen::VectorXd>& t) const;
};

struct RfrOptions {
  int trees = 100;
  std::uint64_t seed = 0;
  bool bootstrap = true;
  double max_features = 1.0 / 3.0;  ///< fraction of features tried per split
  int min_leaf = 1;
  int max_depth = -1;               ///< -1 = unlimited
  unsigned threads = 1;             ///< tree construction workers, 0 = all cores
};

struct RfrModel {
  std::vector<RegressionTree> trees;
  std::uint64_t rng_seed = 0;
  Eigen::Index features = 0;
};

RfrModel fit_rfr(const Eigen::MatrixXd& T, const Eigen::VectorXd& y, const RfrOptions& opt);

// --- prediction -------------------------------------------------------------

Eigen::VectorXd predict(const KrrModel& model, const Eigen::MatrixXd& T_new);
Eigen::VectorXd predict(const GprModel& model, const Eigen::MatrixXd& T_new);
Eigen::VectorXd predict(const RfrModel& model, const Eigen::MatrixXd& T_new);

/// Per-tree predictions, q x d.
Eigen::MatrixXd predict_trees(const RfrModel& model, const Eigen::MatrixXd& T_new);

using RegressorModel = std::variant<KrrModel, GprModel, RfrModel>;

Eigen::VectorXd predict(const RegressorModel& model, const Eigen::MatrixXd& T_new);

}  // namespace richspec
