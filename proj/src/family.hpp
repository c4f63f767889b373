#pragma once

// Per-family training and inference over integer class indices.

#include <Eigen/Dense>
#include <vector>

#include "sysdetect/classifiers.hpp"

namespace sysdetect::detail {

using Labels = std::vector<int>;

/// Index of the largest entry; ties go to the lowest index.
template <typename Derived>
int argmax_first(const Eigen::DenseBase<Derived>& row) {
  int best = 0;
  for (Eigen::Index j = 1; j < row.size(); ++j) {
    if (row(j) > row(best)) best = static_cast<int>(j);
  }
  return best;
}

/// +1 where y == cls, 0 elsewhere.
Eigen::VectorXd indicator(const Labels& y, int cls);

LossGradient logreg_class_objective(const Eigen::VectorXd& params, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& target, double c);
LossGradient logreg_objective(const LogRegConfig& config, const Eigen::VectorXd& params,
                              const Eigen::MatrixXd& X, const Labels& y, int classes);
LinearOvrState train_logreg(const LogRegConfig& config, const Eigen::MatrixXd& X, const Labels& y,
                            int classes);

LossGradient hinge_objective(const SvmConfig& config, const Eigen::VectorXd& params,
                             const Eigen::MatrixXd& X, const Labels& y, int classes);
ModelState train_svm(const SvmConfig& config, const Eigen::MatrixXd& X, const Labels& y,
                     int classes);
Eigen::MatrixXd kernel_svm_scores(const SvmConfig& config, const KernelSvmState& state,
                                  const Eigen::MatrixXd& X);

KnnState train_knn(const KnnConfig& config, const Eigen::MatrixXd& X, const Labels& y);
std::vector<int> predict_knn(const KnnConfig& config, const KnnState& state,
                             const Eigen::MatrixXd& X, int classes);

TreeState train_tree(const TreeConfig& config, const Eigen::MatrixXd& X, const Labels& y,
                     int classes);
std::vector<int> predict_tree(const TreeState& tree, const Eigen::MatrixXd& X);

MlpState init_mlp(const MlpConfig& config, Eigen::Index features, int classes,
                  std::uint64_t seed);
Eigen::VectorXd flatten_mlp(const MlpState& state);
MlpState unflatten_mlp(const MlpConfig& config, Eigen::Index features, int classes,
                       const Eigen::VectorXd& params);
LossGradient mlp_objective(const MlpConfig& config, const MlpState& state,
                           const Eigen::MatrixXd& X, const Labels& y);
MlpState train_mlp(const MlpConfig& config, const Eigen::MatrixXd& X, const Labels& y,
                   int classes, std::uint64_t seed);
Eigen::MatrixXd mlp_probabilities(const MlpState& state, const Eigen::MatrixXd& X);

}  // namespace sysdetect::detail
