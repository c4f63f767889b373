#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sysdetect/features.hpp"
#include "sysdetect/model_config.hpp"

namespace sysdetect {

enum class Task { Detection, Family };

std::string_view task_tag(Task task);  // "detection" / "family"

/// Labels aligned with a subset of FeatureMatrix rows.
struct LabelVector {
  Task task = Task::Detection;
  std::vector<std::size_t> row_index;  // rows of the source matrix that carry a label
  std::vector<std::string> values;
};

/// Detection labels every row benign/malware. Family labels keep malware rows
/// only, unless include_benign adds benign as a fifth class.
LabelVector make_labels(const FeatureMatrix& matrix, Task task, bool include_benign = false);

// Fitted state per family.

/// One-vs-rest linear scorer: LogReg, and Svm with the linear kernel.
struct LinearOvrState {
  Eigen::MatrixXd weights;  // classes x features
  Eigen::VectorXd bias;     // classes
};

struct KnnState {
  Eigen::MatrixXd points;
  std::vector<int> labels;  // index into TrainedModel::classes
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<int> counts;  // per class, samples reaching this node
};

struct TreeState {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct KernelSvmProblem {
  Eigen::MatrixXd support;       // support vectors, one per row
  Eigen::VectorXd coefficients;  // alpha_i * t_i
  double bias = 0.0;
  double kkt_gap = 0.0;
  bool converged = false;
};

struct KernelSvmState {
  double gamma = 0.0;
  std::vector<KernelSvmProblem> problems;  // one per class
};

struct MlpState {
  std::vector<Eigen::MatrixXd> weights;  // out x in, one per layer
  std::vector<Eigen::VectorXd> biases;
};

using ModelState = std::variant<LinearOvrState, KnnState, TreeState, KernelSvmState, MlpState>;

struct TrainedModel {
  ModelConfig config;
  std::vector<std::string> classes;  // sorted; ties resolve to the earliest
  std::uint64_t seed = 0;
  Eigen::Index dimension = 0;
  ModelState state;
};

/// Fits a classifier. Classes are the sorted distinct labels of y.
/// Throws SingleClassTraining, DimensionMismatch, KTooLarge, NonFiniteLoss, BadConfig.
TrainedModel train(const ModelConfig& config, const Eigen::MatrixXd& X,
                   std::span<const std::string> y, std::uint64_t seed);

std::vector<std::string> predict(const TrainedModel& model, const Eigen::MatrixXd& X);

/// Rows x classes. LogReg: sigmoid of each one-vs-rest margin; Svm: raw
/// decision values; Mlp: softmax probabilities. Throws UnsupportedFamily
/// for Knn and Tree.
Eigen::MatrixXd predict_scores(const TrainedModel& model, const Eigen::MatrixXd& X);

struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

/// Training objective and its analytic gradient over flattened parameters.
///   LogReg, linear Svm: per class [w (d), b], averaged over classes; the Svm
///   form is the primal hinge objective.
///   Mlp: per layer W (column-major), then b.
/// Throws UnsupportedFamily for Knn, Tree and nonlinear Svm kernels.
LossGradient loss_and_gradient(const ModelConfig& config, const Eigen::VectorXd& params,
                               const Eigen::MatrixXd& X, std::span<const std::string> y);

/// Length of the flattened parameter vector used by loss_and_gradient.
Eigen::Index parameter_count(const ModelConfig& config, Eigen::Index features, std::size_t classes);

/// Parameter vector of a trained LogReg, linear-Svm or Mlp model in the
/// loss_and_gradient layout.
Eigen::VectorXd flatten_parameters(const TrainedModel& model);

int tree_depth(const TreeState& tree);

nlohmann::ordered_json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);

}  // namespace sysdetect
