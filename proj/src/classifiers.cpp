#include "sysdetect/classifiers.hpp"

#include <algorithm>
#include <map>

#include "family.hpp"
#include "sysdetect/error.hpp"

namespace sysdetect {

std::string_view task_tag(Task task) { return task == Task::Detection ? "detection" : "family"; }

LabelVector make_labels(const FeatureMatrix& matrix, Task task, bool include_benign) {
  LabelVector out;
  out.task = task;
  for (std::size_t i = 0; i < matrix.labels.size(); ++i) {
    const Category c = matrix.labels[i];
    if (task == Task::Detection) {
      out.values.emplace_back(binary_label(c));
    } else if (is_malware(c) || include_benign) {
      out.values.emplace_back(category_token(c));
    } else {
      continue;
    }
    out.row_index.push_back(i);
  }
  return out;
}

namespace {

struct Encoded {
  std::vector<std::string> classes;
  detail::Labels y;
};

Encoded encode(std::span<const std::string> labels) {
  Encoded e;
  e.classes.assign(labels.begin(), labels.end());
  std::sort(e.classes.begin(), e.classes.end());
  e.classes.erase(std::unique(e.classes.begin(), e.classes.end()), e.classes.end());
  e.y.reserve(labels.size());
  for (const auto& l : labels) {
    e.y.push_back(static_cast<int>(std::lower_bound(e.classes.begin(), e.classes.end(), l) -
                                   e.classes.begin()));
  }
  return e;
}

void check_dimension(const TrainedModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.dimension && X.rows() > 0) {
    throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(model.dimension) +
                                                  " features, got " + std::to_string(X.cols()));
  }
}

Eigen::MatrixXd linear_margins(const LinearOvrState& s, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd m = X * s.weights.transpose();
  m.rowwise() += s.bias.transpose();
  return m;
}

}  // namespace

TrainedModel train(const ModelConfig& config, const Eigen::MatrixXd& X,
                   std::span<const std::string> y, std::uint64_t seed) {
  validate_config(config);
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(X.rows()) + " rows but " +
                                                  std::to_string(y.size()) + " labels");
  }
  if (!X.allFinite()) throw Error(ErrorCode::DimensionMismatch, "training matrix has non-finite values");
  Encoded enc = encode(y);
  if (enc.classes.size() < 2) {
    throw Error(ErrorCode::SingleClassTraining, "need at least two distinct labels");
  }
  const int classes = static_cast<int>(enc.classes.size());
  TrainedModel model{config, enc.classes, seed, X.cols(), {}};
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LogRegConfig>) {
          model.state = detail::train_logreg(c, X, enc.y, classes);
        } else if constexpr (std::is_same_v<T, KnnConfig>) {
          if (c.k > X.rows()) {
            throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(c.k) + " exceeds " +
                                                  std::to_string(X.rows()) + " training rows");
          }
          model.state = detail::train_knn(c, X, enc.y);
        } else if constexpr (std::is_same_v<T, TreeConfig>) {
          model.state = detail::train_tree(c, X, enc.y, classes);
        } else if constexpr (std::is_same_v<T, SvmConfig>) {
          model.state = detail::train_svm(c, X, enc.y, classes);
        } else if constexpr (std::is_same_v<T, MlpConfig>) {
          model.state = detail::train_mlp(c, X, enc.y, classes, seed);
        }
      },
      config);
  return model;
}

Eigen::MatrixXd predict_scores(const TrainedModel& model, const Eigen::MatrixXd& X) {
  check_dimension(model, X);
  const auto classes = static_cast<Eigen::Index>(model.classes.size());
  if (X.rows() == 0) return Eigen::MatrixXd(0, classes);
  switch (family_of(model.config)) {
    case Family::LogReg: {
      const Eigen::MatrixXd m = linear_margins(std::get<LinearOvrState>(model.state), X);
      return m.unaryExpr([](double z) {
        return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      });
    }
    case Family::Svm:
      if (const auto* lin = std::get_if<LinearOvrState>(&model.state)) return linear_margins(*lin, X);
      return detail::kernel_svm_scores(std::get<SvmConfig>(model.config),
                                       std::get<KernelSvmState>(model.state), X);
    case Family::Mlp:
      return detail::mlp_probabilities(std::get<MlpState>(model.state), X);
    case Family::Knn:
    case Family::Tree:
      break;
  }
  throw Error(ErrorCode::UnsupportedFamily,
              std::string(family_tag(family_of(model.config))) + " has no decision scores");
}

std::vector<std::string> predict(const TrainedModel& model, const Eigen::MatrixXd& X) {
  check_dimension(model, X);
  std::vector<int> idx;
  if (X.rows() == 0) return {};
  switch (family_of(model.config)) {
    case Family::Knn:
      idx = detail::predict_knn(std::get<KnnConfig>(model.config), std::get<KnnState>(model.state),
                                X, static_cast<int>(model.classes.size()));
      break;
    case Family::Tree:
      idx = detail::predict_tree(std::get<TreeState>(model.state), X);
      break;
    default: {
      const Eigen::MatrixXd scores = predict_scores(model, X);
      for (Eigen::Index i = 0; i < scores.rows(); ++i) idx.push_back(detail::argmax_first(scores.row(i)));
    }
  }
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(model.classes[static_cast<std::size_t>(i)]);
  return out;
}

Eigen::Index parameter_count(const ModelConfig& config, Eigen::Index features, std::size_t classes) {
  const auto k = static_cast<Eigen::Index>(classes);
  switch (family_of(config)) {
    case Family::LogReg:
      return k * (features + 1);
    case Family::Svm:
      if (std::get<SvmConfig>(config).kernel == KernelKind::Linear) return k * (features + 1);
      break;
    case Family::Mlp: {
      Eigen::Index total = 0, in = features;
      for (int h : std::get<MlpConfig>(config).hidden_layers) {
        total += in * h + h;
        in = h;
      }
      return total + in * k + k;
    }
    default:
      break;
  }
  throw Error(ErrorCode::UnsupportedFamily, "no flat parameter vector for this configuration");
}

LossGradient loss_and_gradient(const ModelConfig& config, const Eigen::VectorXd& params,
                               const Eigen::MatrixXd& X, std::span<const std::string> y) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "rows and labels differ in length");
  }
  Encoded enc = encode(y);
  const int classes = static_cast<int>(enc.classes.size());
  if (params.size() != parameter_count(config, X.cols(), enc.classes.size())) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector has wrong length");
  }
  switch (family_of(config)) {
    case Family::LogReg:
      return detail::logreg_objective(std::get<LogRegConfig>(config), params, X, enc.y, classes);
    case Family::Svm:
      return detail::hinge_objective(std::get<SvmConfig>(config), params, X, enc.y, classes);
    case Family::Mlp: {
      const auto& c = std::get<MlpConfig>(config);
      return detail::mlp_objective(c, detail::unflatten_mlp(c, X.cols(), classes, params), X, enc.y);
    }
    default:
      break;
  }
  throw Error(ErrorCode::UnsupportedFamily, "objective not exposed for this family");
}

Eigen::VectorXd flatten_parameters(const TrainedModel& model) {
  if (const auto* lin = std::get_if<LinearOvrState>(&model.state)) {
    const Eigen::Index d = lin->weights.cols();
    Eigen::VectorXd out(lin->weights.rows() * (d + 1));
    for (Eigen::Index k = 0; k < lin->weights.rows(); ++k) {
      out.segment(k * (d + 1), d) = lin->weights.row(k).transpose();
      out[k * (d + 1) + d] = lin->bias[k];
    }
    return out;
  }
  if (const auto* mlp = std::get_if<MlpState>(&model.state)) return detail::flatten_mlp(*mlp);
  throw Error(ErrorCode::UnsupportedFamily, "no flat parameter vector for this model");
}

}  // namespace sysdetect
