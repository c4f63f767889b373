#include <cmath>

#include "family.hpp"
#include "sysdetect/error.hpp"
#include "sysdetect/rng.hpp"

namespace sysdetect::detail {

namespace {

std::vector<Eigen::Index> layer_sizes(const MlpConfig& config, Eigen::Index features, int classes) {
  std::vector<Eigen::Index> sizes = {features};
  for (int h : config.hidden_layers) sizes.push_back(h);
  sizes.push_back(classes);
  return sizes;
}

// Row-wise softmax, shifted by the row max.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& Z) {
  Eigen::MatrixXd P = (Z.colwise() - Z.rowwise().maxCoeff()).array().exp().matrix();
  P.array().colwise() /= P.rowwise().sum().array();
  return P;
}

struct Forward {
  std::vector<Eigen::MatrixXd> activations;  // activations[0] = X
  std::vector<Eigen::MatrixXd> pre;          // pre-activation per layer
};

Forward forward(const MlpState& state, const Eigen::MatrixXd& X) {
  Forward f;
  f.activations.push_back(X);
  const std::size_t layers = state.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd Z = f.activations.back() * state.weights[l].transpose();
    Z.rowwise() += state.biases[l].transpose();
    f.pre.push_back(Z);
    if (l + 1 < layers) f.activations.push_back(Z.cwiseMax(0.0));
    else f.activations.push_back(softmax(Z));
  }
  return f;
}

}  // namespace

MlpState init_mlp(const MlpConfig& config, Eigen::Index features, int classes, std::uint64_t seed) {
  const auto sizes = layer_sizes(config, features, classes);
  Rng rng(seed);
  MlpState state;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const Eigen::Index fan_in = sizes[l], fan_out = sizes[l + 1];
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Eigen::MatrixXd W(fan_out, fan_in);
    // Column-major fill order, the same order flatten_mlp uses.
    for (Eigen::Index c = 0; c < fan_in; ++c) {
      for (Eigen::Index o = 0; o < fan_out; ++o) W(o, c) = rng.uniform(-r, r);
    }
    state.weights.push_back(std::move(W));
    state.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return state;
}

Eigen::VectorXd flatten_mlp(const MlpState& state) {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < state.weights.size(); ++l) {
    total += state.weights[l].size() + state.biases[l].size();
  }
  Eigen::VectorXd out(total);
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < state.weights.size(); ++l) {
    const auto& W = state.weights[l];
    out.segment(pos, W.size()) = Eigen::Map<const Eigen::VectorXd>(W.data(), W.size());
    pos += W.size();
    out.segment(pos, state.biases[l].size()) = state.biases[l];
    pos += state.biases[l].size();
  }
  return out;
}

MlpState unflatten_mlp(const MlpConfig& config, Eigen::Index features, int classes,
                       const Eigen::VectorXd& params) {
  const auto sizes = layer_sizes(config, features, classes);
  MlpState state;
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const Eigen::Index in = sizes[l], out = sizes[l + 1];
    if (pos + in * out + out > params.size()) {
      throw Error(ErrorCode::DimensionMismatch, "parameter vector too short for network");
    }
    state.weights.push_back(Eigen::Map<const Eigen::MatrixXd>(params.data() + pos, out, in));
    pos += in * out;
    state.biases.push_back(params.segment(pos, out));
    pos += out;
  }
  if (pos != params.size()) throw Error(ErrorCode::DimensionMismatch, "parameter vector too long");
  return state;
}

// loss = -mean log p(y) + alpha/(2n) sum |W|^2  (biases unpenalized)
LossGradient mlp_objective(const MlpConfig& config, const MlpState& state,
                           const Eigen::MatrixXd& X, const Labels& y) {
  const double n = static_cast<double>(X.rows());
  const Forward f = forward(state, X);
  const Eigen::MatrixXd& P = f.activations.back();
  double loss = 0.0;
  Eigen::MatrixXd delta = P;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto cls = y[static_cast<std::size_t>(i)];
    loss -= std::log(std::max(P(i, cls), 1e-300));
    delta(i, cls) -= 1.0;
  }
  delta /= n;
  double penalty = 0.0;
  for (const auto& W : state.weights) penalty += W.squaredNorm();
  LossGradient out;
  out.loss = loss / n + config.alpha / (2.0 * n) * penalty;

  MlpState grad;
  grad.weights.resize(state.weights.size());
  grad.biases.resize(state.biases.size());
  for (std::size_t l = state.weights.size(); l-- > 0;) {
    grad.weights[l] = delta.transpose() * f.activations[l] + (config.alpha / n) * state.weights[l];
    grad.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = (delta * state.weights[l]).cwiseProduct(
          (f.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  out.gradient = flatten_mlp(grad);
  return out;
}

MlpState train_mlp(const MlpConfig& config, const Eigen::MatrixXd& X, const Labels& y, int classes,
                   std::uint64_t seed) {
  MlpState state = init_mlp(config, X.cols(), classes, seed);
  for (int iter = 0; iter < config.max_iter; ++iter) {
    const LossGradient lg = mlp_objective(config, state, X, y);
    if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
      throw Error(ErrorCode::NonFiniteLoss, "mlp diverged at iteration " + std::to_string(iter));
    }
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < state.weights.size(); ++l) {
      auto& W = state.weights[l];
      Eigen::Map<Eigen::VectorXd>(W.data(), W.size()) -=
          config.learning_rate * lg.gradient.segment(pos, W.size());
      pos += W.size();
      state.biases[l] -= config.learning_rate * lg.gradient.segment(pos, state.biases[l].size());
      pos += state.biases[l].size();
    }
  }
  return state;
}

Eigen::MatrixXd mlp_probabilities(const MlpState& state, const Eigen::MatrixXd& X) {
  return forward(state, X).activations.back();
}

}  // namespace sysdetect::detail
