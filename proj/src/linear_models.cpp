#include <cmath>

#include "family.hpp"
#include "sysdetect/error.hpp"

namespace sysdetect::detail {

Eigen::VectorXd indicator(const Labels& y, int cls) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) t[static_cast<Eigen::Index>(i)] = y[i] == cls ? 1.0 : 0.0;
  return t;
}

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

// params = [w (d), b]; target in {0, 1}.
// loss = mean(softplus(z) - t z) + |w|^2 / (2 C n)
LossGradient logreg_class_objective(const Eigen::VectorXd& params, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& target, double c) {
  const Eigen::Index d = X.cols();
  const double n = static_cast<double>(X.rows());
  const auto w = params.head(d);
  const double b = params[d];
  const Eigen::VectorXd z = (X * w).array() + b;
  double loss = 0.0;
  Eigen::VectorXd residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += softplus(z[i]) - target[i] * z[i];
    residual[i] = sigmoid(z[i]) - target[i];
  }
  LossGradient out;
  out.loss = loss / n + w.squaredNorm() / (2.0 * c * n);
  out.gradient.resize(d + 1);
  out.gradient.head(d) = X.transpose() * residual / n + w / (c * n);
  out.gradient[d] = residual.sum() / n;
  return out;
}

LossGradient logreg_objective(const LogRegConfig& config, const Eigen::VectorXd& params,
                              const Eigen::MatrixXd& X, const Labels& y, int classes) {
  const Eigen::Index block = X.cols() + 1;
  LossGradient out;
  out.gradient = Eigen::VectorXd::Zero(params.size());
  for (int k = 0; k < classes; ++k) {
    auto part = logreg_class_objective(params.segment(k * block, block), X, indicator(y, k), config.c);
    out.loss += part.loss / classes;
    out.gradient.segment(k * block, block) = part.gradient / classes;
  }
  return out;
}

LinearOvrState train_logreg(const LogRegConfig& config, const Eigen::MatrixXd& X, const Labels& y,
                            int classes) {
  const Eigen::Index d = X.cols();
  LinearOvrState state;
  state.weights = Eigen::MatrixXd::Zero(classes, d);
  state.bias = Eigen::VectorXd::Zero(classes);
  for (int k = 0; k < classes; ++k) {
    const Eigen::VectorXd target = indicator(y, k);
    Eigen::VectorXd params = Eigen::VectorXd::Zero(d + 1);
    auto current = logreg_class_objective(params, X, target, config.c);
    double step = 1.0;
    for (int iter = 0; iter < config.max_iter; ++iter) {
      if (current.gradient.lpNorm<Eigen::Infinity>() <= config.tol) break;
      const double g2 = current.gradient.squaredNorm();
      // Armijo backtracking, restarted from twice the last accepted step.
      step *= 2.0;
      bool accepted = false;
      for (int halving = 0; halving < 80; ++halving) {
        Eigen::VectorXd candidate = params - step * current.gradient;
        auto next = logreg_class_objective(candidate, X, target, config.c);
        if (next.loss <= current.loss - 0.5 * step * g2) {
          params = std::move(candidate);
          current = std::move(next);
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
    if (!std::isfinite(current.loss)) throw Error(ErrorCode::NonFiniteLoss, "logistic regression");
    state.weights.row(k) = params.head(d).transpose();
    state.bias[k] = params[d];
  }
  return state;
}

// Primal hinge objective per class, scaled by 1/(C n) relative to
// 1/2 |w|^2 + C sum hinge so it shares the dual's minimizer:
//   mean(max(0, 1 - t z)) + |w|^2 / (2 C n),  t in {-1, +1}
LossGradient hinge_objective(const SvmConfig& config, const Eigen::VectorXd& params,
                             const Eigen::MatrixXd& X, const Labels& y, int classes) {
  if (config.kernel != KernelKind::Linear) {
    throw Error(ErrorCode::UnsupportedFamily, "hinge objective requires the linear kernel");
  }
  const Eigen::Index d = X.cols();
  const Eigen::Index block = d + 1;
  const double n = static_cast<double>(X.rows());
  LossGradient out;
  out.gradient = Eigen::VectorXd::Zero(params.size());
  for (int k = 0; k < classes; ++k) {
    const auto w = params.segment(k * block, d);
    const double b = params[k * block + d];
    const Eigen::VectorXd z = (X * w).array() + b;
    double loss = 0.0;
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double t = y[static_cast<std::size_t>(i)] == k ? 1.0 : -1.0;
      const double margin = 1.0 - t * z[i];
      if (margin > 0) {
        loss += margin;
        coef[i] = -t;
      }
    }
    out.loss += (loss / n + w.squaredNorm() / (2.0 * config.c * n)) / classes;
    out.gradient.segment(k * block, d) = (X.transpose() * coef / n + w / (config.c * n)) / classes;
    out.gradient[k * block + d] = coef.sum() / n / classes;
  }
  return out;
}

}  // namespace sysdetect::detail
