#include <cmath>
#include <limits>

#include "family.hpp"
#include "sysdetect/error.hpp"
#include "sysdetect/kernels.hpp"
#include "sysdetect/svm_solver.hpp"

namespace sysdetect {

double dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& t,
                      const Eigen::VectorXd& alpha) {
  const Eigen::VectorXd at = alpha.cwiseProduct(t);
  return alpha.sum() - 0.5 * at.dot(K * at);
}

// Works on the minimization form f(a) = 1/2 a'Qa - e'a with Q_ij = t_i t_j K_ij,
// keeping the gradient G = Qa - e up to date after every pair update.
DualSolution solve_svm_dual(const Eigen::MatrixXd& K, const Eigen::VectorXd& t, double C,
                            double tol, long max_iterations) {
  constexpr double kTau = 1e-12;
  const Eigen::Index n = K.rows();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd G = Eigen::VectorXd::Constant(n, -1.0);

  auto in_up = [&](Eigen::Index i) {
    return (t[i] > 0 && alpha[i] < C) || (t[i] < 0 && alpha[i] > 0);
  };
  auto in_low = [&](Eigen::Index i) {
    return (t[i] > 0 && alpha[i] > 0) || (t[i] < 0 && alpha[i] < C);
  };

  DualSolution sol;
  long iter = 0;
  double gap = 0.0;
  while (true) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index s = 0; s < n; ++s) {
      if (in_up(s) && -t[s] * G[s] > gmax) {
        gmax = -t[s] * G[s];
        i = s;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index s = 0; s < n; ++s) {
      if (!in_low(s)) continue;
      const double v = -t[s] * G[s];
      gmin = std::min(gmin, v);
      if (i >= 0 && v < gmax) {
        const double b = gmax - v;
        double a = K(i, i) + K(s, s) - 2.0 * K(i, s);
        if (a <= 0) a = kTau;
        if (-(b * b) / a < best) {
          best = -(b * b) / a;
          j = s;
        }
      }
    }
    gap = (i < 0 || !std::isfinite(gmin)) ? 0.0 : gmax - gmin;
    if (gap <= tol || j < 0) {
      sol.converged = true;
      break;
    }
    if (iter >= max_iterations) break;
    ++iter;

    const double Ci = C, Cj = C;
    const double old_i = alpha[i], old_j = alpha[j];
    const double Qij = t[i] * t[j] * K(i, j);
    if (t[i] != t[j]) {
      double quad = K(i, i) + K(j, j) + 2.0 * Qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > Ci - Cj) {
        if (alpha[i] > Ci) {
          alpha[i] = Ci;
          alpha[j] = Ci - diff;
        }
      } else if (alpha[j] > Cj) {
        alpha[j] = Cj;
        alpha[i] = Cj + diff;
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * Qij;
      if (quad <= 0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > Ci) {
        if (alpha[i] > Ci) {
          alpha[i] = Ci;
          alpha[j] = sum - Ci;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > Cj) {
        if (alpha[j] > Cj) {
          alpha[j] = Cj;
          alpha[i] = sum - Cj;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    // G_s += Q_si di + Q_sj dj
    G.array() += t.array() * (t[i] * di * K.col(i).array() + t[j] * dj * K.col(j).array());
  }

  // Bias from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    const double yG = t[s] * G[s];
    if (alpha[s] >= C) {
      if (t[s] < 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else if (alpha[s] <= 0) {
      if (t[s] > 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else {
      ++n_free;
      sum_free += yG;
    }
  }
  double rho = 0.0;
  if (n_free > 0) rho = sum_free / n_free;
  else if (std::isfinite(ub) && std::isfinite(lb)) rho = 0.5 * (ub + lb);
  else if (std::isfinite(ub)) rho = ub;
  else if (std::isfinite(lb)) rho = lb;

  sol.alpha = std::move(alpha);
  sol.bias = -rho;
  sol.kkt_gap = gap;
  sol.iterations = iter;
  sol.objective = dual_objective(K, t, sol.alpha);
  return sol;
}

namespace detail {

ModelState train_svm(const SvmConfig& config, const Eigen::MatrixXd& X, const Labels& y,
                     int classes) {
  const double gamma = resolve_gamma(config.gamma, X);
  const Eigen::MatrixXd K = kernel_matrix(X, X, config.kernel, gamma, config.degree);
  if (!K.allFinite()) throw Error(ErrorCode::NonFiniteLoss, "kernel matrix is not finite");
  const long max_iter = static_cast<long>(config.max_passes) * std::max<long>(X.rows(), 1);

  LinearOvrState linear;
  KernelSvmState kernel;
  kernel.gamma = gamma;
  if (config.kernel == KernelKind::Linear) {
    linear.weights = Eigen::MatrixXd::Zero(classes, X.cols());
    linear.bias = Eigen::VectorXd::Zero(classes);
  }
  for (int k = 0; k < classes; ++k) {
    const Eigen::VectorXd t = (2.0 * indicator(y, k).array() - 1.0).matrix();
    const DualSolution sol = solve_svm_dual(K, t, config.c, config.tol, max_iter);
    const Eigen::VectorXd coef = sol.alpha.cwiseProduct(t);
    if (config.kernel == KernelKind::Linear) {
      linear.weights.row(k) = (X.transpose() * coef).transpose();
      linear.bias[k] = sol.bias;
      continue;
    }
    KernelSvmProblem problem;
    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < sol.alpha.size(); ++i) {
      if (sol.alpha[i] > 0) sv.push_back(i);
    }
    problem.support.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
    problem.coefficients.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t r = 0; r < sv.size(); ++r) {
      problem.support.row(static_cast<Eigen::Index>(r)) = X.row(sv[r]);
      problem.coefficients[static_cast<Eigen::Index>(r)] = coef[sv[r]];
    }
    problem.bias = sol.bias;
    problem.kkt_gap = sol.kkt_gap;
    problem.converged = sol.converged;
    kernel.problems.push_back(std::move(problem));
  }
  if (config.kernel == KernelKind::Linear) return linear;
  return kernel;
}

Eigen::MatrixXd kernel_svm_scores(const SvmConfig& config, const KernelSvmState& state,
                                  const Eigen::MatrixXd& X) {
  Eigen::MatrixXd scores(X.rows(), static_cast<Eigen::Index>(state.problems.size()));
  for (std::size_t k = 0; k < state.problems.size(); ++k) {
    const auto& p = state.problems[k];
    const auto col = static_cast<Eigen::Index>(k);
    if (p.support.rows() == 0) {
      scores.col(col).setConstant(p.bias);
      continue;
    }
    const Eigen::MatrixXd Kx = kernel_matrix(X, p.support, config.kernel, state.gamma, config.degree);
    scores.col(col) = (Kx * p.coefficients).array() + p.bias;
  }
  return scores;
}

}  // namespace detail
}  // namespace sysdetect
