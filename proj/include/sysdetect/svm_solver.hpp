#pragma once

#include <Eigen/Dense>

namespace sysdetect {

/// Solution of the soft-margin dual
///   max  sum(alpha) - 1/2 sum_ij alpha_i alpha_j t_i t_j K_ij
///   s.t. 0 <= alpha_i <= C,  sum_i alpha_i t_i = 0.
struct DualSolution {
  Eigen::VectorXd alpha;
  double bias = 0.0;       // decision(x) = sum_i alpha_i t_i K(x_i, x) + bias
  double objective = 0.0;  // dual objective value (maximization form)
  double kkt_gap = 0.0;    // max violating pair gap at exit
  long iterations = 0;
  bool converged = false;
};

/// Sequential minimal optimization with maximal-violating-pair (second
/// order) working set selection. Stops once kkt_gap <= tol or after
/// max_iterations pair updates. t holds +1/-1 targets.
DualSolution solve_svm_dual(const Eigen::MatrixXd& K, const Eigen::VectorXd& t, double C,
                            double tol, long max_iterations);

double dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& t,
                      const Eigen::VectorXd& alpha);

}  // namespace sysdetect
