#include <algorithm>
#include <utility>

#include "family.hpp"
#include "sysdetect/kernels.hpp"

namespace sysdetect::detail {

KnnState train_knn(const KnnConfig&, const Eigen::MatrixXd& X, const Labels& y) {
  return KnnState{X, y};
}

std::vector<int> predict_knn(const KnnConfig& config, const KnnState& state,
                             const Eigen::MatrixXd& X, int classes) {
  const Eigen::Index n = state.points.rows();
  const auto k = static_cast<std::size_t>(std::min<Eigen::Index>(config.k, n));
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(X.rows()));
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
  std::vector<int> votes(static_cast<std::size_t>(classes));
  for (Eigen::Index q = 0; q < X.rows(); ++q) {
    for (Eigen::Index i = 0; i < n; ++i) {
      dist[static_cast<std::size_t>(i)] = {
          distance(X.row(q), state.points.row(i), config.metric, config.p), i};
    }
    // (distance, row index) ordering breaks k-th neighbour ties by lower index.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t m = 0; m < k; ++m) ++votes[static_cast<std::size_t>(state.labels[static_cast<std::size_t>(dist[m].second)])];
    out.push_back(static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
  }
  return out;
}

}  // namespace sysdetect::detail
