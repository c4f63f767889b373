#include <algorithm>
#include <cmath>
#include <numeric>

#include "family.hpp"

namespace sysdetect::detail {

namespace {

double impurity(Criterion criterion, const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double acc = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    acc += criterion == Criterion::Gini ? p * p : -p * std::log2(p);
  }
  return criterion == Criterion::Gini ? 1.0 - acc : acc;
}

class TreeBuilder {
 public:
  TreeBuilder(const TreeConfig& config, const Eigen::MatrixXd& X, const Labels& y, int classes)
      : config_(config), X_(X), y_(y), classes_(classes) {}

  TreeState build() {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(X_.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    Eigen::Index feature = -1;
    double threshold = 0.0;
    double child_impurity = 0.0;
  };

  std::vector<int> count(const std::vector<Eigen::Index>& rows) const {
    std::vector<int> counts(static_cast<std::size_t>(classes_), 0);
    for (auto r : rows) ++counts[static_cast<std::size_t>(y_[static_cast<std::size_t>(r)])];
    return counts;
  }

  // Lowest weighted child impurity; ties keep the lower feature, then the
  // lower threshold. Zero-gain splits are allowed so that interactions such
  // as XOR can still be separated deeper down.
  Split best_split(const std::vector<Eigen::Index>& rows, const std::vector<int>& parent) const {
    Split best;
    const int n = static_cast<int>(rows.size());
    std::vector<Eigen::Index> order = rows;
    std::vector<int> left(static_cast<std::size_t>(classes_));
    std::vector<int> right(static_cast<std::size_t>(classes_));
    for (Eigen::Index f = 0; f < X_.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return X_(a, f) < X_(b, f); });
      std::fill(left.begin(), left.end(), 0);
      right = parent;
      for (int m = 0; m + 1 < n; ++m) {
        const auto cls = static_cast<std::size_t>(y_[static_cast<std::size_t>(order[static_cast<std::size_t>(m)])]);
        ++left[cls];
        --right[cls];
        const double lo = X_(order[static_cast<std::size_t>(m)], f);
        const double hi = X_(order[static_cast<std::size_t>(m) + 1], f);
        if (!(lo < hi)) continue;
        const int nl = m + 1;
        const int nr = n - nl;
        const double child = (nl * impurity(config_.criterion, left, nl) +
                              nr * impurity(config_.criterion, right, nr)) / n;
        if (best.feature < 0 || child < best.child_impurity - 1e-12) {
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          best = {f, threshold, child};
        }
      }
    }
    return best;
  }

  int grow(const std::vector<Eigen::Index>& rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    auto counts = count(rows);
    const int total = static_cast<int>(rows.size());
    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;
    const bool depth_reached = config_.max_depth && depth >= *config_.max_depth;
    tree_.nodes[static_cast<std::size_t>(id)].counts = counts;
    if (pure || depth_reached || total < 2) return id;

    const Split split = best_split(rows, counts);
    if (split.feature < 0) return id;
    const double parent = impurity(config_.criterion, counts, total);
    if (split.child_impurity > parent + 1e-12) return id;

    std::vector<Eigen::Index> left, right;
    for (auto r : rows) (X_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(split.feature);
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const TreeConfig& config_;
  const Eigen::MatrixXd& X_;
  const Labels& y_;
  int classes_;
  TreeState tree_;
};

}  // namespace

TreeState train_tree(const TreeConfig& config, const Eigen::MatrixXd& X, const Labels& y,
                     int classes) {
  return TreeBuilder(config, X, y, classes).build();
}

std::vector<int> predict_tree(const TreeState& tree, const Eigen::MatrixXd& X) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index q = 0; q < X.rows(); ++q) {
    const TreeNode* node = &tree.nodes.front();
    while (node->feature >= 0) {
      node = &tree.nodes[static_cast<std::size_t>(X(q, node->feature) <= node->threshold ? node->left
                                                                                       : node->right)];
    }
    out.push_back(static_cast<int>(std::max_element(node->counts.begin(), node->counts.end()) -
                                   node->counts.begin()));
  }
  return out;
}

}  // namespace sysdetect::detail

namespace sysdetect {

int tree_depth(const TreeState& tree) {
  if (tree.nodes.empty()) return 0;
  std::vector<std::pair<int, int>> stack = {{0, 0}};
  int depth = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    depth = std::max(depth, d);
    const auto& node = tree.nodes[static_cast<std::size_t>(id)];
    if (node.feature >= 0) {
      stack.push_back({node.left, d + 1});
      stack.push_back({node.right, d + 1});
    }
  }
  return depth;
}

}  // namespace sysdetect
