#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "sysdetect/corpus.hpp"
#include "sysdetect/metrics.hpp"
#include "sysdetect/model_config.hpp"

namespace fixtures {

std::filesystem::path data_dir();
std::filesystem::path cli_path();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Random strace summary over `names`; each name appears with probability
/// `keep` (at least one row is always present).
sysdetect::TraceSummary random_summary(const std::vector<std::string>& names, double keep,
                                       std::uint64_t seed);

/// Corpus with counts[c] samples of category c. Call shares drift with the
/// category so the families are learnable.
sysdetect::Corpus synthetic_corpus(const std::array<std::size_t, 5>& counts, std::uint64_t seed);

/// Writes logs/<n>.log plus manifest.csv; returns the manifest path.
std::filesystem::path write_corpus(const sysdetect::Corpus& corpus, const std::filesystem::path& dir);

struct Blobs {
  Eigen::MatrixXd X;
  std::vector<std::string> y;
};

/// Isotropic unit-variance clusters; class c's mean is `separation` times
/// the binary digits of c, so means are at least `separation` apart.
Blobs gaussian_blobs(std::size_t n, int dims, int classes, double separation, std::uint64_t seed);

/// Brute-force nearest-neighbour vote: full sort by (distance, index),
/// majority of the first k, ties to the smallest class index.
std::vector<int> knn_oracle(const Eigen::MatrixXd& train, const std::vector<int>& labels,
                            const Eigen::MatrixXd& query, int k, sysdetect::Metric metric, double p,
                            int classes);

/// Exact maximum of the soft-margin dual by enumerating, for every variable,
/// lower bound / upper bound / free, and solving the equality-constrained
/// stationarity system on each face.
double dual_oracle(const Eigen::MatrixXd& K, const Eigen::VectorXd& t, double C);

/// Per-class one-vs-rest counting from raw counts (true rows, predicted columns).
struct OvrTotals {
  double macro_precision, macro_recall, macro_f1;
  double weighted_precision, weighted_recall, weighted_f1;
  double accuracy;
};
OvrTotals ovr_oracle(const Eigen::MatrixXi& counts);

/// Central differences of `f` at x with step h.
template <typename F>
Eigen::VectorXd numeric_gradient(F&& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

}  // namespace fixtures
