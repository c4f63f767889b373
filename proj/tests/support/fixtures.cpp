#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "sysdetect/rng.hpp"
#include "sysdetect/strace.hpp"

namespace fs = std::filesystem;
using sysdetect::Rng;

namespace fixtures {

fs::path data_dir() { return SYSDETECT_TEST_DATA_DIR; }
fs::path cli_path() { return SYSDETECT_CLI_PATH; }

TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  Rng rng(static_cast<std::uint64_t>(std::hash<std::string>{}(tag)) + static_cast<std::uint64_t>(++counter));
  path_ = fs::temp_directory_path() /
          ("sysdetect-" + tag + "-" + std::to_string(rng.next() % 1000000000ULL));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

sysdetect::TraceSummary random_summary(const std::vector<std::string>& names, double keep,
                                       std::uint64_t seed) {
  Rng rng(seed);
  std::vector<sysdetect::TraceRow> rows;
  for (const auto& name : names) {
    if (rng.uniform() >= keep && !(rows.empty() && &name == &names.back())) continue;
    sysdetect::TraceRow r;
    r.syscall = name;
    r.calls = 1 + static_cast<std::int64_t>(rng.below(500));
    r.errors = rng.uniform() < 0.3 ? static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(r.calls) + 1)) : 0;
    r.seconds = static_cast<double>(rng.below(20000)) / 1e6;
    r.usecs_per_call = static_cast<std::int64_t>(std::floor(r.seconds * 1e6 / static_cast<double>(r.calls)));
    rows.push_back(r);
  }
  return sysdetect::summarize_rows(std::move(rows));
}

namespace {

const std::vector<std::string>& pool() {
  static const std::vector<std::string> names = {
      "read",   "write",  "ioctl",   "futex",     "epoll_pwait", "recvfrom", "sendto",
      "getuid", "fstat",  "openat",  "close",     "mmap",        "munmap",   "mprotect",
      "clone",  "dup",    "fcntl",   "prctl",     "madvise",     "pread64",  "writev",
      "brk",    "lseek",  "getpid",  "faccessat", "newfstatat",  "socket",   "connect"};
  return names;
}

}  // namespace

sysdetect::Corpus synthetic_corpus(const std::array<std::size_t, 5>& counts, std::uint64_t seed) {
  Rng rng(seed);
  sysdetect::Corpus corpus;
  const auto& names = pool();
  int serial = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (std::size_t i = 0; i < counts[c]; ++i) {
      std::vector<sysdetect::TraceRow> rows;
      for (std::size_t s = 0; s < names.size(); ++s) {
        // Each category favours its own band of syscalls.
        const bool favoured = (s % 5) == c;
        if (!favoured && rng.uniform() < 0.35) continue;
        sysdetect::TraceRow r;
        r.syscall = names[s];
        const double base = favoured ? 400.0 : 60.0;
        r.calls = 1 + static_cast<std::int64_t>(base * (0.5 + rng.uniform()));
        r.errors = favoured && c != 0 ? static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(r.calls / 4 + 1))) : 0;
        r.seconds = static_cast<double>(rng.below(5000)) / 1e6;
        r.usecs_per_call = static_cast<std::int64_t>(r.seconds * 1e6 / static_cast<double>(r.calls));
        rows.push_back(r);
      }
      char id[48];
      std::snprintf(id, sizeof id, "%s_%03d.log",
                    std::string(sysdetect::category_token(sysdetect::kAllCategories[c])).c_str(), serial++);
      corpus.samples.push_back({id, sysdetect::kAllCategories[c], sysdetect::summarize_rows(std::move(rows))});
    }
  }
  return corpus;
}

fs::path write_corpus(const sysdetect::Corpus& corpus, const fs::path& dir) {
  std::string manifest = "path,category\n";
  for (const auto& s : corpus.samples) {
    sysdetect::write_text_file(dir / "logs" / s.id, sysdetect::render_summary(s.summary));
    manifest += "logs/" + s.id + "," + std::string(sysdetect::category_token(s.category)) + "\n";
  }
  sysdetect::write_text_file(dir / "manifest.csv", manifest);
  return dir / "manifest.csv";
}

Blobs gaussian_blobs(std::size_t n, int dims, int classes, double separation, std::uint64_t seed) {
  Rng rng(seed);
  Blobs b;
  b.X.resize(static_cast<Eigen::Index>(n), dims);
  // Class c sits at separation * (binary digits of c) on the leading axes,
  // so every pair of means is at least `separation` apart.
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % static_cast<std::size_t>(classes));
    for (int j = 0; j < dims; ++j) {
      const double mean = j < 31 && ((c >> j) & 1) ? separation : 0.0;
      b.X(static_cast<Eigen::Index>(i), j) = rng.normal() + mean;
    }
    b.y.push_back("class" + std::to_string(c));
  }
  return b;
}

std::vector<int> knn_oracle(const Eigen::MatrixXd& train, const std::vector<int>& labels,
                            const Eigen::MatrixXd& query, int k, sysdetect::Metric metric, double p,
                            int classes) {
  std::vector<int> out;
  for (Eigen::Index q = 0; q < query.rows(); ++q) {
    std::vector<std::pair<double, Eigen::Index>> all;
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
      double acc = 0;
      for (Eigen::Index j = 0; j < train.cols(); ++j) {
        const double d = std::abs(query(q, j) - train(i, j));
        if (metric == sysdetect::Metric::Manhattan) acc += d;
        else if (metric == sysdetect::Metric::Euclidean) acc += d * d;
        else acc += std::pow(d, p);
      }
      if (metric == sysdetect::Metric::Euclidean) acc = std::sqrt(acc);
      if (metric == sysdetect::Metric::Minkowski) acc = std::pow(acc, 1.0 / p);
      all.emplace_back(acc, i);
    }
    std::sort(all.begin(), all.end());
    std::vector<int> votes(static_cast<std::size_t>(classes), 0);
    for (int m = 0; m < k; ++m) ++votes[static_cast<std::size_t>(labels[static_cast<std::size_t>(all[static_cast<std::size_t>(m)].second)])];
    int best = 0;
    for (int c = 1; c < classes; ++c) {
      if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    }
    out.push_back(best);
  }
  return out;
}

double dual_oracle(const Eigen::MatrixXd& K, const Eigen::VectorXd& t, double C) {
  const int n = static_cast<int>(t.size());
  const Eigen::MatrixXd Q = (t * t.transpose()).cwiseProduct(K);
  auto objective = [&](const Eigen::VectorXd& a) { return a.sum() - 0.5 * a.dot(Q * a); };
  double best = -std::numeric_limits<double>::infinity();
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (int code = 0; code < total; ++code) {
    // state: 0 at lower bound, 1 at upper bound, 2 free
    std::vector<int> state(static_cast<std::size_t>(n));
    std::vector<int> free_idx;
    for (int i = 0, rest = code; i < n; ++i, rest /= 3) {
      state[static_cast<std::size_t>(i)] = rest % 3;
      if (rest % 3 == 2) free_idx.push_back(i);
    }
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (state[static_cast<std::size_t>(i)] == 1) a[i] = C;
    }
    const int m = static_cast<int>(free_idx.size());
    if (m > 0) {
      // Stationarity over the free block with multiplier nu for sum(a t) = 0:
      //   Q_FF a_F + nu t_F = 1 - Q_FB a_B,   t_F' a_F = -t_B' a_B
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, m + 1);
      Eigen::VectorXd rhs(m + 1);
      double fixed_sum = 0;
      for (int i = 0; i < n; ++i) {
        if (state[static_cast<std::size_t>(i)] != 2) fixed_sum += a[i] * t[i];
      }
      for (int r = 0; r < m; ++r) {
        const int i = free_idx[static_cast<std::size_t>(r)];
        double fixed = 0;
        for (int j = 0; j < n; ++j) {
          if (state[static_cast<std::size_t>(j)] != 2) fixed += Q(i, j) * a[j];
        }
        for (int c = 0; c < m; ++c) A(r, c) = Q(i, free_idx[static_cast<std::size_t>(c)]);
        A(r, m) = t[i];
        A(m, r) = t[i];
        rhs[r] = 1.0 - fixed;
      }
      rhs[m] = -fixed_sum;
      const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(rhs);
      if ((A * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) continue;
      for (int r = 0; r < m; ++r) a[free_idx[static_cast<std::size_t>(r)]] = sol[r];
    }
    if (std::abs(a.dot(t)) > 1e-9 * (1.0 + C * n)) continue;
    if ((a.array() < -1e-12).any() || (a.array() > C + 1e-12).any()) continue;
    best = std::max(best, objective(a));
  }
  return best;
}

OvrTotals ovr_oracle(const Eigen::MatrixXi& counts) {
  const int k = static_cast<int>(counts.rows());
  double total = 0, correct = 0;
  double mp = 0, mr = 0, mf = 0, wp = 0, wr = 0, wf = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) total += counts(i, j);
    correct += counts(i, i);
  }
  for (int c = 0; c < k; ++c) {
    double tp = counts(c, c), fp = 0, fn = 0;
    for (int o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += counts(o, c);
      fn += counts(c, o);
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0;
    const double support = tp + fn;
    mp += p / k;
    mr += r / k;
    mf += f / k;
    wp += p * support / total;
    wr += r * support / total;
    wf += f * support / total;
  }
  return {mp, mr, mf, wp, wr, wf, correct / total};
}

}  // namespace fixtures
