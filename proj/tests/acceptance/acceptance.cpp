// Runs every acceptance property and prints one PASS/FAIL line per item.
// Exit status is non-zero when any item fails.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <iostream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "sysdetect/analysis.hpp"
#include "sysdetect/classifiers.hpp"
#include "sysdetect/corpus.hpp"
#include "sysdetect/extraction.hpp"
#include "sysdetect/features.hpp"
#include "sysdetect/kernels.hpp"
#include "sysdetect/metrics.hpp"
#include "sysdetect/model_selection.hpp"
#include "sysdetect/rng.hpp"
#include "sysdetect/strace.hpp"
#include "sysdetect/svm_solver.hpp"

namespace fs = std::filesystem;
using namespace sysdetect;
using ojson = nlohmann::ordered_json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome golden_parse() {
  Outcome o;
  const std::string text = read_text_file(fixtures::data_dir() / "reference_summary.log");
  const TraceSummary s = parse_summary(text);
  std::int64_t calls = 0, errors = 0;
  long long micros = 0;
  for (const auto& r : s.rows) {
    calls += r.calls;
    errors += r.errors;
    micros += std::llround(r.seconds * 1e6);
  }
  o.require(s.rows.size() == 24, "row count " + std::to_string(s.rows.size()));
  o.require(calls == 16989 && s.total_calls == 16989, "call sum " + std::to_string(calls));
  o.require(errors == 2217 && s.total_errors == 2217, "error sum " + std::to_string(errors));
  o.require(micros == 452552 && std::llround(s.total_seconds * 1e6) == 452552,
            "seconds sum " + std::to_string(micros) + "us");
  o.require(validate_summary(s).empty(), "validation reported violations");
  o.require(parse_summary(render_summary(s)) == s, "render/parse roundtrip differs");
  if (o.pass) o.detail = "24 rows, 16989 calls, 2217 errors, 0.452552 s";
  return o;
}

Outcome error_percent_formula() {
  Outcome o;
  const double malware = error_percent(19112, 1852);
  const double benign = error_percent(35576, 4601);
  o.require(std::abs(malware - 9.69) <= 0.005, "malware " + fmt("%.4f", malware));
  o.require(std::abs(benign - 12.93) <= 0.005, "benign " + fmt("%.4f", benign));
  if (o.pass) o.detail = fmt("%.2f", malware) + " / " + fmt("%.2f", benign);
  return o;
}

Outcome dimension_law() {
  Outcome o;
  // 95 distinct names spread over a handful of samples.
  std::vector<std::string> names;
  for (int i = 0; i < 95; ++i) names.push_back("sys_" + std::to_string(i));
  Corpus corpus;
  for (int s = 0; s < 5; ++s) {
    std::vector<std::string> part;
    for (int i = s; i < 95; i += 5) part.push_back(names[static_cast<std::size_t>(i)]);
    corpus.samples.push_back({"s" + std::to_string(s), s == 0 ? Category::Benign : Category::Adware,
                              fixtures::random_summary(part, 1.0, 100 + static_cast<std::uint64_t>(s))});
  }
  const Vocabulary vocab = build_vocabulary(corpus);
  const FeatureMatrix m = build_matrix(corpus, vocab);
  o.require(vocab.size() == 95 && vocab.dimension() == 190 && m.rows.cols() == 190,
            "dimension " + std::to_string(m.rows.cols()));

  Rng rng(7);
  for (int trial = 0; trial < 30 && o.pass; ++trial) {
    Corpus c;
    const std::size_t n = 1 + rng.below(8);
    for (std::size_t s = 0; s < n; ++s) {
      c.samples.push_back({"t" + std::to_string(s), Category::Benign,
                           fixtures::random_summary(names, rng.uniform(0.05, 0.6), rng.next())});
    }
    const Vocabulary v = build_vocabulary(c);
    const FeatureMatrix fm = build_matrix(c, v);
    o.require(fm.rows.cols() == static_cast<Eigen::Index>(2 * v.size()), "dimension law broken");
    const auto d = static_cast<Eigen::Index>(v.size());
    for (Eigen::Index r = 0; r < fm.rows.rows(); ++r) {
      const auto& summary = c.samples[static_cast<std::size_t>(r)].summary;
      const double calls = fm.rows.row(r).head(d).sum();
      const double errs = fm.rows.row(r).tail(d).sum();
      o.require(std::abs(calls - (summary.total_calls > 0 ? 1.0 : 0.0)) <= 1e-9, "call half sums to " + fmt("%.12f", calls));
      o.require(std::abs(errs - (summary.total_errors > 0 ? 1.0 : 0.0)) <= 1e-9, "error half sums to " + fmt("%.12f", errs));
    }
  }
  if (o.pass) o.detail = "95 syscalls -> 190 features; halves sum to 1 over 30 random corpora";
  return o;
}

ParamGrid grid(const char* json) { return grid_from_json(ojson::parse(json)); }

std::vector<ParamGrid> sanity_grids() {
  return {grid(R"({"family": "logreg", "axes": {"C": [1, 100]}})"),
          grid(R"({"family": "knn", "axes": {"n_neighbors": [3, 9, 15], "metric": ["euclidean", "manhattan"]}})"),
          grid(R"({"family": "svm", "axes": {"kernel": ["linear", "rbf"], "C": [1, 10]}})"),
          grid(R"({"family": "tree", "axes": {"criterion": ["gini", "entropy"], "max_depth": [null, 4]}})"),
          grid(R"({"family": "mlp", "axes": {"hidden_layers": [[16]], "max_iter": [300]}})")};
}

// Best grid config of each family, refit on the training rows, scored on the held-out fifth.
std::vector<std::pair<Family, double>> blob_accuracies(const fixtures::Blobs& b, std::uint64_t seed,
                                                       const std::set<Family>& families) {
  std::vector<std::size_t> order(static_cast<std::size_t>(b.X.rows()));
  std::iota(order.begin(), order.end(), 0);
  Rng(seed).shuffle(order);
  const std::size_t n_test = order.size() / 5;
  auto take = [&](std::size_t from, std::size_t to, Eigen::MatrixXd& X, std::vector<std::string>& y) {
    X.resize(static_cast<Eigen::Index>(to - from), b.X.cols());
    for (std::size_t i = from; i < to; ++i) {
      X.row(static_cast<Eigen::Index>(i - from)) = b.X.row(static_cast<Eigen::Index>(order[i]));
      y.push_back(b.y[order[i]]);
    }
  };
  Eigen::MatrixXd Xte, Xtr;
  std::vector<std::string> yte, ytr;
  take(0, n_test, Xte, yte);
  take(n_test, order.size(), Xtr, ytr);
  std::vector<std::pair<Family, double>> out;
  for (const auto& g : sanity_grids()) {
    if (!families.contains(g.family)) continue;
    const GridReport report = grid_search(g, Xtr, ytr, 5, seed);
    const TrainedModel model = train(report.results[report.best].config, Xtr, ytr, seed);
    out.emplace_back(g.family, accuracy(yte, predict(model, Xte)));
  }
  return out;
}

Outcome classifier_sanity() {
  Outcome o;
  std::string summary;
  const auto two = blob_accuracies(fixtures::gaussian_blobs(200, 10, 2, 4.0, 11), 11,
                                   {kAllFamilies.begin(), kAllFamilies.end()});
  for (const auto& [f, acc] : two) {
    o.require(acc >= 0.95, std::string(family_tag(f)) + " 2-class accuracy " + fmt("%.3f", acc));
    summary += (summary.empty() || summary.back() == ' ' ? "" : " ") + std::string(family_tag(f)) + "=" + fmt("%.3f", acc);
  }
  const auto four = blob_accuracies(fixtures::gaussian_blobs(280, 10, 4, 4.0, 12), 12,
                                    {Family::Tree, Family::Knn, Family::Mlp});
  summary += " | 4-class";
  for (const auto& [f, acc] : four) {
    o.require(acc >= 0.90, std::string(family_tag(f)) + " 4-class accuracy " + fmt("%.3f", acc));
    summary += (summary.empty() || summary.back() == ' ' ? "" : " ") + std::string(family_tag(f)) + "=" + fmt("%.3f", acc);
  }
  if (o.pass) o.detail = summary;
  return o;
}

Outcome knn_oracle_equivalence() {
  Outcome o;
  Rng rng(5);
  int compared = 0;
  for (int inst = 0; inst < 100 && o.pass; ++inst) {
    const int n = 5 + static_cast<int>(rng.below(30));
    const int d = 1 + static_cast<int>(rng.below(4));
    const int classes = 2 + static_cast<int>(rng.below(3));
    const bool lattice = inst % 2 == 0;  // small integer grid provokes distance ties
    Eigen::MatrixXd X(n, d), Q(10, d);
    auto fill = [&](Eigen::MatrixXd& M) {
      for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
          M(i, j) = lattice ? static_cast<double>(rng.below(4)) : rng.uniform(-2, 2);
    };
    fill(X);
    fill(Q);
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::vector<std::string> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      labels[static_cast<std::size_t>(i)] = i < classes ? i : static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
      y[static_cast<std::size_t>(i)] = "c" + std::to_string(labels[static_cast<std::size_t>(i)]);
    }
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(n, 9))));
    for (Metric metric : {Metric::Manhattan, Metric::Euclidean, Metric::Minkowski}) {
      KnnConfig cfg;
      cfg.k = k;
      cfg.metric = metric;
      const TrainedModel model = train(cfg, X, y, 0);
      const auto got = predict(model, Q);
      const auto want = fixtures::knn_oracle(X, labels, Q, k, metric, cfg.p, classes);
      for (std::size_t q = 0; q < got.size(); ++q) {
        o.require(got[q] == "c" + std::to_string(want[q]),
                  "instance " + std::to_string(inst) + " query " + std::to_string(q));
        ++compared;
      }
    }
  }
  if (o.pass) o.detail = std::to_string(compared) + " predictions identical";
  return o;
}

Outcome gradient_checks() {
  Outcome o;
  Rng rng(21);
  double worst_lr = 0, worst_mlp = 0;
  for (int point = 0; point < 20; ++point) {
    const int n = 12, d = 4;
    Eigen::MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.normal();
    std::vector<std::string> y;
    for (int i = 0; i < n; ++i) y.push_back("c" + std::to_string(i % 3));

    LogRegConfig lr;
    lr.c = rng.uniform(0.1, 10);
    Eigen::VectorXd p = Eigen::VectorXd::NullaryExpr(parameter_count(lr, d, 3), [&] { return rng.normal(); });
    auto lr_loss = [&](const Eigen::VectorXd& v) { return loss_and_gradient(lr, v, X, y).loss; };
    const double e1 = fixtures::relative_error(loss_and_gradient(lr, p, X, y).gradient,
                                               fixtures::numeric_gradient(lr_loss, p, 1e-5));
    worst_lr = std::max(worst_lr, e1);

    MlpConfig mlp;
    mlp.hidden_layers = {5, 4};
    mlp.alpha = rng.uniform(0.0, 0.1);
    Eigen::VectorXd q = Eigen::VectorXd::NullaryExpr(parameter_count(mlp, d, 3), [&] { return 0.5 * rng.normal(); });
    auto mlp_loss = [&](const Eigen::VectorXd& v) { return loss_and_gradient(mlp, v, X, y).loss; };
    const double e2 = fixtures::relative_error(loss_and_gradient(mlp, q, X, y).gradient,
                                               fixtures::numeric_gradient(mlp_loss, q, 1e-5));
    worst_mlp = std::max(worst_mlp, e2);
  }
  o.require(worst_lr <= 1e-4, "logreg relative error " + fmt("%.2e", worst_lr));
  o.require(worst_mlp <= 1e-4, "mlp relative error " + fmt("%.2e", worst_mlp));
  if (o.pass) o.detail = "max relative error logreg " + fmt("%.1e", worst_lr) + ", mlp " + fmt("%.1e", worst_mlp);
  return o;
}

Outcome svm_dual_oracle() {
  Outcome o;
  Rng rng(33);
  double worst = 0, worst_gap = 0;
  const double tol = 1e-3;
  for (int inst = 0; inst < 60 && o.pass; ++inst) {
    const int n = 2 + static_cast<int>(rng.below(5));
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd t(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = rng.normal();
      X(i, 1) = rng.normal();
      t[i] = i == 0 ? 1.0 : i == 1 ? -1.0 : (rng.uniform() < 0.5 ? 1.0 : -1.0);
    }
    const KernelKind kind = inst % 3 == 0 ? KernelKind::Linear : inst % 3 == 1 ? KernelKind::Rbf : KernelKind::Poly;
    const Eigen::MatrixXd K = kernel_matrix(X, X, kind, 0.5, 2);
    const double C = std::pow(10.0, rng.uniform(-1, 2));
    const DualSolution sol = solve_svm_dual(K, t, C, tol, 100000);
    const double best = fixtures::dual_oracle(K, t, C);
    const double diff = std::abs(dual_objective(K, t, sol.alpha) - best);
    worst = std::max(worst, diff);
    worst_gap = std::max(worst_gap, sol.kkt_gap);
    o.require(diff <= 1e-3, "instance " + std::to_string(inst) + " objective gap " + fmt("%.2e", diff));
    o.require(sol.kkt_gap <= tol, "instance " + std::to_string(inst) + " kkt gap " + fmt("%.2e", sol.kkt_gap));
    o.require(std::abs(sol.alpha.dot(t)) <= 1e-9 && sol.alpha.minCoeff() >= 0 && sol.alpha.maxCoeff() <= C,
              "instance " + std::to_string(inst) + " infeasible alpha");
  }
  if (o.pass) o.detail = "60 instances, max objective gap " + fmt("%.1e", worst) + ", max kkt gap " + fmt("%.1e", worst_gap);
  return o;
}

Outcome tree_consistency() {
  Outcome o;
  Rng rng(44);
  for (int ds = 0; ds < 50 && o.pass; ++ds) {
    const int n = 10 + static_cast<int>(rng.below(60));
    const int d = 1 + static_cast<int>(rng.below(5));
    Eigen::MatrixXd X(n, d);
    std::vector<std::string> y;
    std::map<std::vector<double>, std::string> seen;  // identical points share a label
    for (int i = 0; i < n; ++i) {
      std::vector<double> key;
      for (int j = 0; j < d; ++j) {
        X(i, j) = static_cast<double>(rng.below(6));
        key.push_back(X(i, j));
      }
      auto it = seen.find(key);
      if (it == seen.end()) it = seen.emplace(key, "c" + std::to_string(rng.below(3))).first;
      y.push_back(it->second);
    }
    if (std::set<std::string>(y.begin(), y.end()).size() < 2) y[0] = y[0] == "c0" ? "c1" : "c0";
    // keep consistency after a forced relabel
    for (int i = 1; i < n; ++i) {
      if (X.row(i) == X.row(0)) y[static_cast<std::size_t>(i)] = y[0];
    }
    if (std::set<std::string>(y.begin(), y.end()).size() < 2) continue;
    for (Criterion crit : {Criterion::Gini, Criterion::Entropy}) {
      TreeConfig cfg;
      cfg.criterion = crit;
      const TrainedModel model = train(cfg, X, y, 0);
      o.require(accuracy(y, predict(model, X)) == 1.0, "dataset " + std::to_string(ds) + " not fitted");
    }
  }
  Eigen::MatrixXd xor_x(4, 2);
  xor_x << 0, 0, 0, 1, 1, 0, 1, 1;
  const std::vector<std::string> xor_y = {"a", "b", "b", "a"};
  TreeConfig stump;
  stump.max_depth = 1;
  const double stump_acc = accuracy(xor_y, predict(train(stump, xor_x, xor_y, 0), xor_x));
  const TrainedModel full = train(TreeConfig{}, xor_x, xor_y, 0);
  const int depth = tree_depth(std::get<TreeState>(full.state));
  o.require(stump_acc < 1.0, "depth-1 tree fits xor");
  o.require(depth >= 2 && accuracy(xor_y, predict(full, xor_x)) == 1.0, "xor depth " + std::to_string(depth));
  if (o.pass) o.detail = "50 datasets fitted exactly; xor needs depth " + std::to_string(depth);
  return o;
}

Outcome model_selection_properties() {
  Outcome o;
  std::size_t splits = 0;
  for (std::size_t n = 2; n <= 200 && o.pass; ++n) {
    for (std::size_t k = 2; k <= n && o.pass; ++k) {
      const Folds folds = k_fold_split(n, k, n * 1000 + k);
      std::vector<int> hits(n, 0);
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const std::size_t want = n / k + (f < n % k ? 1 : 0);
        o.require(folds[f].size() == want, "fold size n=" + std::to_string(n) + " k=" + std::to_string(k));
        for (auto i : folds[f]) {
          if (i < n) ++hits[i];
        }
      }
      o.require(folds.size() == k && std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }),
                "not a partition n=" + std::to_string(n) + " k=" + std::to_string(k));
      ++splits;
    }
  }

  Rng rng(55);
  double worst_identity = 0;
  for (int trial = 0; trial < 12 && o.pass; ++trial) {
    const auto b = fixtures::gaussian_blobs(30 + rng.below(20), 3, 2, 1.0, rng.next());
    ojson doc = {{"family", "knn"}, {"axes", ojson::object()}};
    std::vector<int> ks = {1, 3, 5, 7, 9};
    Rng(rng.next()).shuffle(ks);
    ks.resize(2 + rng.below(3));
    doc["axes"]["n_neighbors"] = ks;
    doc["axes"]["metric"] = trial % 2 ? ojson{"euclidean", "manhattan", "minkowski"} : ojson{"manhattan", "euclidean"};
    const ParamGrid g = grid_from_json(doc);
    const GridReport report = grid_search(g, b.X, b.y, 3 + rng.below(3), rng.next());
    double top = -1;
    std::size_t first = 0;
    double overall = 0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < report.results.size(); ++i) {
      const auto& r = report.results[i];
      if (r.failed) continue;
      if (r.mean_accuracy > top) {
        top = r.mean_accuracy;
        first = i;
      }
      overall += r.mean_accuracy;
      ++ok;
    }
    overall /= static_cast<double>(ok);
    o.require(report.best == first, "winner is not the first maximum");
    const MarginalReport m = marginal_report(report, g);
    for (const auto& axis : g.axes) {
      double weighted = 0;
      std::size_t count = 0;
      for (const auto& e : m.entries) {
        if (e.parameter != axis.name || !e.average) continue;
        weighted += *e.average * static_cast<double>(e.count);
        count += e.count;
      }
      const double diff = std::abs(weighted / static_cast<double>(count) - overall);
      worst_identity = std::max(worst_identity, diff);
      o.require(diff <= 1e-12, "marginal recombination off by " + fmt("%.2e", diff));
    }
  }
  if (o.pass) {
    o.detail = std::to_string(splits) + " splits partition; winners first-max; recombination within " +
               fmt("%.0e", std::max(worst_identity, 1e-16));
  }
  return o;
}

Outcome metrics_oracle() {
  Outcome o;
  ConfusionMatrix cm;
  cm.classes = {"benign", "malware"};
  cm.positive_class = "malware";
  cm.counts.resize(2, 2);
  cm.counts << 6, 2, 4, 8;  // rows: truth; TN=6 FP=2 FN=4 TP=8
  const BinaryScores s = binary_scores(cm);
  auto r4 = [](double v) { return std::round(v * 1e4) / 1e4; };
  o.require(r4(s.precision) == 0.8 && r4(s.recall) == 0.6667 && r4(s.accuracy) == 0.7 && r4(s.f1) == 0.7273,
            "binary scores " + fmt("%.4f", s.precision) + " " + fmt("%.4f", s.recall) + " " +
                fmt("%.4f", s.accuracy) + " " + fmt("%.4f", s.f1));
  Rng rng(66);
  for (int trial = 0; trial < 50 && o.pass; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(5));
    ConfusionMatrix m;
    for (int c = 0; c < k; ++c) m.classes.push_back("c" + std::to_string(c));
    m.counts = Eigen::MatrixXi::NullaryExpr(k, k, [&] { return static_cast<int>(rng.below(20)); });
    m.counts(0, 0) += 1;
    const auto want = fixtures::ovr_oracle(m.counts);
    const auto macro = averaged_scores(m, Averaging::Macro);
    const auto weighted = averaged_scores(m, Averaging::Weighted);
    const double err = std::max({std::abs(macro.precision - want.macro_precision),
                                 std::abs(macro.recall - want.macro_recall),
                                 std::abs(macro.f1 - want.macro_f1),
                                 std::abs(weighted.precision - want.weighted_precision),
                                 std::abs(weighted.recall - want.weighted_recall),
                                 std::abs(weighted.f1 - want.weighted_f1),
                                 std::abs(macro.accuracy - want.accuracy)});
    o.require(err <= 1e-12, "matrix " + std::to_string(trial) + " differs by " + fmt("%.2e", err));
  }
  if (o.pass) o.detail = "(0.8000, 0.6667, 0.7000, 0.7273); 50 random matrices agree";
  return o;
}

Outcome extraction_transcript() {
  Outcome o;
  TraceSummary synthetic = summarize_rows({{50.0, 0.001, 100, 10, 1, "read"}, {50.0, 0.001, 200, 5, 0, "write"}});
  ScriptedDevice device(cooperative_script("com.example.app", "4242", render_summary(synthetic)));
  const EventSchedule schedule = default_event_schedule();
  const ExtractionResult ok = run_protocol(device, "app.apk", schedule);
  o.require(ok.success() && ok.log_text.has_value(), "cooperative run failed");
  const auto& tr = ok.transcript;
  auto positions = [&](Operation op) {
    std::vector<std::size_t> at;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (tr[i].op == op) at.push_back(i);
    }
    return at;
  };
  const auto attach = positions(Operation::TraceAttach);
  const auto broadcasts = positions(Operation::Broadcast);
  const auto batches = positions(Operation::SendRandomEvents);
  const auto kill = positions(Operation::Kill);
  const auto pull = positions(Operation::PullTraceLog);
  const auto install = positions(Operation::InstallAllPermissions);
  const auto launch = positions(Operation::Launch);
  const auto pid = positions(Operation::PidOf);
  o.require(attach.size() == 1 && kill.size() == 1 && pull.size() == 1, "attach/kill/pull counts");
  o.require(broadcasts.size() == 23, "broadcasts " + std::to_string(broadcasts.size()));
  o.require(batches.size() == 24, "random batches " + std::to_string(batches.size()));
  if (o.pass) {
    o.require(attach[0] > install.at(0) && attach[0] > launch.at(0) && attach[0] > pid.at(0), "attach too early");
    for (std::size_t i = 0; i < broadcasts.size(); ++i) {
      o.require(tr[broadcasts[i]].args.at(0) == schedule.events[i], "broadcast order at " + std::to_string(i));
      o.require(broadcasts[i] > attach[0] && broadcasts[i] < kill[0], "broadcast outside attach..kill");
    }
    o.require(pull[0] > kill[0], "pull before kill");
    o.require(tr.back().op == Operation::Uninstall, "uninstall is not last");
    o.require(parse_summary(*ok.log_text) == synthetic, "pulled log does not parse to the scripted rows");
    o.require(schedule.events.front() == "BOOT_COMPLETED", "schedule does not start with BOOT_COMPLETED");
  }

  DeviceScript boot = cooperative_script("com.example.app", "4242", render_summary(synthetic));
  boot.behaviors[Operation::PollBootComplete] = {{Behavior::Outcome::Delay, "", std::chrono::hours(1)}};
  ScriptedDevice never_boots(boot);
  const ExtractionResult r1 = run_protocol(never_boots, "app.apk", schedule);
  o.require(r1.failure && r1.failure->step == 1 && r1.failure->kind == FailureKind::StepTimeout && !r1.log_text,
            "boot timeout not reported at step 1");

  DeviceScript nopid = cooperative_script("com.example.app", "4242", render_summary(synthetic));
  nopid.behaviors[Operation::PidOf] = {{Behavior::Outcome::Fail, "no such process", {}}};
  ScriptedDevice pidless(nopid);
  const ExtractionResult r7 = run_protocol(pidless, "app.apk", schedule);
  bool saw_install = false, saw_launch = false, saw_attach = false;
  for (const auto& e : r7.transcript) {
    saw_install |= e.op == Operation::InstallAllPermissions;
    saw_launch |= e.op == Operation::Launch;
    saw_attach |= e.op == Operation::TraceAttach;
  }
  o.require(r7.failure && r7.failure->step == 7 && r7.failure->kind == FailureKind::StepFailed,
            "pid failure not reported at step 7");
  o.require(saw_install && saw_launch && !saw_attach, "step 7 transcript content");
  o.require(!r7.transcript.empty() && r7.transcript.back().op == Operation::Uninstall, "no cleanup uninstall");
  if (o.pass) o.detail = std::to_string(tr.size()) + " operations in order; step 1 timeout and step 7 failure cleaned up";
  return o;
}

int run(const std::vector<std::string>& args) {
  std::string cmd = "\"" + fixtures::cli_path().string() + "\"";
  for (const auto& a : args) cmd += " \"" + a + "\"";
  cmd += " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome end_to_end_determinism() {
  Outcome o;
  fixtures::TempDir tmp("acceptance");
  Corpus corpus = fixtures::synthetic_corpus({14, 8, 8, 8, 8}, 77);
  // Every sample carries a syscall nobody else has; test-half markers must not leak.
  for (auto& s : corpus.samples) {
    auto rows = s.summary.rows;
    rows.push_back({0.0, 0.0, 0, 3, 0, "marker_" + s.id.substr(0, s.id.find('.'))});
    s.summary = summarize_rows(std::move(rows));
  }
  const fs::path manifest = fixtures::write_corpus(corpus, tmp.path() / "corpus");
  const fs::path grids = tmp.path() / "grids";
  write_text_file(grids / "knn.json", R"({"family": "knn", "axes": {"n_neighbors": [1, 3]}})");
  write_text_file(grids / "tree.json", R"({"family": "tree", "axes": {"max_depth": [null, 3]}})");
  write_text_file(grids / "logreg.json", R"({"family": "logreg", "axes": {"C": [1, 10]}})");
  const fs::path a = tmp.path() / "a", b = tmp.path() / "b";
  const int ca = run({"experiment", "--manifest", manifest.string(), "--grids", grids.string(), "--seed", "9", "--out", a.string()});
  const int cb = run({"experiment", "--manifest", manifest.string(), "--grids", grids.string(), "--seed", "9", "--out", b.string()});
  o.require(ca == 0 && cb == 0, "experiment exit codes " + std::to_string(ca) + "/" + std::to_string(cb));
  if (!o.pass) return o;
  const std::string ra = read_text_file(a / "record.json");
  o.require(ra == read_text_file(b / "record.json"), "record.json differs between runs");
  const auto record = nlohmann::json::parse(ra);
  std::set<std::string> vocab;
  for (const auto& v : record["vocabulary"]) vocab.insert(v.get<std::string>());
  std::set<std::string> test_ids;
  for (const auto& id : record["test_ids"]) test_ids.insert(id.get<std::string>());
  const std::string persisted = read_text_file(a / "vocabulary.txt");
  std::size_t leaked = 0, test_markers = 0;
  for (const auto& s : corpus.samples) {
    const std::string marker = "marker_" + s.id.substr(0, s.id.find('.'));
    const bool in_test = test_ids.contains("logs/" + s.id);
    const bool present = vocab.contains(marker) || persisted.find(marker + "\n") != std::string::npos;
    if (in_test) {
      ++test_markers;
      if (present) ++leaked;
    } else {
      o.require(present, "training marker missing: " + marker);
    }
  }
  o.require(test_markers > 0, "no test samples");
  o.require(leaked == 0, std::to_string(leaked) + " test-only syscalls leaked");
  if (o.pass) o.detail = "record.json identical (" + std::to_string(ra.size()) + " bytes); " +
                         std::to_string(test_markers) + " test-only syscalls excluded";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> items = {
      {"strace golden parse", golden_parse},
      {"error percentage formula", error_percent_formula},
      {"feature dimension law", dimension_law},
      {"classifier sanity on blobs", classifier_sanity},
      {"knn brute-force equivalence", knn_oracle_equivalence},
      {"gradient checks", gradient_checks},
      {"svm dual optimum", svm_dual_oracle},
      {"tree consistency", tree_consistency},
      {"model selection properties", model_selection_properties},
      {"metrics oracle", metrics_oracle},
      {"extraction transcript", extraction_transcript},
      {"end-to-end determinism", end_to_end_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    Outcome o;
    try {
      o = items[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, items[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu passed\n", items.size() - static_cast<std::size_t>(failed), items.size());
  return failed == 0 ? 0 : 1;
}
