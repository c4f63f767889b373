#include "sysdetect/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "sysdetect/error.hpp"

namespace sysdetect {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

struct BinaryIndex {
  Eigen::Index pos;
  Eigen::Index neg;
};

BinaryIndex binary_index(const ConfusionMatrix& cm) {
  if (!cm.is_binary()) throw Error(ErrorCode::NotBinary, "matrix is not binary with a positive class");
  const auto pos = static_cast<Eigen::Index>(
      std::find(cm.classes.begin(), cm.classes.end(), *cm.positive_class) - cm.classes.begin());
  if (pos >= 2) throw Error(ErrorCode::NotBinary, "positive class not among classes");
  return {pos, 1 - pos};
}

}  // namespace

long ConfusionMatrix::tp() const {
  const auto b = binary_index(*this);
  return counts(b.pos, b.pos);
}
long ConfusionMatrix::fp() const {
  const auto b = binary_index(*this);
  return counts(b.neg, b.pos);
}
long ConfusionMatrix::fn() const {
  const auto b = binary_index(*this);
  return counts(b.pos, b.neg);
}
long ConfusionMatrix::tn() const {
  const auto b = binary_index(*this);
  return counts(b.neg, b.neg);
}

ConfusionMatrix confusion_matrix(std::span<const std::string> y_true,
                                 std::span<const std::string> y_pred,
                                 const std::vector<std::string>& classes,
                                 std::optional<std::string> positive_class) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(y_true.size()) + " truths vs " +
                                               std::to_string(y_pred.size()) + " predictions");
  }
  auto index_of = [&](const std::string& label) {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw Error(ErrorCode::UnknownLabel, label);
    return static_cast<Eigen::Index>(it - classes.begin());
  };
  if (positive_class) index_of(*positive_class);
  const auto k = static_cast<Eigen::Index>(classes.size());
  ConfusionMatrix cm{classes, Eigen::MatrixXi::Zero(k, k), std::move(positive_class)};
  for (std::size_t i = 0; i < y_true.size(); ++i) ++cm.counts(index_of(y_true[i]), index_of(y_pred[i]));
  return cm;
}

BinaryScores binary_scores(const ConfusionMatrix& cm) {
  const double tp = static_cast<double>(cm.tp());
  const double fp = static_cast<double>(cm.fp());
  const double fn = static_cast<double>(cm.fn());
  const double tn = static_cast<double>(cm.tn());
  BinaryScores s;
  s.precision = ratio(tp, tp + fp);
  s.recall = ratio(tp, tp + fn);
  s.accuracy = ratio(tp + tn, tp + fp + fn + tn);
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm) {
  std::vector<ClassScores> out;
  for (Eigen::Index i = 0; i < cm.counts.rows(); ++i) {
    ClassScores c;
    c.label = cm.classes[static_cast<std::size_t>(i)];
    const double hit = cm.counts(i, i);
    c.support = cm.counts.row(i).sum();
    c.precision = ratio(hit, cm.counts.col(i).sum());
    c.recall = ratio(hit, static_cast<double>(c.support));
    c.f1 = harmonic(c.precision, c.recall);
    out.push_back(std::move(c));
  }
  return out;
}

AveragedScores averaged_scores(const ConfusionMatrix& cm, Averaging averaging) {
  if (cm.classes.size() < 2 || cm.total() == 0) {
    throw Error(ErrorCode::EmptyMatrix, "need at least two classes and one sample");
  }
  const auto per_class = per_class_scores(cm);
  const double total = static_cast<double>(cm.total());
  AveragedScores s;
  for (const auto& c : per_class) {
    const double w = averaging == Averaging::Macro ? 1.0 / static_cast<double>(per_class.size())
                                                   : static_cast<double>(c.support) / total;
    s.precision += w * c.precision;
    s.recall += w * c.recall;
    s.f1 += w * c.f1;
  }
  s.accuracy = static_cast<double>(cm.counts.trace()) / total;
  return s;
}

ScoreReport classification_report(const ConfusionMatrix& cm) {
  ScoreReport r;
  r.per_class = per_class_scores(cm);
  r.total = cm.total();
  if (r.total > 0) r.accuracy = static_cast<double>(cm.counts.trace()) / static_cast<double>(r.total);
  if (cm.classes.size() >= 2 && r.total > 0) {
    r.macro = averaged_scores(cm, Averaging::Macro);
    r.weighted = averaged_scores(cm, Averaging::Weighted);
  }
  if (cm.is_binary()) r.binary = binary_scores(cm);
  return r;
}

nlohmann::ordered_json score_report_json(const ScoreReport& r) {
  using ojson = nlohmann::ordered_json;
  ojson per_class = ojson::array();
  for (const auto& c : r.per_class) {
    per_class.push_back({{"label", c.label},
                         {"precision", c.precision},
                         {"recall", c.recall},
                         {"f1", c.f1},
                         {"support", c.support}});
  }
  auto avg = [](const AveragedScores& a) {
    return ojson{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
  };
  ojson j;
  j["accuracy"] = r.accuracy;
  j["total"] = r.total;
  j["macro"] = avg(r.macro);
  j["weighted"] = avg(r.weighted);
  if (r.binary) {
    j["binary"] = {{"precision", r.binary->precision},
                   {"recall", r.binary->recall},
                   {"accuracy", r.binary->accuracy},
                   {"f1", r.binary->f1}};
  }
  j["per_class"] = std::move(per_class);
  return j;
}

std::string score_report_text(const ScoreReport& r) {
  std::string out;
  char buf[256];
  std::size_t w = 12;
  for (const auto& c : r.per_class) w = std::max(w, c.label.size());
  const int wi = static_cast<int>(w);
  std::snprintf(buf, sizeof buf, "%-*s  %9s  %6s  %8s  %7s\n", wi, "", "precision", "recall",
                "f1-score", "support");
  out += buf;
  for (const auto& c : r.per_class) {
    std::snprintf(buf, sizeof buf, "%-*s  %9.2f  %6.2f  %8.2f  %7ld\n", wi, c.label.c_str(),
                  c.precision, c.recall, c.f1, c.support);
    out += buf;
  }
  out += "\n";
  std::snprintf(buf, sizeof buf, "%-*s  %9s  %6s  %8.2f  %7ld\n", wi, "accuracy", "", "", r.accuracy,
                r.total);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-*s  %9.2f  %6.2f  %8.2f  %7ld\n", wi, "macro avg",
                r.macro.precision, r.macro.recall, r.macro.f1, r.total);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-*s  %9.2f  %6.2f  %8.2f  %7ld\n", wi, "weighted avg",
                r.weighted.precision, r.weighted.recall, r.weighted.f1, r.total);
  out += buf;
  if (r.binary) {
    std::snprintf(buf, sizeof buf, "%-*s  %9.2f  %6.2f  %8.2f  %7ld\n", wi, "positive class",
                  r.binary->precision, r.binary->recall, r.binary->f1, r.total);
    out += buf;
  }
  return out;
}

}  // namespace sysdetect
