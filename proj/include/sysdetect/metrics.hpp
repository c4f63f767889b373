#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace sysdetect {

struct ConfusionMatrix {
  std::vector<std::string> classes;
  Eigen::MatrixXi counts;  // counts(i, j): true class i predicted as j
  std::optional<std::string> positive_class;

  long total() const { return counts.sum(); }
  bool is_binary() const { return positive_class.has_value() && classes.size() == 2; }

  // Binary accessors; throw NotBinary unless is_binary().
  long tp() const;
  long fp() const;
  long fn() const;
  long tn() const;
};

/// Throws LengthMismatch or UnknownLabel.
ConfusionMatrix confusion_matrix(std::span<const std::string> y_true,
                                 std::span<const std::string> y_pred,
                                 const std::vector<std::string>& classes,
                                 std::optional<std::string> positive_class = std::nullopt);

struct BinaryScores {
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
};

/// Precision TP/(TP+FP), recall TP/(TP+FN), accuracy (TP+TN)/total,
/// f1 = 2PR/(P+R). Any ratio with a zero denominator is 0.
BinaryScores binary_scores(const ConfusionMatrix& cm);

enum class Averaging { Macro, Weighted };

struct AveragedScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

/// One-vs-rest per class, then macro (unweighted) or support-weighted mean.
/// Throws EmptyMatrix for fewer than two classes or no samples.
AveragedScores averaged_scores(const ConfusionMatrix& cm, Averaging averaging);

struct ClassScores {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
};

struct ScoreReport {
  std::vector<ClassScores> per_class;
  AveragedScores macro;
  AveragedScores weighted;
  std::optional<BinaryScores> binary;  // set for binary matrices with a positive class
  double accuracy = 0.0;
  long total = 0;
};

ScoreReport classification_report(const ConfusionMatrix& cm);

/// Per-class one-vs-rest scores in class order.
std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm);

nlohmann::ordered_json score_report_json(const ScoreReport& report);
std::string score_report_text(const ScoreReport& report);

}  // namespace sysdetect
