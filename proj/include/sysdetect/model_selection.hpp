#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sysdetect/classifiers.hpp"
#include "sysdetect/model_config.hpp"

namespace sysdetect {

using Folds = std::vector<std::vector<std::size_t>>;

/// Seeded shuffle of 0..n-1 cut into k contiguous folds; the first n % k
/// folds hold one extra index. Throws KOutOfRange unless 2 <= k <= n.
Folds k_fold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct CvResult {
  ModelConfig config;
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  bool failed = false;
  std::string error;  // "<code>: <detail>" when failed
};

/// Trains on all folds but one and scores accuracy on the held-out fold.
/// Throws FoldMissingClass when a training portion has fewer than 2 classes.
CvResult cross_validate(const ModelConfig& config, const Eigen::MatrixXd& X,
                        std::span<const std::string> y, std::size_t k, std::uint64_t seed);

/// Same, over precomputed folds.
CvResult cross_validate(const ModelConfig& config, const Eigen::MatrixXd& X,
                        std::span<const std::string> y, const Folds& folds, std::uint64_t seed);

struct ParamAxis {
  std::string name;
  std::vector<nlohmann::json> values;
};

struct ParamGrid {
  Family family = Family::Knn;
  std::vector<ParamAxis> axes;

  std::size_t size() const;
  /// Value assignment of configuration `index`; the last axis varies fastest.
  std::vector<nlohmann::json> assignment(std::size_t index) const;
  ModelConfig config(std::size_t index) const;
};

/// {"family": "knn", "axes": {"n_neighbors": [3, 5], ...}} with axes in
/// document order, or "axes" as [{"name": ..., "values": [...]}, ...].
/// Throws BadConfig.
ParamGrid grid_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json grid_to_json(const ParamGrid& grid);

struct GridReport {
  Family family = Family::Knn;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<nlohmann::json>> assignments;
  std::vector<CvResult> results;
  std::size_t best = 0;
};

/// Cross-validates every configuration on one shared fold assignment.
/// Failed configurations are recorded; throws AllConfigsFailed if none
/// succeeds. The winner is the earliest index with the highest mean.
GridReport grid_search(const ParamGrid& grid, const Eigen::MatrixXd& X,
                       std::span<const std::string> y, std::size_t k, std::uint64_t seed);

struct MarginalEntry {
  std::string parameter;
  nlohmann::json value;
  std::optional<double> average;  // empty when every matching config failed
  std::size_t count = 0;
};

struct MarginalReport {
  Family family = Family::Knn;
  std::vector<MarginalEntry> entries;
};

/// Unweighted mean accuracy per (axis, value) over successful configs.
/// Throws GridMismatch when the report was not produced from this grid.
MarginalReport marginal_report(const GridReport& report, const ParamGrid& grid);

nlohmann::ordered_json grid_report_json(const GridReport& report);
nlohmann::ordered_json marginal_report_json(const MarginalReport& report);

/// Aligned text table: Parameter | Value | one accuracy column per report
/// (percent, 2 decimals, "-" for missing). Reports must share a family; a
/// null report renders as an all-missing column.
std::string marginal_table_text(Family family, const std::vector<std::string>& column_titles,
                                const std::vector<const MarginalReport*>& reports);

double accuracy(std::span<const std::string> truth, std::span<const std::string> predicted);

}  // namespace sysdetect
