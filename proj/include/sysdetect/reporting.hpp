#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sysdetect/classifiers.hpp"
#include "sysdetect/corpus.hpp"
#include "sysdetect/features.hpp"
#include "sysdetect/metrics.hpp"
#include "sysdetect/model_selection.hpp"

namespace sysdetect {

struct ExperimentOptions {
  double test_fraction = 0.2;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  SplitStrategy split = SplitStrategy::Stratified;
  bool family_include_benign = false;
};

/// Grid search, refit winner and held-out scores for one model family.
struct FamilyOutcome {
  ParamGrid grid;
  GridReport grid_report;
  MarginalReport marginals;
  TrainedModel winner;
  std::vector<std::string> test_predictions;
  ScoreReport test_scores;
};

struct TaskOutcome {
  Task task = Task::Detection;
  std::vector<std::string> classes;
  std::optional<std::string> positive_class;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  std::vector<FamilyOutcome> families;  // LogReg, Knn, Svm, Tree, Mlp order
  std::optional<std::string> skipped;    // reason the task did not run
};

struct ExperimentRecord {
  ExperimentOptions options;
  std::array<std::size_t, 5> corpus_counts{};
  std::array<std::size_t, 5> train_counts{};
  std::array<std::size_t, 5> test_counts{};
  FeatureMatrix train;  // vocabulary comes from these samples only
  FeatureMatrix test;
  std::vector<TaskOutcome> tasks;  // detection, then family

  const Vocabulary& vocabulary() const { return train.vocabulary; }
};

/// Split, build the vocabulary on the training half, featurize both halves,
/// grid-search every family on the training half, refit each winner on all
/// training rows and score it on the test rows. The family task is skipped
/// (with a reason) when the training half has fewer than two family classes.
/// At most one grid per family.
ExperimentRecord run_experiment(const Corpus& corpus, const std::vector<ParamGrid>& grids,
                                const ExperimentOptions& options);

/// Deterministic JSON document of the whole record.
nlohmann::ordered_json record_json(const ExperimentRecord& record);

/// Parameter-marginal accuracy table for one family, detection and family
/// columns side by side.
std::string marginal_table(const ExperimentRecord& record, Family family);

/// Precision / recall / F1 per family and task (weighted averages, 2 decimals).
std::string score_table(const ExperimentRecord& record);

/// model,detection_f1,family_f1
std::string f1_csv(const ExperimentRecord& record);

/// Writes record.json, table_4_3_<family>.txt, table_4_4.txt, fig_4_1.csv,
/// vocabulary.txt, train.csv, test.csv and models/<task>_<family>.json.
void emit(const ExperimentRecord& record, const std::filesystem::path& dir);

/// Grids from every *.json file in `dir`, read in file-name order.
std::vector<ParamGrid> load_grids(const std::filesystem::path& dir);

}  // namespace sysdetect
