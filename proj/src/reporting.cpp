#include "sysdetect/reporting.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "sysdetect/error.hpp"

namespace sysdetect {

namespace {

using ojson = nlohmann::ordered_json;

std::uint64_t family_seed(std::uint64_t seed, Task task, Family family) {
  // Distinct, reproducible streams per (task, family).
  return seed * 1000003ULL + static_cast<std::uint64_t>(task) * 101ULL +
         static_cast<std::uint64_t>(family) + 1ULL;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<std::size_t>& index) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(index.size()), X.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(index[i]));
  }
  return out;
}

std::string with_context(const Error& e, const std::string& where) {
  return where + ": " + e.detail();
}

TaskOutcome run_task(Task task, const FeatureMatrix& train_rows, const FeatureMatrix& test_rows,
                     const std::vector<const ParamGrid*>& grids, const ExperimentOptions& options) {
  TaskOutcome outcome;
  outcome.task = task;
  const LabelVector y_train = make_labels(train_rows, task, options.family_include_benign);
  const LabelVector y_test = make_labels(test_rows, task, options.family_include_benign);
  outcome.train_samples = y_train.values.size();
  outcome.test_samples = y_test.values.size();
  std::set<std::string> classes(y_train.values.begin(), y_train.values.end());
  outcome.classes.assign(classes.begin(), classes.end());
  if (task == Task::Detection) outcome.positive_class = std::string(binary_label(Category::Adware));
  if (classes.size() < 2) {
    outcome.skipped = "training half has fewer than two classes";
    return outcome;
  }
  if (y_test.values.empty()) {
    outcome.skipped = "test half has no labelled samples";
    return outcome;
  }
  for (const auto& v : y_test.values) {
    if (!classes.contains(v)) {
      outcome.skipped = "test class '" + v + "' is absent from the training half";
      return outcome;
    }
  }
  const Eigen::MatrixXd X_train = rows_of(train_rows.rows, y_train.row_index);
  const Eigen::MatrixXd X_test = rows_of(test_rows.rows, y_test.row_index);

  for (const ParamGrid* grid : grids) {
    const std::string where = std::string(task_tag(task)) + "/" + std::string(family_tag(grid->family));
    try {
      FamilyOutcome f;
      f.grid = *grid;
      const std::uint64_t seed = family_seed(options.seed, task, grid->family);
      f.grid_report = grid_search(*grid, X_train, y_train.values, options.k, seed);
      f.marginals = marginal_report(f.grid_report, *grid);
      f.winner = train(f.grid_report.results[f.grid_report.best].config, X_train, y_train.values, seed);
      f.test_predictions = predict(f.winner, X_test);
      const auto cm = confusion_matrix(y_test.values, f.test_predictions, outcome.classes,
                                       outcome.positive_class);
      f.test_scores = classification_report(cm);
      outcome.families.push_back(std::move(f));
    } catch (const Error& e) {
      throw Error(e.code(), with_context(e, where));
    }
  }
  return outcome;
}

ojson counts_json(const std::array<std::size_t, 5>& counts) {
  ojson j = ojson::object();
  for (std::size_t i = 0; i < kAllCategories.size(); ++i) {
    j[std::string(category_token(kAllCategories[i]))] = counts[i];
  }
  return j;
}

const FamilyOutcome* find_family(const TaskOutcome& task, Family family) {
  for (const auto& f : task.families) {
    if (f.grid.family == family) return &f;
  }
  return nullptr;
}

const TaskOutcome* find_task(const ExperimentRecord& record, Task task) {
  for (const auto& t : record.tasks) {
    if (t.task == task) return &t;
  }
  return nullptr;
}

std::vector<Family> families_in(const ExperimentRecord& record) {
  std::vector<Family> out;
  for (Family f : kAllFamilies) {
    for (const auto& t : record.tasks) {
      if (find_family(t, f)) {
        out.push_back(f);
        break;
      }
    }
  }
  return out;
}

std::string two_dp(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

std::string aligned(const std::vector<std::vector<std::string>>& table) {
  std::vector<std::size_t> width;
  for (const auto& row : table) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line += std::string(width[c] - row[c].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace

ExperimentRecord run_experiment(const Corpus& corpus, const std::vector<ParamGrid>& grids,
                                const ExperimentOptions& options) {
  std::vector<const ParamGrid*> ordered;
  for (Family f : kAllFamilies) {
    const ParamGrid* found = nullptr;
    for (const auto& g : grids) {
      if (g.family != f) continue;
      if (found) throw Error(ErrorCode::BadConfig, "more than one grid for " + std::string(family_tag(f)));
      found = &g;
    }
    if (found) ordered.push_back(found);
  }

  ExperimentRecord record;
  record.options = options;
  record.corpus_counts = category_counts(corpus);
  auto [train_corpus, test_corpus] = stratified_split(corpus, options.test_fraction, options.seed,
                                                      options.split);
  record.train_counts = category_counts(train_corpus);
  record.test_counts = category_counts(test_corpus);
  const Vocabulary vocabulary = build_vocabulary(train_corpus);
  record.train = build_matrix(train_corpus, vocabulary);
  record.test = build_matrix(test_corpus, vocabulary);
  for (Task task : {Task::Detection, Task::Family}) {
    record.tasks.push_back(run_task(task, record.train, record.test, ordered, options));
  }
  return record;
}

nlohmann::ordered_json record_json(const ExperimentRecord& record) {
  ojson j;
  const auto& o = record.options;
  j["options"] = {{"test_fraction", o.test_fraction},
                  {"k", o.k},
                  {"seed", o.seed},
                  {"split", o.split == SplitStrategy::Stratified ? "stratified" : "uniform"},
                  {"family_include_benign", o.family_include_benign}};
  j["corpus"] = {{"all", counts_json(record.corpus_counts)},
                 {"train", counts_json(record.train_counts)},
                 {"test", counts_json(record.test_counts)}};
  j["vocabulary_size"] = record.vocabulary().size();
  j["feature_dimension"] = record.vocabulary().dimension();
  j["vocabulary"] = record.vocabulary().names;
  j["test_ids"] = record.test.ids;
  ojson tasks = ojson::array();
  for (const auto& t : record.tasks) {
    ojson tj;
    tj["task"] = task_tag(t.task);
    tj["classes"] = t.classes;
    if (t.positive_class) tj["positive_class"] = *t.positive_class;
    tj["train_samples"] = t.train_samples;
    tj["test_samples"] = t.test_samples;
    if (t.skipped) tj["skipped"] = *t.skipped;
    ojson fams = ojson::array();
    for (const auto& f : t.families) {
      ojson fj;
      fj["family"] = family_tag(f.grid.family);
      fj["grid"] = grid_to_json(f.grid);
      fj["grid_report"] = grid_report_json(f.grid_report);
      fj["marginals"] = marginal_report_json(f.marginals);
      fj["winner"] = config_to_json(f.winner.config);
      fj["test_predictions"] = f.test_predictions;
      fj["test_scores"] = score_report_json(f.test_scores);
      fams.push_back(std::move(fj));
    }
    tj["families"] = std::move(fams);
    tasks.push_back(std::move(tj));
  }
  j["tasks"] = std::move(tasks);
  return j;
}

std::string marginal_table(const ExperimentRecord& record, Family family) {
  std::vector<const MarginalReport*> reports;
  for (Task task : {Task::Detection, Task::Family}) {
    const TaskOutcome* t = find_task(record, task);
    const FamilyOutcome* f = t ? find_family(*t, family) : nullptr;
    reports.push_back(f ? &f->marginals : nullptr);
  }
  return marginal_table_text(family, {"Detection", "Family Classification"}, reports);
}

std::string score_table(const ExperimentRecord& record) {
  std::vector<std::vector<std::string>> table;
  table.push_back({"Model", "Precision", "", "Recall", "", "F1 Score", ""});
  table.push_back({"", "Detection", "Family", "Detection", "Family", "Detection", "Family"});
  const TaskOutcome* det = find_task(record, Task::Detection);
  const TaskOutcome* fam = find_task(record, Task::Family);
  for (Family family : families_in(record)) {
    const FamilyOutcome* d = det ? find_family(*det, family) : nullptr;
    const FamilyOutcome* m = fam ? find_family(*fam, family) : nullptr;
    auto pick = [](const FamilyOutcome* f, double AveragedScores::*field) -> std::optional<double> {
      if (!f) return std::nullopt;
      return f->test_scores.weighted.*field;
    };
    table.push_back({std::string(family_display_name(family)),
                     two_dp(pick(d, &AveragedScores::precision)), two_dp(pick(m, &AveragedScores::precision)),
                     two_dp(pick(d, &AveragedScores::recall)), two_dp(pick(m, &AveragedScores::recall)),
                     two_dp(pick(d, &AveragedScores::f1)), two_dp(pick(m, &AveragedScores::f1))});
  }
  return aligned(table);
}

std::string f1_csv(const ExperimentRecord& record) {
  std::string out = "model,detection_f1,family_f1\n";
  const TaskOutcome* det = find_task(record, Task::Detection);
  const TaskOutcome* fam = find_task(record, Task::Family);
  for (Family family : families_in(record)) {
    const FamilyOutcome* d = det ? find_family(*det, family) : nullptr;
    const FamilyOutcome* m = fam ? find_family(*fam, family) : nullptr;
    auto cell = [](const FamilyOutcome* f) {
      if (!f) return std::string();
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", f->test_scores.weighted.f1);
      return std::string(buf);
    };
    out += std::string(family_tag(family)) + "," + cell(d) + "," + cell(m) + "\n";
  }
  return out;
}

void emit(const ExperimentRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "models");
  write_text_file(dir / "record.json", record_json(record).dump(2) + "\n");
  for (Family family : families_in(record)) {
    write_text_file(dir / ("table_4_3_" + std::string(family_tag(family)) + ".txt"),
                    marginal_table(record, family));
  }
  write_text_file(dir / "table_4_4.txt", score_table(record));
  write_text_file(dir / "fig_4_1.csv", f1_csv(record));
  write_text_file(dir / "vocabulary.txt", vocabulary_to_text(record.vocabulary()));
  write_text_file(dir / "train.csv", matrix_to_csv(record.train));
  write_text_file(dir / "test.csv", matrix_to_csv(record.test));
  for (const auto& t : record.tasks) {
    for (const auto& f : t.families) {
      const std::string name = std::string(task_tag(t.task)) + "_" + std::string(family_tag(f.grid.family));
      write_text_file(dir / "models" / (name + ".json"), model_to_json(f.winner).dump(2) + "\n");
    }
  }
}

std::vector<ParamGrid> load_grids(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (ec) throw Error(ErrorCode::Io, dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<ParamGrid> grids;
  for (const auto& f : files) {
    nlohmann::ordered_json doc;
    try {
      doc = nlohmann::ordered_json::parse(read_text_file(f));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadConfig, f.filename().string() + ": " + e.what());
    }
    try {
      grids.push_back(grid_from_json(doc));
    } catch (const Error& e) {
      throw Error(e.code(), f.filename().string() + ": " + e.detail());
    }
  }
  return grids;
}

}  // namespace sysdetect
