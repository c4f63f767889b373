// Command-line front end: each subcommand is one pipeline stage over files.

#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "sysdetect/analysis.hpp"
#include "sysdetect/classifiers.hpp"
#include "sysdetect/corpus.hpp"
#include "sysdetect/error.hpp"
#include "sysdetect/extraction.hpp"
#include "sysdetect/features.hpp"
#include "sysdetect/metrics.hpp"
#include "sysdetect/model_selection.hpp"
#include "sysdetect/reporting.hpp"
#include "sysdetect/strace.hpp"

namespace fs = std::filesystem;
using namespace sysdetect;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitData = 3;

Task parse_task(const std::string& s) {
  if (s == "detection") return Task::Detection;
  if (s == "family") return Task::Family;
  throw Error(ErrorCode::BadConfig, "task must be 'detection' or 'family'");
}

nlohmann::ordered_json read_json(const fs::path& path) {
  try {
    return nlohmann::ordered_json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadConfig, path.string() + ": " + e.what());
  }
}

struct LabelledRows {
  Eigen::MatrixXd X;
  std::vector<std::string> ids;
  std::vector<std::string> y;
};

LabelledRows labelled(const FeatureMatrix& m, Task task, bool include_benign) {
  const LabelVector labels = make_labels(m, task, include_benign);
  LabelledRows out;
  out.X.resize(static_cast<Eigen::Index>(labels.row_index.size()), m.rows.cols());
  for (std::size_t i = 0; i < labels.row_index.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = m.rows.row(static_cast<Eigen::Index>(labels.row_index[i]));
    out.ids.push_back(m.ids[labels.row_index[i]]);
  }
  out.y = labels.values;
  return out;
}

// id -> label from either a labels CSV (id,label) or a matrix CSV
// (id,category,...), the latter mapped through the task.
std::vector<std::pair<std::string, std::string>> read_labels(const fs::path& path, Task task) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::vector<std::pair<std::string, std::string>> out;
  if (header == "id,label") {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto comma = line.rfind(',');
      if (comma == std::string::npos) throw Error(ErrorCode::BadMatrix, path.string() + ": expected id,label");
      out.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    }
    return out;
  }
  if (header.rfind("id,category", 0) == 0) {
    const FeatureMatrix m = matrix_from_csv(text);
    for (std::size_t i = 0; i < m.ids.size(); ++i) {
      const Category c = m.labels[i];
      if (task == Task::Detection) out.emplace_back(m.ids[i], std::string(binary_label(c)));
      else out.emplace_back(m.ids[i], std::string(category_token(c)));
    }
    return out;
  }
  throw Error(ErrorCode::BadMatrix, path.string() + ": header must be 'id,label' or a matrix header");
}

StepTimeouts timeouts_from_env() {
  const char* v = std::getenv("SYSDETECT_STEP_TIMEOUT_MS");
  if (!v || !*v) return StepTimeouts::defaults();
  char* end = nullptr;
  const long long ms = std::strtoll(v, &end, 10);
  if (*end != '\0' || ms <= 0) {
    throw Error(ErrorCode::BadConfig, "SYSDETECT_STEP_TIMEOUT_MS must be a positive integer");
  }
  return StepTimeouts::uniform(std::chrono::milliseconds(ms));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"System-call based Android malware detection pipeline"};
  app.require_subcommand(1);
  std::function<int()> action;

  // parse
  auto* parse = app.add_subcommand("parse", "Parse an strace count summary");
  std::string parse_log;
  bool parse_validate = false;
  parse->add_option("log", parse_log, "strace -c output")->required();
  parse->add_flag("--validate", parse_validate, "Check row sums against the total row");
  parse->callback([&] {
    action = [&] {
      const TraceSummary s = parse_summary(read_text_file(parse_log));
      std::cout << "rows=" << s.rows.size() << " calls=" << s.total_calls << " errors=" << s.total_errors
                << "\n";
      if (!parse_validate) return kExitOk;
      const auto violations = validate_summary(s);
      for (const auto& v : violations) {
        std::cout << "violation " << v.invariant << " expected=" << v.expected << " observed=" << v.observed
                  << "\n";
      }
      return violations.empty() ? kExitOk : kExitParse;
    };
  });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a manifest of logs into a corpus directory");
  std::string ingest_manifest, ingest_out;
  bool ingest_lenient = false;
  ingest->add_option("manifest", ingest_manifest, "path,category CSV")->required();
  ingest->add_option("--out", ingest_out, "Corpus directory")->required();
  ingest->add_flag("--lenient", ingest_lenient, "Keep logs that parse but fail validation");
  ingest->callback([&] {
    action = [&] {
      const CorpusManifest manifest = load_manifest(read_text_file(ingest_manifest));
      const LoadedCorpus loaded = load_corpus(manifest, fs::path(ingest_manifest).parent_path(),
                                              ingest_lenient ? LoadMode::Lenient : LoadMode::Strict);
      save_corpus_dir(loaded.corpus, loaded.failures, ingest_out);
      std::cout << "loaded=" << loaded.corpus.samples.size() << " failed=" << loaded.failures.size() << "\n";
      std::cerr << format_failures(loaded.failures);
      return kExitOk;
    };
  });

  // featurize
  auto* featurize = app.add_subcommand("featurize", "Build the vocabulary and feature matrix");
  std::string feat_corpus, feat_out, feat_vocab;
  featurize->add_option("corpus", feat_corpus, "Corpus directory")->required();
  featurize->add_option("--out", feat_out, "Output directory")->required();
  featurize->add_option("--vocab", feat_vocab, "Reuse an existing vocabulary file");
  featurize->callback([&] {
    action = [&] {
      const Corpus corpus = load_corpus_dir(feat_corpus);
      const Vocabulary vocab =
          feat_vocab.empty() ? build_vocabulary(corpus) : vocabulary_from_text(read_text_file(feat_vocab));
      write_text_file(fs::path(feat_out) / "vocabulary.txt", vocabulary_to_text(vocab));
      write_text_file(fs::path(feat_out) / "matrix.csv", matrix_to_csv(build_matrix(corpus, vocab)));
      std::cout << "samples=" << corpus.samples.size() << " vocabulary=" << vocab.size()
                << " dimension=" << vocab.dimension() << "\n";
      return kExitOk;
    };
  });

  // shared task flags
  std::string task_name = "detection";
  bool include_benign = false;
  std::uint64_t seed = 0;
  auto task_flags = [&](CLI::App* sub) {
    sub->add_option("--task", task_name, "detection or family")->check(CLI::IsMember({"detection", "family"}));
    sub->add_flag("--include-benign", include_benign, "Family task: keep benign as a class");
  };

  // train
  auto* train_cmd = app.add_subcommand("train", "Fit one model configuration");
  std::string train_config, train_matrix, train_out;
  train_cmd->add_option("--config", train_config, "Model configuration JSON")->required();
  train_cmd->add_option("--matrix", train_matrix, "Feature matrix CSV")->required();
  train_cmd->add_option("--out", train_out, "Model file")->required();
  train_cmd->add_option("--seed", seed, "Random seed");
  task_flags(train_cmd);
  train_cmd->callback([&] {
    action = [&] {
      const ModelConfig config = config_from_json(read_json(train_config));
      const auto rows = labelled(matrix_from_csv(read_text_file(train_matrix)), parse_task(task_name),
                                 include_benign);
      const TrainedModel model = train(config, rows.X, rows.y, seed);
      write_text_file(train_out, model_to_json(model).dump(2) + "\n");
      return kExitOk;
    };
  });

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Label every row of a feature matrix");
  std::string pred_model, pred_matrix, pred_out;
  predict_cmd->add_option("--model", pred_model, "Model file")->required();
  predict_cmd->add_option("--matrix", pred_matrix, "Feature matrix CSV")->required();
  predict_cmd->add_option("--out", pred_out, "Write labels here instead of stdout");
  predict_cmd->callback([&] {
    action = [&] {
      TrainedModel model;
      try {
        model = model_from_json(nlohmann::json::parse(read_text_file(pred_model)));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadModel, e.what());
      }
      const FeatureMatrix m = matrix_from_csv(read_text_file(pred_matrix));
      const auto labels = predict(model, m.rows);
      std::string csv = "id,label\n";
      for (std::size_t i = 0; i < labels.size(); ++i) csv += m.ids[i] + "," + labels[i] + "\n";
      if (pred_out.empty()) std::cout << csv;
      else write_text_file(pred_out, csv);
      return kExitOk;
    };
  });

  // gridsearch
  auto* grid_cmd = app.add_subcommand("gridsearch", "Cross-validated grid search for one family");
  std::string grid_file, grid_matrix, grid_out;
  std::size_t grid_k = 5;
  grid_cmd->add_option("--grid", grid_file, "Grid JSON")->required();
  grid_cmd->add_option("--matrix", grid_matrix, "Feature matrix CSV")->required();
  grid_cmd->add_option("--k", grid_k, "Number of folds");
  grid_cmd->add_option("--seed", seed, "Random seed");
  grid_cmd->add_option("--out", grid_out, "Output directory")->required();
  task_flags(grid_cmd);
  grid_cmd->callback([&] {
    action = [&] {
      const ParamGrid grid = grid_from_json(read_json(grid_file));
      const auto rows = labelled(matrix_from_csv(read_text_file(grid_matrix)), parse_task(task_name),
                                 include_benign);
      const GridReport report = grid_search(grid, rows.X, rows.y, grid_k, seed);
      const MarginalReport marginals = marginal_report(report, grid);
      const fs::path out(grid_out);
      write_text_file(out / "grid_report.json", grid_report_json(report).dump(2) + "\n");
      write_text_file(out / "marginals.json", marginal_report_json(marginals).dump(2) + "\n");
      write_text_file(out / "marginals.txt",
                      marginal_table_text(grid.family, {"Accuracy"}, {&marginals}));
      std::cout << "configs=" << report.results.size() << " best=" << report.best
                << " accuracy=" << report.results[report.best].mean_accuracy << "\n";
      return kExitOk;
    };
  });

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  std::string eval_truth, eval_pred, eval_positive, eval_json;
  eval_cmd->add_option("--truth", eval_truth, "Labels CSV or feature matrix CSV")->required();
  eval_cmd->add_option("--pred", eval_pred, "Labels CSV")->required();
  eval_cmd->add_option("--positive", eval_positive, "Positive class for binary scores");
  eval_cmd->add_option("--json", eval_json, "Also write the report as JSON");
  eval_cmd->add_option("--task", task_name, "How to read a matrix truth file")
      ->check(CLI::IsMember({"detection", "family"}));
  eval_cmd->callback([&] {
    action = [&] {
      const Task task = parse_task(task_name);
      const auto truth = read_labels(eval_truth, task);
      const auto pred = read_labels(eval_pred, task);
      std::map<std::string, std::string> by_id(pred.begin(), pred.end());
      std::vector<std::string> t, p;
      std::set<std::string> classes;
      for (const auto& [id, label] : truth) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) continue;
        t.push_back(label);
        p.push_back(it->second);
        classes.insert(label);
        classes.insert(it->second);
      }
      if (t.size() != pred.size()) {
        throw Error(ErrorCode::LengthMismatch, "predictions and truth do not cover the same ids");
      }
      std::optional<std::string> positive;
      if (!eval_positive.empty()) positive = eval_positive;
      const auto cm = confusion_matrix(t, p, {classes.begin(), classes.end()}, positive);
      const ScoreReport report = classification_report(cm);
      std::cout << score_report_text(report);
      if (!eval_json.empty()) write_text_file(eval_json, score_report_json(report).dump(2) + "\n");
      return kExitOk;
    };
  });

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Per-group call and error statistics");
  std::string an_corpus, an_json, an_grouping = "binary";
  std::size_t an_top = 10;
  analyze->add_option("corpus", an_corpus, "Corpus directory")->required();
  analyze->add_option("--top", an_top, "Syscalls listed per group (0 = all)");
  analyze->add_option("--grouping", an_grouping, "binary or family")->check(CLI::IsMember({"binary", "family"}));
  analyze->add_option("--json", an_json, "Also write the analysis as JSON");
  analyze->callback([&] {
    action = [&] {
      const Corpus corpus = load_corpus_dir(an_corpus);
      const Grouping g = an_grouping == "family" ? Grouping::Family : Grouping::Binary;
      const auto stats = category_stats(corpus, g);
      const auto top = top_syscalls(corpus, an_top, g);
      std::cout << category_stats_text(stats) << "\n" << top_syscalls_text(top);
      if (!an_json.empty()) write_text_file(an_json, analysis_json(stats, top).dump(2) + "\n");
      return kExitOk;
    };
  });

  // experiment
  auto* exp = app.add_subcommand("experiment", "Split, grid-search, refit and score every family");
  std::string exp_manifest, exp_grids, exp_out;
  ExperimentOptions exp_options;
  bool exp_uniform = false, exp_lenient = false;
  exp->add_option("--manifest", exp_manifest, "path,category CSV")->required();
  exp->add_option("--grids", exp_grids, "Directory of grid JSON files")->required();
  exp->add_option("--seed", exp_options.seed, "Random seed")->required();
  exp->add_option("--out", exp_out, "Output directory")->required();
  exp->add_option("--k", exp_options.k, "Number of folds");
  exp->add_option("--test-fraction", exp_options.test_fraction, "Held-out share of samples");
  exp->add_flag("--uniform-split", exp_uniform, "Split without stratifying by category");
  exp->add_flag("--include-benign", exp_options.family_include_benign, "Family task: keep benign as a class");
  exp->add_flag("--lenient", exp_lenient, "Keep logs that parse but fail validation");
  exp->callback([&] {
    action = [&] {
      exp_options.split = exp_uniform ? SplitStrategy::Uniform : SplitStrategy::Stratified;
      const CorpusManifest manifest = load_manifest(read_text_file(exp_manifest));
      const LoadedCorpus loaded = load_corpus(manifest, fs::path(exp_manifest).parent_path(),
                                              exp_lenient ? LoadMode::Lenient : LoadMode::Strict);
      std::cerr << format_failures(loaded.failures);
      const auto grids = load_grids(exp_grids);
      const ExperimentRecord record = run_experiment(loaded.corpus, grids, exp_options);
      emit(record, exp_out);
      std::cout << score_table(record);
      return kExitOk;
    };
  });

  // simulate-extract
  auto* sim = app.add_subcommand("simulate-extract", "Run the extraction protocol on a scripted device");
  std::string sim_script, sim_events, sim_out, sim_apk = "app.apk";
  int sim_random = 500;
  sim->add_option("--script", sim_script, "Device script JSON")->required();
  sim->add_option("--events", sim_events, "Event list, one per line");
  sim->add_option("--out", sim_out, "Result directory")->required();
  sim->add_option("--apk", sim_apk, "APK reference passed to the device");
  sim->add_option("--random-events", sim_random, "Random interaction events per batch");
  sim->footer("Environment: SYSDETECT_STEP_TIMEOUT_MS sets every step's time budget.");
  sim->callback([&] {
    action = [&] {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(read_text_file(sim_script));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadScript, e.what());
      }
      ScriptedDevice device(script_from_json(doc));
      const EventSchedule schedule =
          sim_events.empty() ? default_event_schedule() : event_schedule_from_text(read_text_file(sim_events));
      const ExtractionResult result = run_protocol(device, sim_apk, schedule, sim_random, timeouts_from_env());
      write_extraction_result(result, sim_out);
      std::cout << extraction_status_json(result).dump() << "\n";
      return result.success() ? kExitOk : kExitData;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    return action ? action() : kExitUsage;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyInput) {
      std::cerr << "error: " << to_string(ErrorCode::MalformedHeader) << ": no header line (" << e.what() << ")\n";
      return kExitParse;
    }
    std::cerr << "error: " << e.what() << "\n";
    return is_parse_error(e.code()) ? kExitParse : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
