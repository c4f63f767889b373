#include "sysdetect/model_selection.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "sysdetect/error.hpp"
#include "sysdetect/rng.hpp"

namespace sysdetect {

Folds k_fold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw Error(ErrorCode::KOutOfRange,
                "k=" + std::to_string(k) + " must satisfy 2 <= k <= n=" + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  Folds folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

double accuracy(std::span<const std::string> truth, std::span<const std::string> predicted) {
  if (truth.size() != predicted.size()) throw Error(ErrorCode::LengthMismatch, "accuracy inputs");
  if (truth.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == predicted[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

}  // namespace

CvResult cross_validate(const ModelConfig& config, const Eigen::MatrixXd& X,
                        std::span<const std::string> y, const Folds& folds, std::uint64_t seed) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "rows and labels differ in length");
  }
  CvResult result{config, {}, 0.0, false, {}};
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train_idx;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::vector<std::string> y_train, y_test;
    for (auto i : train_idx) y_train.push_back(y[i]);
    for (auto i : folds[f]) y_test.push_back(y[i]);
    if (std::set<std::string>(y_train.begin(), y_train.end()).size() < 2) {
      throw Error(ErrorCode::FoldMissingClass,
                  "training portion of fold " + std::to_string(f) + " has a single class");
    }
    const TrainedModel model = train(config, take_rows(X, train_idx), y_train, seed);
    result.fold_accuracies.push_back(accuracy(y_test, predict(model, take_rows(X, folds[f]))));
  }
  result.mean_accuracy = std::accumulate(result.fold_accuracies.begin(), result.fold_accuracies.end(), 0.0) /
                         static_cast<double>(result.fold_accuracies.size());
  return result;
}

CvResult cross_validate(const ModelConfig& config, const Eigen::MatrixXd& X,
                        std::span<const std::string> y, std::size_t k, std::uint64_t seed) {
  return cross_validate(config, X, y, k_fold_split(y.size(), k, seed), seed);
}

std::size_t ParamGrid::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

std::vector<nlohmann::json> ParamGrid::assignment(std::size_t index) const {
  std::vector<nlohmann::json> out(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    const std::size_t m = axes[a].values.size();
    out[a] = axes[a].values[index % m];
    index /= m;
  }
  return out;
}

ModelConfig ParamGrid::config(std::size_t index) const {
  ModelConfig c = default_config(family);
  const auto values = assignment(index);
  for (std::size_t a = 0; a < axes.size(); ++a) apply_parameter(c, axes[a].name, values[a]);
  validate_config(c);
  return c;
}

ParamGrid grid_from_json(const nlohmann::ordered_json& doc) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::BadConfig, "grid: " + what); };
  if (!doc.is_object() || !doc.contains("family") || !doc["family"].is_string()) {
    bad("expected an object with a 'family' string");
  }
  const auto family = parse_family(doc["family"].get<std::string>());
  if (!family) bad("unknown family '" + doc["family"].get<std::string>() + "'");
  ParamGrid grid;
  grid.family = *family;
  const auto& axes = doc.contains("axes") ? doc["axes"] : nlohmann::ordered_json::object();
  auto add_axis = [&](const std::string& name, const nlohmann::ordered_json& values) {
    if (!values.is_array() || values.empty()) bad("axis '" + name + "' needs a non-empty value list");
    ParamAxis axis{name, {}};
    for (const auto& v : values) axis.values.push_back(nlohmann::json::parse(v.dump()));
    grid.axes.push_back(std::move(axis));
  };
  if (axes.is_object()) {
    for (const auto& [name, values] : axes.items()) add_axis(name, values);
  } else if (axes.is_array()) {
    for (const auto& a : axes) {
      if (!a.is_object() || !a.contains("name") || !a.contains("values")) bad("axis needs name and values");
      add_axis(a["name"].get<std::string>(), a["values"]);
    }
  } else {
    bad("'axes' must be an object or an array");
  }
  std::set<std::string> names;
  const auto valid = parameter_names(grid.family);
  for (const auto& a : grid.axes) {
    if (std::find(valid.begin(), valid.end(), a.name) == valid.end()) {
      bad("'" + a.name + "' is not a " + std::string(family_tag(grid.family)) + " parameter");
    }
    if (!names.insert(a.name).second) bad("duplicate axis '" + a.name + "'");
  }
  // Reject bad values up front rather than failing every configuration.
  for (const auto& a : grid.axes) {
    for (const auto& v : a.values) {
      ModelConfig c = default_config(grid.family);
      apply_parameter(c, a.name, v);
      validate_config(c);
    }
  }
  return grid;
}

nlohmann::ordered_json grid_to_json(const ParamGrid& grid) {
  nlohmann::ordered_json axes = nlohmann::ordered_json::object();
  for (const auto& a : grid.axes) {
    nlohmann::ordered_json values = nlohmann::ordered_json::array();
    for (const auto& v : a.values) values.push_back(nlohmann::ordered_json::parse(v.dump()));
    axes[a.name] = std::move(values);
  }
  return {{"family", family_tag(grid.family)}, {"axes", std::move(axes)}};
}

GridReport grid_search(const ParamGrid& grid, const Eigen::MatrixXd& X,
                       std::span<const std::string> y, std::size_t k, std::uint64_t seed) {
  if (grid.size() == 0) throw Error(ErrorCode::BadConfig, "grid is empty");
  const Folds folds = k_fold_split(y.size(), k, seed);
  GridReport report;
  report.family = grid.family;
  report.folds = k;
  report.seed = seed;
  bool any_ok = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    report.assignments.push_back(grid.assignment(i));
    const ModelConfig config = grid.config(i);
    try {
      report.results.push_back(cross_validate(config, X, y, folds, seed));
    } catch (const Error& e) {
      report.results.push_back({config, {}, 0.0, true, e.what()});
      continue;
    }
    const auto& r = report.results.back();
    if (!any_ok || r.mean_accuracy > report.results[report.best].mean_accuracy) report.best = i;
    any_ok = true;
  }
  if (!any_ok) {
    throw Error(ErrorCode::AllConfigsFailed, "all " + std::to_string(grid.size()) +
                                                 " configurations failed; first: " +
                                                 report.results.front().error);
  }
  return report;
}

MarginalReport marginal_report(const GridReport& report, const ParamGrid& grid) {
  if (report.family != grid.family || report.results.size() != grid.size() ||
      report.assignments.size() != grid.size()) {
    throw Error(ErrorCode::GridMismatch, "report was not produced from this grid");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (report.assignments[i] != grid.assignment(i)) {
      throw Error(ErrorCode::GridMismatch, "assignment " + std::to_string(i) + " differs");
    }
  }
  MarginalReport out;
  out.family = grid.family;
  for (std::size_t a = 0; a < grid.axes.size(); ++a) {
    for (const auto& value : grid.axes[a].values) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < report.results.size(); ++i) {
        if (report.results[i].failed || report.assignments[i][a] != value) continue;
        sum += report.results[i].mean_accuracy;
        ++count;
      }
      MarginalEntry e{grid.axes[a].name, value, std::nullopt, count};
      if (count > 0) e.average = sum / static_cast<double>(count);
      out.entries.push_back(std::move(e));
    }
  }
  return out;
}

nlohmann::ordered_json grid_report_json(const GridReport& report) {
  using ojson = nlohmann::ordered_json;
  ojson results = ojson::array();
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    const auto& r = report.results[i];
    const auto cfg = config_to_json(r.config);
    ojson entry;
    entry["index"] = i;
    entry["config"] = cfg;
    entry["status"] = r.failed ? "failed" : "ok";
    if (r.failed) {
      entry["error"] = r.error;
    } else {
      entry["fold_accuracies"] = r.fold_accuracies;
      entry["mean_accuracy"] = r.mean_accuracy;
    }
    results.push_back(std::move(entry));
  }
  return {{"family", family_tag(report.family)},
          {"folds", report.folds},
          {"seed", report.seed},
          {"best", report.best},
          {"best_config", config_to_json(report.results[report.best].config)},
          {"results", std::move(results)}};
}

nlohmann::ordered_json marginal_report_json(const MarginalReport& report) {
  using ojson = nlohmann::ordered_json;
  ojson entries = ojson::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"parameter", e.parameter},
                       {"value", ojson::parse(e.value.dump())},
                       {"average_accuracy", e.average ? ojson(*e.average) : ojson(nullptr)},
                       {"configs", e.count}});
  }
  return {{"family", family_tag(report.family)}, {"entries", std::move(entries)}};
}

namespace {

std::string percent(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace

std::string marginal_table_text(Family family, const std::vector<std::string>& titles,
                                const std::vector<const MarginalReport*>& reports) {
  // Rows keyed by (parameter, value) in first-seen order across reports.
  std::vector<std::pair<std::string, nlohmann::json>> keys;
  for (const auto* r : reports) {
    if (!r) continue;
    for (const auto& e : r->entries) {
      const std::pair<std::string, nlohmann::json> key{e.parameter, e.value};
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
  }
  std::vector<std::vector<std::string>> table;
  table.push_back({"Model", "Parameter", "Value"});
  for (const auto& t : titles) table.back().push_back(t);
  std::string last_param;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    std::vector<std::string> row = {i == 0 ? std::string(family_display_name(family)) : "",
                                    keys[i].first == last_param ? "" : keys[i].first,
                                    describe_parameter_value(keys[i].second)};
    last_param = keys[i].first;
    for (const auto* r : reports) {
      std::optional<double> v;
      if (!r) {
        row.push_back(percent(v));
        continue;
      }
      for (const auto& e : r->entries) {
        if (e.parameter == keys[i].first && e.value == keys[i].second) v = e.average;
      }
      row.push_back(percent(v));
    }
    table.push_back(std::move(row));
  }
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += pad(row[c], width[c]);
      if (c + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace sysdetect
