#include "sysdetect/features.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <unordered_map>

#include "sysdetect/error.hpp"

namespace sysdetect {

Vocabulary build_vocabulary(const Corpus& corpus) {
  if (corpus.samples.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot build vocabulary");
  std::set<std::string> names;
  for (const auto& s : corpus.samples) {
    for (const auto& r : s.summary.rows) names.insert(r.syscall);
  }
  return Vocabulary{{names.begin(), names.end()}};
}

Eigen::VectorXd vectorize(const TraceSummary& summary, const Vocabulary& vocabulary) {
  const auto v = static_cast<Eigen::Index>(vocabulary.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * v);
  const double calls = static_cast<double>(summary.total_calls);
  const double errors = static_cast<double>(summary.total_errors);
  for (const auto& row : summary.rows) {
    const auto it = std::lower_bound(vocabulary.names.begin(), vocabulary.names.end(), row.syscall);
    if (it == vocabulary.names.end() || *it != row.syscall) continue;
    const auto i = static_cast<Eigen::Index>(it - vocabulary.names.begin());
    if (calls > 0.0) out[i] = static_cast<double>(row.calls) / calls;
    if (errors > 0.0) out[v + i] = static_cast<double>(row.errors) / errors;
  }
  return out;
}

FeatureMatrix build_matrix(const Corpus& corpus, const Vocabulary& vocabulary) {
  if (corpus.samples.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot build matrix");
  FeatureMatrix m;
  m.vocabulary = vocabulary;
  m.rows.resize(static_cast<Eigen::Index>(corpus.samples.size()),
                static_cast<Eigen::Index>(vocabulary.dimension()));
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const auto& s = corpus.samples[i];
    m.rows.row(static_cast<Eigen::Index>(i)) = vectorize(s.summary, vocabulary).transpose();
    m.ids.push_back(s.id);
    m.labels.push_back(s.category);
  }
  return m;
}

std::vector<std::string> feature_names(const Vocabulary& vocabulary) {
  std::vector<std::string> out;
  out.reserve(vocabulary.dimension());
  for (const auto& n : vocabulary.names) out.push_back("call:" + n);
  for (const auto& n : vocabulary.names) out.push_back("err:" + n);
  return out;
}

std::string vocabulary_to_text(const Vocabulary& vocabulary) {
  std::string out;
  for (const auto& n : vocabulary.names) out += n + "\n";
  return out;
}

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = end + 1;
  }
  return out;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Vocabulary vocabulary_from_text(std::string_view text) {
  Vocabulary v;
  for (auto line : lines_of(text)) {
    if (line.empty()) continue;
    v.names.emplace_back(line);
  }
  for (std::size_t i = 1; i < v.names.size(); ++i) {
    if (!(v.names[i - 1] < v.names[i])) {
      throw Error(ErrorCode::BadMatrix, "vocabulary not sorted/unique at '" + v.names[i] + "'");
    }
  }
  return v;
}

std::string matrix_to_csv(const FeatureMatrix& m) {
  std::string out = "id,category";
  for (const auto& name : feature_names(m.vocabulary)) out += "," + name;
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows.rows(); ++i) {
    out += m.ids[static_cast<std::size_t>(i)];
    out += ",";
    out += category_token(m.labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m.rows.cols(); ++j) out += "," + shortest(m.rows(i, j));
    out += "\n";
  }
  return out;
}

FeatureMatrix matrix_from_csv(std::string_view text) {
  auto lines = lines_of(text);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::BadMatrix, "empty document");
  const auto header = split_csv(lines[0]);
  if (header.size() < 2 || header[0] != "id" || header[1] != "category" || header.size() % 2 != 0) {
    throw Error(ErrorCode::BadMatrix, "header must be id,category,call:...,err:...");
  }
  const std::size_t v = (header.size() - 2) / 2;
  FeatureMatrix m;
  for (std::size_t i = 0; i < v; ++i) {
    const auto call = header[2 + i];
    const auto err = header[2 + v + i];
    if (call.substr(0, 5) != "call:" || err.substr(0, 4) != "err:" || call.substr(5) != err.substr(4)) {
      throw Error(ErrorCode::BadMatrix, "bad feature column '" + std::string(call) + "'");
    }
    m.vocabulary.names.emplace_back(call.substr(5));
  }
  for (std::size_t i = 1; i < m.vocabulary.names.size(); ++i) {
    if (!(m.vocabulary.names[i - 1] < m.vocabulary.names[i])) {
      throw Error(ErrorCode::BadMatrix, "feature columns not in vocabulary order");
    }
  }
  m.rows.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(2 * v));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_csv(lines[r]);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::BadMatrix, "row " + std::to_string(r) + ": wrong column count");
    }
    const auto cat = parse_category(cells[1]);
    if (!cat) throw Error(ErrorCode::UnknownCategory, std::string(cells[1]));
    m.ids.emplace_back(cells[0]);
    m.labels.push_back(*cat);
    for (std::size_t j = 0; j < 2 * v; ++j) {
      const auto cell = cells[2 + j];
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::BadMatrix, "row " + std::to_string(r) + ": bad value '" +
                                              std::string(cell) + "'");
      }
      m.rows(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(j)) = value;
    }
  }
  return m;
}

FeatureMatrix select_rows(const FeatureMatrix& matrix, const std::vector<std::size_t>& index) {
  FeatureMatrix out;
  out.vocabulary = matrix.vocabulary;
  out.rows.resize(static_cast<Eigen::Index>(index.size()), matrix.rows.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    out.rows.row(static_cast<Eigen::Index>(i)) = matrix.rows.row(static_cast<Eigen::Index>(index[i]));
    out.ids.push_back(matrix.ids[index[i]]);
    out.labels.push_back(matrix.labels[index[i]]);
  }
  return out;
}

}  // namespace sysdetect
