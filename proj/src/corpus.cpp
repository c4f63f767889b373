#include "sysdetect/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "sysdetect/error.hpp"
#include "sysdetect/rng.hpp"

namespace sysdetect {

std::string_view category_token(Category c) {
  switch (c) {
    case Category::Benign: return "benign";
    case Category::Adware: return "adware";
    case Category::Ransomware: return "ransomware";
    case Category::Scareware: return "scareware";
    case Category::SmsMalware: return "smsmalware";
  }
  return "benign";
}

std::optional<Category> parse_category(std::string_view token) {
  std::string lower(token);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  for (Category c : kAllCategories) {
    if (lower == category_token(c)) return c;
  }
  return std::nullopt;
}

std::string_view binary_label(Category c) { return is_malware(c) ? "malware" : "benign"; }

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

CorpusManifest load_manifest(std::string_view document) {
  CorpusManifest manifest;
  std::unordered_set<std::string> paths;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < document.size()) {
    std::size_t end = document.find('\n', start);
    if (end == std::string_view::npos) end = document.size();
    const std::string_view line = trim(document.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "path,category") {
        throw Error(ErrorCode::BadHeader, "expected 'path,category', got '" + std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::BadHeader, "line " + std::to_string(line_no) + ": missing comma");
    }
    const std::string path(trim(line.substr(0, comma)));
    const std::string_view token = trim(line.substr(comma + 1));
    const auto category = parse_category(token);
    if (!category) throw Error(ErrorCode::UnknownCategory, std::string(token));
    if (!paths.insert(path).second) throw Error(ErrorCode::DuplicatePath, path);
    manifest.entries.push_back({path, *category});
  }
  if (!header_seen) throw Error(ErrorCode::BadHeader, "missing header line");
  if (manifest.entries.empty()) throw Error(ErrorCode::EmptyManifest, "no entries");
  return manifest;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

namespace {

// nullopt text means the file could not be read; detail carries the reason.
LoadedCorpus load_impl(const CorpusManifest& manifest,
                       const std::vector<std::optional<std::string>>& texts,
                       const std::vector<std::string>& read_errors, LoadMode mode) {
  LoadedCorpus out;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& entry = manifest.entries[i];
    if (!texts[i]) {
      out.failures.push_back({entry.path, "Io", read_errors[i]});
      continue;
    }
    try {
      TraceSummary summary = parse_summary(*texts[i]);
      const auto violations = validate_summary(summary);
      if (!violations.empty() && mode == LoadMode::Strict) {
        const auto& v = violations.front();
        out.failures.push_back({entry.path, "Validation",
                                v.invariant + " expected " + v.expected + " observed " + v.observed});
        continue;
      }
      out.corpus.samples.push_back({entry.path, entry.category, std::move(summary)});
    } catch (const Error& e) {
      out.failures.push_back({entry.path, std::string(to_string(e.code())), e.detail()});
    }
  }
  if (out.corpus.samples.empty()) {
    throw Error(ErrorCode::AllFilesFailed,
                std::to_string(out.failures.size()) + " of " +
                    std::to_string(manifest.entries.size()) + " files failed" +
                    (out.failures.empty() ? std::string()
                                          : "; first: " + out.failures.front().path + " " +
                                                out.failures.front().code + " " + out.failures.front().detail));
  }
  return out;
}

}  // namespace

LoadedCorpus load_corpus(const CorpusManifest& manifest, const std::filesystem::path& base_dir,
                         LoadMode mode) {
  std::vector<std::optional<std::string>> texts(manifest.entries.size());
  std::vector<std::string> errors(manifest.entries.size());
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    std::filesystem::path p(manifest.entries[i].path);
    if (p.is_relative()) p = base_dir / p;
    try {
      texts[i] = read_text_file(p);
    } catch (const Error& e) {
      errors[i] = e.detail();
    }
  }
  return load_impl(manifest, texts, errors, mode);
}

LoadedCorpus load_corpus_texts(const CorpusManifest& manifest,
                               const std::vector<std::string>& texts, LoadMode mode) {
  if (texts.size() != manifest.entries.size()) {
    throw Error(ErrorCode::LengthMismatch, "one text per manifest entry required");
  }
  std::vector<std::optional<std::string>> opt(texts.begin(), texts.end());
  return load_impl(manifest, opt, std::vector<std::string>(texts.size()), mode);
}

std::string format_failures(const std::vector<LoadFailure>& failures) {
  std::string out;
  for (const auto& f : failures) {
    std::string detail = f.detail;
    std::replace(detail.begin(), detail.end(), '\t', ' ');
    std::replace(detail.begin(), detail.end(), '\n', ' ');
    out += f.path + "\t" + f.code + "\t" + detail + "\n";
  }
  return out;
}

std::array<std::size_t, 5> category_counts(const Corpus& corpus) {
  std::array<std::size_t, 5> counts{};
  for (const auto& s : corpus.samples) ++counts[static_cast<std::size_t>(s.category)];
  return counts;
}

std::pair<Corpus, Corpus> stratified_split(const Corpus& corpus, double test_fraction,
                                           std::uint64_t seed, SplitStrategy strategy) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::DegenerateFraction, "test fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  std::vector<bool> in_test(corpus.samples.size(), false);
  auto allocate = [&](std::vector<std::size_t> members) {
    const std::size_t n = members.size();
    auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction + 0.5));
    if (n >= 2 && n_test == 0) n_test = 1;
    n_test = std::min(n_test, n);
    rng.shuffle(members);
    for (std::size_t i = 0; i < n_test; ++i) in_test[members[i]] = true;
  };
  if (strategy == SplitStrategy::Stratified) {
    for (Category c : kAllCategories) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
        if (corpus.samples[i].category == c) members.push_back(i);
      }
      if (!members.empty()) allocate(std::move(members));
    }
  } else {
    std::vector<std::size_t> all(corpus.samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    allocate(std::move(all));
  }
  Corpus train, test;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    (in_test[i] ? test : train).samples.push_back(corpus.samples[i]);
  }
  if (train.samples.empty() || test.samples.empty()) {
    throw Error(ErrorCode::DegenerateFraction,
                "split leaves " + std::string(train.samples.empty() ? "train" : "test") + " empty");
  }
  return {std::move(train), std::move(test)};
}

}  // namespace sysdetect

namespace sysdetect {

void save_corpus_dir(const Corpus& corpus, const std::vector<LoadFailure>& failures,
                     const std::filesystem::path& dir) {
  std::string index = "id,category,file\n";
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const auto& s = corpus.samples[i];
    char name[32];
    std::snprintf(name, sizeof name, "logs/%06zu.log", i + 1);
    write_text_file(dir / name, render_summary(s.summary));
    index += s.id + "," + std::string(category_token(s.category)) + "," + name + "\n";
  }
  write_text_file(dir / "index.csv", index);
  write_text_file(dir / "failures.tsv", format_failures(failures));
}

Corpus load_corpus_dir(const std::filesystem::path& dir) {
  const std::string text = read_text_file(dir / "index.csv");
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "id,category,file") {
    throw Error(ErrorCode::BadHeader, "index.csv header must be 'id,category,file'");
  }
  Corpus corpus;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto c2 = row.rfind(',');
    const auto c1 = c2 == std::string_view::npos || c2 == 0 ? std::string_view::npos : row.rfind(',', c2 - 1);
    if (c1 == std::string_view::npos) {
      throw Error(ErrorCode::BadHeader, "index.csv line " + std::to_string(line_no) + ": expected 3 fields");
    }
    const auto token = row.substr(c1 + 1, c2 - c1 - 1);
    const auto category = parse_category(token);
    if (!category) throw Error(ErrorCode::UnknownCategory, "'" + std::string(token) + "'");
    const std::string file(row.substr(c2 + 1));
    try {
      corpus.samples.push_back({std::string(row.substr(0, c1)), *category,
                                parse_summary(read_text_file(dir / file))});
    } catch (const Error& e) {
      throw Error(e.code(), file + ": " + e.detail());
    }
  }
  return corpus;
}

}  // namespace sysdetect
