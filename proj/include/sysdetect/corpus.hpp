#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sysdetect/strace.hpp"

namespace sysdetect {

enum class Category { Benign, Adware, Ransomware, Scareware, SmsMalware };

inline constexpr std::array<Category, 5> kAllCategories = {
    Category::Benign, Category::Adware, Category::Ransomware, Category::Scareware,
    Category::SmsMalware};

/// Lowercase token used in manifests and label files.
std::string_view category_token(Category c);
/// Case-insensitive inverse of category_token; nullopt for unknown tokens.
std::optional<Category> parse_category(std::string_view token);

inline bool is_malware(Category c) { return c != Category::Benign; }

/// Binary projection used for detection: "benign" or "malware".
std::string_view binary_label(Category c);

struct ManifestEntry {
  std::string path;
  Category category;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
};

struct Sample {
  std::string id;
  Category category;
  TraceSummary summary;
};

struct Corpus {
  std::vector<Sample> samples;
};

struct LoadFailure {
  std::string path;
  std::string code;
  std::string detail;
};

enum class LoadMode { Strict, Lenient };

/// Parses `path,category` CSV. Throws BadHeader, UnknownCategory,
/// DuplicatePath or EmptyManifest.
CorpusManifest load_manifest(std::string_view document);

struct LoadedCorpus {
  Corpus corpus;
  std::vector<LoadFailure> failures;
};

/// Loads every manifest entry. Relative paths resolve against base_dir.
/// Strict mode drops files with parse errors or validation violations;
/// lenient mode keeps files that parse but fail validation.
/// Throws AllFilesFailed when nothing survives.
LoadedCorpus load_corpus(const CorpusManifest& manifest, const std::filesystem::path& base_dir,
                         LoadMode mode = LoadMode::Strict);

/// In-memory variant: texts[i] holds the log for manifest.entries[i].
LoadedCorpus load_corpus_texts(const CorpusManifest& manifest,
                               const std::vector<std::string>& texts,
                               LoadMode mode = LoadMode::Strict);

std::string format_failures(const std::vector<LoadFailure>& failures);

enum class SplitStrategy { Stratified, Uniform };

/// Seeded train/test split. Stratified: per category, round-half-up of
/// n_cat * test_fraction go to test (at least one when n_cat >= 2).
/// Both halves keep corpus order. Throws DegenerateFraction.
std::pair<Corpus, Corpus> stratified_split(const Corpus& corpus, double test_fraction,
                                           std::uint64_t seed,
                                           SplitStrategy strategy = SplitStrategy::Stratified);

/// Sample counts in kAllCategories order.
std::array<std::size_t, 5> category_counts(const Corpus& corpus);

/// Corpus directory: index.csv (id,category,file) plus logs/NNNNNN.log
/// rendered summaries and failures.tsv.
void save_corpus_dir(const Corpus& corpus, const std::vector<LoadFailure>& failures,
                     const std::filesystem::path& dir);
/// Throws BadHeader, UnknownCategory, Io or the log's parse error.
Corpus load_corpus_dir(const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace sysdetect
