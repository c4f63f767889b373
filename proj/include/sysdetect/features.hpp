#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "sysdetect/corpus.hpp"

namespace sysdetect {

/// Sorted (bytewise), duplicate-free syscall names. Feature i is the
/// call fraction of names[i]; feature size()+i is its error fraction.
struct Vocabulary {
  std::vector<std::string> names;

  std::size_t size() const { return names.size(); }
  std::size_t dimension() const { return 2 * names.size(); }
  bool operator==(const Vocabulary&) const = default;
};

struct FeatureMatrix {
  Vocabulary vocabulary;
  Eigen::MatrixXd rows;  // one sample per row, vocabulary.dimension() columns
  std::vector<std::string> ids;
  std::vector<Category> labels;

  std::size_t sample_count() const { return ids.size(); }
};

Vocabulary build_vocabulary(const Corpus& corpus);

/// Per-sample normalization: calls / total_calls and errors / total_errors.
/// Names outside the vocabulary are dropped but still count in the totals.
Eigen::VectorXd vectorize(const TraceSummary& summary, const Vocabulary& vocabulary);

FeatureMatrix build_matrix(const Corpus& corpus, const Vocabulary& vocabulary);

/// Column names in layout order: call:<name>..., err:<name>...
std::vector<std::string> feature_names(const Vocabulary& vocabulary);

std::string vocabulary_to_text(const Vocabulary& vocabulary);
/// One name per line; must be sorted and unique.
Vocabulary vocabulary_from_text(std::string_view text);

/// CSV: id,category,call:<s>...,err:<s>... Values use shortest round-trip
/// decimal encoding.
std::string matrix_to_csv(const FeatureMatrix& matrix);
/// Throws BadMatrix on malformed documents.
FeatureMatrix matrix_from_csv(std::string_view text);

/// Rows of `matrix` selected by index, in the given order.
FeatureMatrix select_rows(const FeatureMatrix& matrix, const std::vector<std::size_t>& index);

}  // namespace sysdetect
