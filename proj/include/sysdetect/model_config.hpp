#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace sysdetect {

/// Classifier families in report order.
enum class Family { LogReg, Knn, Svm, Tree, Mlp };

inline constexpr std::array<Family, 5> kAllFamilies = {Family::LogReg, Family::Knn, Family::Svm,
                                                       Family::Tree, Family::Mlp};

std::string_view family_tag(Family f);           // "logreg", "knn", ...
std::string_view family_display_name(Family f);  // "Logistic Regression", "KNN", ...
std::optional<Family> parse_family(std::string_view tag);

/// The solver label is recorded but every label runs the same full-batch
/// gradient descent.
struct LogRegConfig {
  double c = 1.0;
  std::string solver = "lbfgs";
  int max_iter = 1000;
  double tol = 1e-4;
};

enum class Metric { Manhattan, Euclidean, Minkowski };

struct KnnConfig {
  int k = 5;
  Metric metric = Metric::Euclidean;
  double p = 3.0;  // used by Minkowski only
};

enum class Criterion { Gini, Entropy };

struct TreeConfig {
  Criterion criterion = Criterion::Gini;
  std::optional<int> max_depth;  // nullopt: grow until pure
};

enum class KernelKind { Linear, Poly, Rbf };

struct Gamma {
  enum class Kind { Auto, Scale, Fixed };
  Kind kind = Kind::Scale;
  double value = 0.0;  // Fixed only
};

struct SvmConfig {
  double c = 1.0;
  KernelKind kernel = KernelKind::Rbf;
  int degree = 3;
  Gamma gamma;
  double tol = 1e-3;
  int max_passes = 1000;  // cap on solver work, in units of n pair updates
};

struct MlpConfig {
  double alpha = 1e-4;
  std::vector<int> hidden_layers = {100};
  int max_iter = 200;
  double learning_rate = 0.1;
};

using ModelConfig = std::variant<LogRegConfig, KnnConfig, SvmConfig, TreeConfig, MlpConfig>;

Family family_of(const ModelConfig& config);
ModelConfig default_config(Family family);

/// Throws BadConfig when a field is outside its documented range.
void validate_config(const ModelConfig& config);

/// Sets one named parameter, e.g. "C", "n_neighbors", "metric", "kernel",
/// "gamma", "hidden_layers". Throws BadConfig for unknown names or values.
void apply_parameter(ModelConfig& config, std::string_view name, const nlohmann::json& value);

/// Parameter names accepted by apply_parameter for a family.
std::vector<std::string> parameter_names(Family family);

/// {"family": tag, <parameter>: value, ...}
nlohmann::ordered_json config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& doc);

/// Human-readable value as used in report tables, e.g. "(100, 100)".
std::string describe_parameter_value(const nlohmann::json& value);

}  // namespace sysdetect
