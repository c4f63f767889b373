#include "sysdetect/model_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "sysdetect/error.hpp"

namespace sysdetect {

std::string_view family_tag(Family f) {
  switch (f) {
    case Family::LogReg: return "logreg";
    case Family::Knn: return "knn";
    case Family::Svm: return "svm";
    case Family::Tree: return "tree";
    case Family::Mlp: return "mlp";
  }
  return "logreg";
}

std::string_view family_display_name(Family f) {
  switch (f) {
    case Family::LogReg: return "Logistic Regression";
    case Family::Knn: return "KNN";
    case Family::Svm: return "Support Vector Classifier";
    case Family::Tree: return "Decision Tree";
    case Family::Mlp: return "MLP";
  }
  return "";
}

std::optional<Family> parse_family(std::string_view tag) {
  for (Family f : kAllFamilies) {
    if (family_tag(f) == tag) return f;
  }
  return std::nullopt;
}

Family family_of(const ModelConfig& config) {
  return static_cast<Family>(std::visit(
      [](const auto& c) -> int {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LogRegConfig>) return static_cast<int>(Family::LogReg);
        if constexpr (std::is_same_v<T, KnnConfig>) return static_cast<int>(Family::Knn);
        if constexpr (std::is_same_v<T, SvmConfig>) return static_cast<int>(Family::Svm);
        if constexpr (std::is_same_v<T, TreeConfig>) return static_cast<int>(Family::Tree);
        if constexpr (std::is_same_v<T, MlpConfig>) return static_cast<int>(Family::Mlp);
      },
      config));
}

ModelConfig default_config(Family family) {
  switch (family) {
    case Family::LogReg: return LogRegConfig{};
    case Family::Knn: return KnnConfig{};
    case Family::Svm: return SvmConfig{};
    case Family::Tree: return TreeConfig{};
    case Family::Mlp: return MlpConfig{};
  }
  return LogRegConfig{};
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::BadConfig, what); }

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

constexpr std::array<std::string_view, 5> kSolvers = {"lbfgs", "liblinear", "newton-cg", "sag",
                                                      "saga"};

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::Manhattan: return "manhattan";
    case Metric::Euclidean: return "euclidean";
    case Metric::Minkowski: return "minkowski";
  }
  return "";
}

std::string_view kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Poly: return "poly";
    case KernelKind::Rbf: return "rbf";
  }
  return "";
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

double as_real(std::string_view name, const nlohmann::json& v) {
  if (!v.is_number()) bad(std::string(name) + " must be a number");
  return v.get<double>();
}

int as_int(std::string_view name, const nlohmann::json& v) {
  if (!v.is_number_integer()) bad(std::string(name) + " must be an integer");
  return v.get<int>();
}

std::string as_text(std::string_view name, const nlohmann::json& v) {
  if (!v.is_string()) bad(std::string(name) + " must be a string");
  return lower(v.get<std::string>());
}

}  // namespace

void validate_config(const ModelConfig& config) {
  std::visit(
      [](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LogRegConfig>) {
          if (!positive(c.c)) bad("C must be > 0");
          if (std::find(kSolvers.begin(), kSolvers.end(), c.solver) == kSolvers.end()) {
            bad("unknown solver '" + c.solver + "'");
          }
          if (c.max_iter < 1) bad("max_iter must be >= 1");
          if (!(c.tol >= 0.0)) bad("tol must be >= 0");
        } else if constexpr (std::is_same_v<T, KnnConfig>) {
          if (c.k < 1) bad("n_neighbors must be >= 1");
          if (!(std::isfinite(c.p) && c.p >= 1.0)) bad("p must be >= 1");
        } else if constexpr (std::is_same_v<T, TreeConfig>) {
          if (c.max_depth && *c.max_depth < 1) bad("max_depth must be >= 1");
        } else if constexpr (std::is_same_v<T, SvmConfig>) {
          if (!positive(c.c)) bad("C must be > 0");
          if (c.degree < 1) bad("degree must be >= 1");
          if (c.gamma.kind == Gamma::Kind::Fixed && !positive(c.gamma.value)) bad("gamma must be > 0");
          if (!(c.tol > 0.0)) bad("tol must be > 0");
          if (c.max_passes < 1) bad("max_passes must be >= 1");
        } else if constexpr (std::is_same_v<T, MlpConfig>) {
          if (!(std::isfinite(c.alpha) && c.alpha >= 0.0)) bad("alpha must be >= 0");
          for (int h : c.hidden_layers) {
            if (h < 1) bad("hidden layer sizes must be >= 1");
          }
          if (c.max_iter < 0) bad("max_iter must be >= 0");
          if (!positive(c.learning_rate)) bad("learning_rate must be > 0");
        }
      },
      config);
}

std::vector<std::string> parameter_names(Family family) {
  switch (family) {
    case Family::LogReg: return {"C", "solver", "max_iter", "tol"};
    case Family::Knn: return {"n_neighbors", "metric", "p"};
    case Family::Svm: return {"C", "kernel", "degree", "gamma", "tol", "max_passes"};
    case Family::Tree: return {"criterion", "max_depth"};
    case Family::Mlp: return {"alpha", "hidden_layers", "max_iter", "learning_rate"};
  }
  return {};
}

void apply_parameter(ModelConfig& config, std::string_view name, const nlohmann::json& v) {
  const std::string key(name);
  std::visit(
      [&](auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LogRegConfig>) {
          if (key == "C") c.c = as_real(key, v);
          else if (key == "solver") c.solver = as_text(key, v);
          else if (key == "max_iter") c.max_iter = as_int(key, v);
          else if (key == "tol") c.tol = as_real(key, v);
          else bad("unknown logreg parameter '" + key + "'");
        } else if constexpr (std::is_same_v<T, KnnConfig>) {
          if (key == "n_neighbors") c.k = as_int(key, v);
          else if (key == "p") c.p = as_real(key, v);
          else if (key == "metric") {
            const auto m = as_text(key, v);
            if (m == "manhattan") c.metric = Metric::Manhattan;
            else if (m == "euclidean") c.metric = Metric::Euclidean;
            else if (m == "minkowski") c.metric = Metric::Minkowski;
            else bad("unknown metric '" + m + "'");
          } else bad("unknown knn parameter '" + key + "'");
        } else if constexpr (std::is_same_v<T, TreeConfig>) {
          if (key == "criterion") {
            const auto m = as_text(key, v);
            if (m == "gini") c.criterion = Criterion::Gini;
            else if (m == "entropy") c.criterion = Criterion::Entropy;
            else bad("unknown criterion '" + m + "'");
          } else if (key == "max_depth") {
            if (v.is_null()) c.max_depth.reset();
            else c.max_depth = as_int(key, v);
          } else bad("unknown tree parameter '" + key + "'");
        } else if constexpr (std::is_same_v<T, SvmConfig>) {
          if (key == "C") c.c = as_real(key, v);
          else if (key == "degree") c.degree = as_int(key, v);
          else if (key == "tol") c.tol = as_real(key, v);
          else if (key == "max_passes") c.max_passes = as_int(key, v);
          else if (key == "kernel") {
            const auto m = as_text(key, v);
            if (m == "linear") c.kernel = KernelKind::Linear;
            else if (m == "poly") c.kernel = KernelKind::Poly;
            else if (m == "rbf") c.kernel = KernelKind::Rbf;
            else bad("unknown kernel '" + m + "'");
          } else if (key == "gamma") {
            if (v.is_number()) c.gamma = {Gamma::Kind::Fixed, v.get<double>()};
            else {
              const auto m = as_text(key, v);
              if (m == "auto") c.gamma = {Gamma::Kind::Auto, 0.0};
              else if (m == "scale") c.gamma = {Gamma::Kind::Scale, 0.0};
              else bad("unknown gamma '" + m + "'");
            }
          } else bad("unknown svm parameter '" + key + "'");
        } else if constexpr (std::is_same_v<T, MlpConfig>) {
          if (key == "alpha") c.alpha = as_real(key, v);
          else if (key == "max_iter") c.max_iter = as_int(key, v);
          else if (key == "learning_rate") c.learning_rate = as_real(key, v);
          else if (key == "hidden_layers") {
            if (v.is_number_integer()) {
              c.hidden_layers = {v.get<int>()};
            } else if (v.is_array()) {
              c.hidden_layers.clear();
              for (const auto& h : v) c.hidden_layers.push_back(as_int(key, h));
            } else {
              bad("hidden_layers must be an integer or an array of integers");
            }
          } else bad("unknown mlp parameter '" + key + "'");
        }
      },
      config);
}

nlohmann::ordered_json config_to_json(const ModelConfig& config) {
  nlohmann::ordered_json j;
  j["family"] = family_tag(family_of(config));
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LogRegConfig>) {
          j["C"] = c.c;
          j["solver"] = c.solver;
          j["max_iter"] = c.max_iter;
          j["tol"] = c.tol;
        } else if constexpr (std::is_same_v<T, KnnConfig>) {
          j["n_neighbors"] = c.k;
          j["metric"] = metric_name(c.metric);
          j["p"] = c.p;
        } else if constexpr (std::is_same_v<T, TreeConfig>) {
          j["criterion"] = c.criterion == Criterion::Gini ? "gini" : "entropy";
          j["max_depth"] = c.max_depth ? nlohmann::ordered_json(*c.max_depth) : nullptr;
        } else if constexpr (std::is_same_v<T, SvmConfig>) {
          j["C"] = c.c;
          j["kernel"] = kernel_name(c.kernel);
          j["degree"] = c.degree;
          switch (c.gamma.kind) {
            case Gamma::Kind::Auto: j["gamma"] = "auto"; break;
            case Gamma::Kind::Scale: j["gamma"] = "scale"; break;
            case Gamma::Kind::Fixed: j["gamma"] = c.gamma.value; break;
          }
          j["tol"] = c.tol;
          j["max_passes"] = c.max_passes;
        } else if constexpr (std::is_same_v<T, MlpConfig>) {
          j["alpha"] = c.alpha;
          j["hidden_layers"] = c.hidden_layers;
          j["max_iter"] = c.max_iter;
          j["learning_rate"] = c.learning_rate;
        }
      },
      config);
  return j;
}

ModelConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("family") || !doc["family"].is_string()) {
    bad("config must be an object with a 'family' string");
  }
  const auto family = parse_family(doc["family"].get<std::string>());
  if (!family) bad("unknown family '" + doc["family"].get<std::string>() + "'");
  ModelConfig config = default_config(*family);
  for (const auto& [key, value] : doc.items()) {
    if (key == "family") continue;
    apply_parameter(config, key, value);
  }
  validate_config(config);
  return config;
}

std::string describe_parameter_value(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_null()) return "None";
  if (value.is_array()) {
    std::string out = "(";
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (i) out += ", ";
      out += describe_parameter_value(value[i]);
    }
    return out + (value.size() == 1 ? ",)" : ")");
  }
  return value.dump();
}

}  // namespace sysdetect
