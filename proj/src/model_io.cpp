#include "sysdetect/error.hpp"
#include "sysdetect/classifiers.hpp"

namespace sysdetect {

namespace {

using ojson = nlohmann::ordered_json;

ojson matrix_json(const Eigen::MatrixXd& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return ojson{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

ojson vector_json(const Eigen::VectorXd& v) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::BadModel, what); }

Eigen::MatrixXd matrix_from(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows) bad("matrix row count");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = data[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad("matrix column count");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from(const nlohmann::json& j) {
  if (!j.is_array()) bad("expected array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

struct StateWriter {
  ojson operator()(const LinearOvrState& s) const {
    return {{"kind", "linear_ovr"}, {"weights", matrix_json(s.weights)}, {"bias", vector_json(s.bias)}};
  }
  ojson operator()(const KnnState& s) const {
    return {{"kind", "knn"}, {"points", matrix_json(s.points)}, {"labels", s.labels}};
  }
  ojson operator()(const TreeState& s) const {
    ojson nodes = ojson::array();
    for (const auto& n : s.nodes) {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"counts", n.counts}});
    }
    return {{"kind", "tree"}, {"nodes", std::move(nodes)}};
  }
  ojson operator()(const KernelSvmState& s) const {
    ojson problems = ojson::array();
    for (const auto& p : s.problems) {
      problems.push_back({{"support", matrix_json(p.support)},
                          {"coefficients", vector_json(p.coefficients)},
                          {"bias", p.bias},
                          {"kkt_gap", p.kkt_gap},
                          {"converged", p.converged}});
    }
    return {{"kind", "kernel_svm"}, {"gamma", s.gamma}, {"problems", std::move(problems)}};
  }
  ojson operator()(const MlpState& s) const {
    ojson layers = ojson::array();
    for (std::size_t l = 0; l < s.weights.size(); ++l) {
      layers.push_back({{"weights", matrix_json(s.weights[l])}, {"bias", vector_json(s.biases[l])}});
    }
    return {{"kind", "mlp"}, {"layers", std::move(layers)}};
  }
};

ModelState state_from(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear_ovr") {
    return LinearOvrState{matrix_from(j.at("weights")), vector_from(j.at("bias"))};
  }
  if (kind == "knn") {
    return KnnState{matrix_from(j.at("points")), j.at("labels").get<std::vector<int>>()};
  }
  if (kind == "tree") {
    TreeState t;
    for (const auto& n : j.at("nodes")) {
      t.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                         n.at("left").get<int>(), n.at("right").get<int>(),
                         n.at("counts").get<std::vector<int>>()});
    }
    return t;
  }
  if (kind == "kernel_svm") {
    KernelSvmState s;
    s.gamma = j.at("gamma").get<double>();
    for (const auto& p : j.at("problems")) {
      s.problems.push_back({matrix_from(p.at("support")), vector_from(p.at("coefficients")),
                            p.at("bias").get<double>(), p.at("kkt_gap").get<double>(),
                            p.at("converged").get<bool>()});
    }
    return s;
  }
  if (kind == "mlp") {
    MlpState s;
    for (const auto& l : j.at("layers")) {
      s.weights.push_back(matrix_from(l.at("weights")));
      s.biases.push_back(vector_from(l.at("bias")));
    }
    return s;
  }
  bad("unknown state kind '" + kind + "'");
}

}  // namespace

nlohmann::ordered_json model_to_json(const TrainedModel& model) {
  ojson j;
  j["family"] = family_tag(family_of(model.config));
  j["config"] = config_to_json(model.config);
  j["classes"] = model.classes;
  j["seed"] = model.seed;
  j["dimension"] = model.dimension;
  j["state"] = std::visit(StateWriter{}, model.state);
  return j;
}

TrainedModel model_from_json(const nlohmann::json& doc) {
  try {
    TrainedModel m;
    m.config = config_from_json(doc.at("config"));
    if (family_tag(family_of(m.config)) != doc.at("family").get<std::string>()) {
      bad("family tag does not match config");
    }
    m.classes = doc.at("classes").get<std::vector<std::string>>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.dimension = doc.at("dimension").get<Eigen::Index>();
    m.state = state_from(doc.at("state"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
}

}  // namespace sysdetect
