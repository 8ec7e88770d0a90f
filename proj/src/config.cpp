#include "qkp/config.hpp"

#include <fstream>

#include "qkp/errors.hpp"

namespace qkp {
namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::pair<std::size_t, std::size_t> read_pair(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + " must be a [cols, rows] pair");
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

nlohmann::json kernel_json(const KernelSpec& k) {
  return {{"kind", std::string(to_string(k.kind))}, {"gamma", k.gaussian_gamma}, {"scale", k.quantum_scale},
          {"qubits", k.quantum_qubits},            {"shots", k.quantum_shots}, {"seed", k.quantum_seed}};
}

}  // namespace

void AppConfig::apply_seed() {
  solver.seed = seed;
  pipeline.solver.seed = seed;
  experiment.extraction_solver.seed = seed;
  experiment.matching_solver.seed = seed;
  kernel.quantum_seed = seed;
}

void merge_kernel(const nlohmann::json& j, KernelSpec& kernel) {
  if (!j.is_object()) throw ConfigError("kernel section must be an object");
  if (j.contains("kind")) kernel.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
  read(j, "gamma", kernel.gaussian_gamma);
  read(j, "scale", kernel.quantum_scale);
  read(j, "qubits", kernel.quantum_qubits);
  read(j, "shots", kernel.quantum_shots);
  read(j, "seed", kernel.quantum_seed);
  if (!(kernel.gaussian_gamma > 0.0)) throw ConfigError("gaussian gamma must be positive");
  if (!(kernel.quantum_scale >= 0.0)) throw ConfigError("quantum input scale must be non-negative");
}

void merge_level(const nlohmann::json& j, LevelSpec& level) {
  if (!j.is_object()) throw ConfigError("each pipeline level must be an object");
  if (j.contains("group")) std::tie(level.group_cols, level.group_rows) = read_pair(j.at("group"), "group");
  read(j, "k", level.k);
  if (j.contains("method")) level.method = clustering_method_from_string(j.at("method").get<std::string>());
  if (j.contains("kernel")) merge_kernel(j.at("kernel"), level.kernel);
  auto opt = [&](const char* key, std::optional<double>& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
  };
  opt("alpha", level.alpha);
  opt("beta", level.beta);
  opt("gamma", level.gamma);
  opt("lambda", level.lambda);
}

void merge_config(const nlohmann::json& j, AppConfig& config) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  try {
    read(j, "seed", config.seed);
    read(j, "threads", config.threads);
    if (j.contains("solver")) {
      merge_from_json(j.at("solver"), config.solver);
      config.pipeline.solver = config.solver;
    }
    if (j.contains("pipeline")) {
      const auto& p = j.at("pipeline");
      auto& pc = config.pipeline;
      read(p, "width", pc.target_width);
      read(p, "height", pc.target_height);
      if (p.contains("grid")) std::tie(pc.grid_cols, pc.grid_rows) = read_pair(p.at("grid"), "grid");
      read(p, "location_weight", pc.location_weight);
      read(p, "descriptor_window", pc.descriptor_window);
      if (p.contains("levels")) {
        const auto& levels = p.at("levels");
        if (!levels.is_array() || levels.empty()) throw ConfigError("pipeline.levels must be a non-empty array");
        std::vector<LevelSpec> parsed;
        for (std::size_t l = 0; l < levels.size(); ++l) {
          LevelSpec level = l < pc.levels.size() ? pc.levels[l] : LevelSpec{};
          merge_level(levels[l], level);
          parsed.push_back(level);
        }
        pc.levels = std::move(parsed);
      }
      if (p.contains("solver")) merge_from_json(p.at("solver"), pc.solver);
    }
    if (j.contains("matching")) {
      const auto& m = j.at("matching");
      read(m, "k_max", config.matching.k_max);
      read(m, "alpha", config.matching.alpha);
      read(m, "beta", config.matching.beta);
      read(m, "gamma", config.matching.gamma);
      config.matching.validate();
    }
    if (j.contains("kernel")) merge_kernel(j.at("kernel"), config.kernel);
    if (j.contains("experiment")) {
      const auto& e = j.at("experiment");
      auto& ec = config.experiment;
      read(e, "angle", ec.angle_degrees);
      read(e, "keypoints", ec.keypoints);
      read(e, "alphas", ec.alphas);
      read(e, "descriptor_window", ec.descriptor_window);
      if (e.contains("method")) ec.method = clustering_method_from_string(e.at("method").get<std::string>());
      if (e.contains("extraction_solver")) merge_from_json(e.at("extraction_solver"), ec.extraction_solver);
      if (e.contains("matching_solver")) merge_from_json(e.at("matching_solver"), ec.matching_solver);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  AppConfig config;
  merge_config(j, config);
  return config;
}

nlohmann::json to_json(const AppConfig& config) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : config.pipeline.levels) {
    nlohmann::json lj{{"group", {l.group_cols, l.group_rows}},
                      {"k", l.k},
                      {"method", std::string(to_string(l.method))},
                      {"kernel", kernel_json(l.kernel)}};
    if (l.alpha) lj["alpha"] = *l.alpha;
    if (l.beta) lj["beta"] = *l.beta;
    if (l.gamma) lj["gamma"] = *l.gamma;
    if (l.lambda) lj["lambda"] = *l.lambda;
    levels.push_back(std::move(lj));
  }
  const auto& p = config.pipeline;
  const auto& e = config.experiment;
  return {
      {"seed", config.seed},
      {"threads", config.threads},
      {"solver", config.solver},
      {"pipeline",
       {{"width", p.target_width},
        {"height", p.target_height},
        {"grid", {p.grid_cols, p.grid_rows}},
        {"location_weight", p.location_weight},
        {"descriptor_window", p.descriptor_window},
        {"levels", levels},
        {"solver", p.solver}}},
      {"matching",
       {{"k_max", config.matching.k_max},
        {"alpha", config.matching.alpha},
        {"beta", config.matching.beta},
        {"gamma", config.matching.gamma}}},
      {"kernel", kernel_json(config.kernel)},
      {"experiment",
       {{"angle", e.angle_degrees},
        {"keypoints", e.keypoints},
        {"alphas", e.alphas},
        {"descriptor_window", e.descriptor_window},
        {"method", std::string(to_string(e.method))},
        {"extraction_solver", e.extraction_solver},
        {"matching_solver", e.matching_solver}}},
  };
}

}  // namespace qkp
