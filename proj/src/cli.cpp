#include "qkp/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qkp/config.hpp"
#include "qkp/errors.hpp"
#include "qkp/parallel.hpp"

namespace qkp::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kMaxPatchPixels = 4096;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string config_path;
  std::string out_dir = "qkp_out";
};

struct SolverOptions {
  std::string solver;
  std::optional<int> shots, sweeps, tenure, tabu_iterations;
  std::optional<double> t_initial, t_final;

  void add_to(CLI::App& app, const std::string& prefix = "") {
    app.add_option("--" + prefix + "solver", solver, "solver preset or kind: sa, digital, short, tabu, exhaustive");
    app.add_option("--" + prefix + "shots", shots, "independent solver runs");
    app.add_option("--" + prefix + "sweeps", sweeps, "simulated annealing sweeps per shot");
    app.add_option("--" + prefix + "tenure", tenure, "tabu tenure");
    app.add_option("--" + prefix + "tabu-iterations", tabu_iterations, "tabu non-improving iteration limit");
    app.add_option("--" + prefix + "t-initial", t_initial, "initial annealing temperature");
    app.add_option("--" + prefix + "t-final", t_final, "final annealing temperature");
  }

  void apply(SolverConfig& config) const {
    if (!solver.empty()) {
      const auto seed = config.seed;
      config = solver == "simulated_annealing" ? SolverConfig::preset("sa") : SolverConfig::preset(solver);
      config.seed = seed;
    }
    if (shots) config.shots = *shots;
    if (sweeps) config.sa_sweeps = *sweeps;
    if (tenure) config.tabu_tenure = *tenure;
    if (tabu_iterations) config.tabu_iterations = *tabu_iterations;
    if (t_initial) {
      config.sa_temp_initial = *t_initial;
      config.sa_schedule = TemperatureSchedule::fixed;
    }
    if (t_final) {
      config.sa_temp_final = *t_final;
      config.sa_schedule = TemperatureSchedule::fixed;
    }
    config.validate();
  }
};

std::pair<std::size_t, std::size_t> parse_dims(const std::string& text, const char* what) {
  const auto x = text.find('x');
  std::size_t a = 0, b = 0;
  if (x == std::string::npos ||
      std::from_chars(text.data(), text.data() + x, a).ec != std::errc{} ||
      std::from_chars(text.data() + x + 1, text.data() + text.size(), b).ec != std::errc{} || a == 0 || b == 0) {
    throw ConfigError(std::string(what) + " must look like COLSxROWS, got '" + text + "'");
  }
  return {a, b};
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

class Manifest {
 public:
  Manifest(std::string command, const AppConfig& config) {
    doc_ = {{"command", std::move(command)},
            {"tool_version", kVersion},
            {"seed", config.seed},
            {"config", to_json(config)},
            {"timings_seconds", nlohmann::json::object()},
            {"outputs", nlohmann::json::array()}};
  }
  void time(const std::string& stage, Clock::time_point start) {
    doc_["timings_seconds"][stage] = std::chrono::duration<double>(Clock::now() - start).count();
  }
  void output(const fs::path& path) { doc_["outputs"].push_back(path.string()); }
  nlohmann::json& doc() { return doc_; }
  void write(const fs::path& dir) { write_text(dir / "manifest.json", doc_.dump(2) + "\n"); }

 private:
  nlohmann::json doc_;
};

AppConfig resolve_config(const GlobalOptions& global) {
  AppConfig config = global.config_path.empty() ? AppConfig{} : load_config(global.config_path);
  if (global.seed) config.seed = *global.seed;
  if (global.threads) config.threads = *global.threads;
  config.apply_seed();
  set_max_threads(config.threads);
  return config;
}

Image load_cropped(const std::string& path, const std::vector<std::size_t>& crop_box) {
  Image image = load_image(path);
  if (crop_box.empty()) return image;
  if (crop_box.size() != 4) throw ConfigError("--crop expects x,y,width,height");
  if (crop_box[0] + crop_box[2] > image.width() || crop_box[1] + crop_box[3] > image.height() || crop_box[2] == 0 ||
      crop_box[3] == 0) {
    throw ConfigError("--crop window lies outside the image");
  }
  return crop(image, crop_box[0], crop_box[1], crop_box[2], crop_box[3]);
}

PointSet read_points(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open points file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  PointSet points;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    try {
      points = nlohmann::json::parse(text).get<PointSet>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("points file is not a JSON array of vectors: " + std::string(e.what()));
    }
  } else {
    std::stringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
      if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
      Point p;
      for (const auto& cell : split(line, ',')) {
        std::size_t used = 0;
        try {
          p.push_back(std::stod(cell, &used));
        } catch (const std::exception&) {
          throw ConfigError("points file: cannot parse '" + cell + "'");
        }
      }
      points.push_back(std::move(p));
    }
  }
  if (points.empty()) throw ConfigError("points file contains no points");
  return points;
}

int cmd_keypoints(const GlobalOptions& global, const std::string& image_path, const std::string& size,
                  const std::string& grid, const std::string& ks, const std::string& groups, const std::string& method,
                  const std::string& kernel, const SolverOptions& solver_opts) {
  AppConfig config = resolve_config(global);
  auto& pc = config.pipeline;
  if (!size.empty()) std::tie(pc.target_width, pc.target_height) = parse_dims(size, "--size");
  if (!grid.empty()) std::tie(pc.grid_cols, pc.grid_rows) = parse_dims(grid, "--grid");
  if (!ks.empty()) {
    const auto k_list = split(ks, ',');
    const auto group_list = split(groups, ',');
    if (!groups.empty() && group_list.size() + 1 != k_list.size()) {
      throw ConfigError("--group needs one entry per level after the first");
    }
    std::vector<LevelSpec> levels;
    for (std::size_t l = 0; l < k_list.size(); ++l) {
      LevelSpec level = l < pc.levels.size() ? pc.levels[l] : LevelSpec{};
      if (std::from_chars(k_list[l].data(), k_list[l].data() + k_list[l].size(), level.k).ec != std::errc{}) {
        throw ConfigError("--k entries must be positive integers");
      }
      if (l > 0 && !group_list.empty()) {
        std::tie(level.group_cols, level.group_rows) = parse_dims(group_list[l - 1], "--group");
      }
      levels.push_back(level);
    }
    pc.levels = std::move(levels);
  }
  for (auto& level : pc.levels) {
    if (!method.empty()) level.method = clustering_method_from_string(method);
    if (!kernel.empty()) level.kernel.kind = kernel_kind_from_string(kernel);
  }
  solver_opts.apply(pc.solver);
  pc.validate();

  const fs::path out_dir = global.out_dir;
  ensure_dir(out_dir);
  Manifest manifest("keypoints", config);
  auto start = Clock::now();
  const PixelGrid pixels = load_and_preprocess(image_path, pc);
  manifest.time("load_and_preprocess", start);
  start = Clock::now();
  const ExtractionReport report = hierarchical_extract(pixels, pc);
  manifest.time("hierarchical_extract", start);

  nlohmann::json doc{{"image", fs::path(image_path).filename().string()},
                     {"width", pixels.image.width()},
                     {"height", pixels.image.height()},
                     {"patch_count", report.patch_count},
                     {"patch_size", {report.patch_width, report.patch_height}},
                     {"levels", nlohmann::json::array()},
                     {"keypoints", keypoints_to_json(report.keypoints)}};
  for (const auto& lr : report.levels) {
    doc["levels"].push_back({{"level", lr.level},
                             {"groups", lr.groups},
                             {"keypoints", lr.keypoints},
                             {"repaired_groups", lr.repaired_groups},
                             {"undersized_groups", lr.undersized_groups}});
    manifest.doc()["timings_seconds"]["level_" + std::to_string(lr.level)] = lr.seconds;
  }
  const fs::path json_path = out_dir / "keypoints.json";
  const fs::path png_path = out_dir / "keypoints_overlay.png";
  write_text(json_path, doc.dump(2) + "\n");
  save_png(png_path, render_keypoints(pixels.image, report.keypoints, pixels.image.width() < 256 ? 4 : 1));
  manifest.output(json_path);
  manifest.output(png_path);
  manifest.write(out_dir);
  std::cout << report.keypoints.size() << " keypoints written to " << json_path.string() << "\n";
  return kOk;
}

int cmd_match(const GlobalOptions& global, const std::string& image_a, const std::string& image_b,
              std::optional<double> rotate, const std::vector<double>& alphas, std::optional<std::size_t> keypoints,
              const std::vector<std::size_t>& crop_box, const SolverOptions& match_solver,
              const SolverOptions& extract_solver) {
  AppConfig config = resolve_config(global);
  auto& ec = config.experiment;
  if (!alphas.empty()) ec.alphas = alphas;
  for (double a : ec.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  }
  if (keypoints) ec.keypoints = *keypoints;
  if (rotate) ec.angle_degrees = *rotate;
  ec.matching.k_max = config.matching.k_max;
  ec.matching.beta = config.matching.beta;
  ec.matching.gamma = config.matching.gamma;
  match_solver.apply(ec.matching_solver);
  extract_solver.apply(ec.extraction_solver);
  if (image_b.empty() && !rotate) throw ConfigError("match needs a second image or --rotate ANGLE");

  const fs::path out_dir = global.out_dir;
  ensure_dir(out_dir);
  Manifest manifest("match", config);
  auto start = Clock::now();
  const Image a = load_cropped(image_a, crop_box);
  const Image b = image_b.empty() ? rotate_bilinear(a, ec.angle_degrees) : load_cropped(image_b, crop_box);
  for (const Image* img : {&a, &b}) {
    if (img->width() * img->height() > kMaxPatchPixels) {
      throw ConfigError("patch has " + std::to_string(img->width() * img->height()) + " pixels; use --crop to select at most " +
                        std::to_string(kMaxPatchPixels));
    }
  }
  manifest.time("load", start);

  start = Clock::now();
  RotationExperimentResult result;
  if (image_b.empty()) {
    result = rotated_matching_experiment(a, ec);
  } else {
    // Two independent images: same extraction and matching path without the
    // synthetic rotation.
    RotationExperimentConfig pair_config = ec;
    pair_config.angle_degrees = 0.0;
    result.original = a;
    result.rotated = b;
    result.keypoints_original = extract_patch_keypoints(a, ec.keypoints, ec.method, ec.extraction_kernel,
                                                        ec.location_weight, ec.extraction_solver);
    result.keypoints_rotated = extract_patch_keypoints(b, ec.keypoints, ec.method, ec.extraction_kernel,
                                                       ec.location_weight, ec.extraction_solver);
    for (const auto& kp : result.keypoints_original) {
      result.descriptors_original.push_back(compute_descriptor(a, kp.col, kp.row, ec.descriptor_window));
    }
    for (const auto& kp : result.keypoints_rotated) {
      result.descriptors_rotated.push_back(compute_descriptor(b, kp.col, kp.row, ec.descriptor_window));
    }
    for (double alpha : ec.alphas) {
      MatchingSpec spec = ec.matching;
      spec.alpha = alpha;
      result.runs.push_back({alpha, match_keypoints(result.descriptors_original, result.descriptors_rotated,
                                                    make_cosine_kernel(), spec, ec.matching_solver)});
    }
  }
  manifest.time("extract_and_match", start);

  nlohmann::json doc{{"keypoints_a", keypoints_to_json(result.keypoints_original)},
                     {"keypoints_b", keypoints_to_json(result.keypoints_rotated)},
                     {"runs", nlohmann::json::array()}};
  if (image_b.empty()) doc["rotation_degrees"] = ec.angle_degrees;
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    const auto& run = result.runs[r];
    doc["runs"].push_back({{"alpha", run.alpha},
                           {"energy", run.result.sample.energy},
                           {"matches", run.result.decoded.matches},
                           {"feasibility", run.result.decoded.report}});
    const fs::path png = out_dir / ("matches_" + std::to_string(r) + ".png");
    save_png(png, render_matches(result.original, result.rotated, result.keypoints_original,
                                 result.keypoints_rotated, run.result.decoded.matches));
    manifest.output(png);
  }
  const fs::path json_path = out_dir / "matches.json";
  write_text(json_path, doc.dump(2) + "\n");
  manifest.output(json_path);
  manifest.write(out_dir);
  for (const auto& run : result.runs) {
    std::cout << "alpha " << run.alpha << ": " << run.result.decoded.matches.size() << " matches\n";
  }
  return kOk;
}

int cmd_kernel_matrix(const GlobalOptions& global, const std::string& points_path, const std::string& image_path,
                      const std::vector<std::size_t>& crop_box, const std::string& kernel,
                      std::optional<double> scale, std::optional<std::uint64_t> shots, std::optional<double> gamma,
                      std::optional<std::size_t> qubits) {
  AppConfig config = resolve_config(global);
  KernelSpec& ks = config.kernel;
  if (!kernel.empty()) ks.kind = kernel_kind_from_string(kernel);
  if (scale) ks.quantum_scale = *scale;
  if (shots) ks.quantum_shots = *shots;
  if (gamma) ks.gaussian_gamma = *gamma;
  if (qubits) ks.quantum_qubits = *qubits;
  if (!(ks.quantum_scale >= 0.0)) throw ConfigError("--scale must be non-negative");
  if (!(ks.gaussian_gamma > 0.0)) throw ConfigError("--gamma must be positive");
  if (points_path.empty() == image_path.empty()) throw ConfigError("give exactly one of --points or --image");

  const fs::path out_dir = global.out_dir;
  ensure_dir(out_dir);
  Manifest manifest("kernel-matrix", config);
  auto start = Clock::now();
  PointSet points;
  if (!points_path.empty()) {
    points = read_points(points_path);
  } else {
    const Image patch = load_cropped(image_path, crop_box);
    if (patch.width() * patch.height() > kMaxPatchPixels) {
      throw ConfigError("image patch too large for a dense kernel matrix; use --crop");
    }
    points = split_patches(PixelGrid{patch, config.pipeline.location_weight}, 1, 1).front().vectors;
  }
  if (ks.kind == KernelKind::quantum && points.front().size() < ks.quantum_qubits) {
    ks.quantum_qubits = points.front().size();
  }
  manifest.time("load", start);
  start = Clock::now();
  KernelMatrix matrix;
  try {
    matrix = build_kernel_matrix(points, make_kernel(ks));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  manifest.time("kernel", start);

  std::ostringstream csv;
  write_csv(csv, matrix.entries);
  const fs::path csv_path = out_dir / "kernel.csv";
  const fs::path png_path = out_dir / "kernel.png";
  write_text(csv_path, csv.str());
  const std::size_t scale_up = std::max<std::size_t>(1, 256 / std::max<std::size_t>(1, matrix.rows()));
  save_png(png_path, upscale_nearest(render_heatmap(matrix.entries), scale_up));
  manifest.output(csv_path);
  manifest.output(png_path);
  manifest.write(out_dir);
  std::cout << matrix.rows() << "x" << matrix.cols() << " " << to_string(ks.kind) << " kernel matrix written to "
            << csv_path.string() << "\n";
  return kOk;
}

int cmd_solve(const GlobalOptions& global, const std::string& qubo_path, const SolverOptions& solver_opts) {
  AppConfig config = resolve_config(global);
  solver_opts.apply(config.solver);
  std::ifstream in(qubo_path);
  if (!in) throw IoError("cannot open QUBO file '" + qubo_path + "'");
  QuboProblem problem;
  try {
    problem = nlohmann::json::parse(in).get<QuboProblem>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed QUBO JSON: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("invalid QUBO: " + std::string(e.what()));
  }
  const fs::path out_dir = global.out_dir;
  ensure_dir(out_dir);
  Manifest manifest("solve", config);
  const auto start = Clock::now();
  const SolveResult result = solve(problem, config.solver);
  manifest.time("solve", start);
  manifest.doc()["shot_seconds"] = result.shot_seconds;
  nlohmann::json doc = result;
  doc["solver"] = config.solver;
  const fs::path json_path = out_dir / "solve_result.json";
  write_text(json_path, doc.dump(2) + "\n");
  manifest.output(json_path);
  manifest.write(out_dir);
  std::cout << "best energy " << result.best.energy << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Keypoint extraction and matching through QUBO compilation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "random seed for every solver and sampler");
  app.add_option("--threads", global.threads, "worker thread cap (0 = all cores)");
  app.add_option("--config", global.config_path, "JSON config file");
  app.add_option("--out-dir", global.out_dir, "output directory")->capture_default_str();

  std::string image_path, size, grid, ks, groups, method, kernel_name;
  SolverOptions kp_solver;
  auto* keypoints = app.add_subcommand("keypoints", "hierarchical keypoint extraction");
  keypoints->add_option("image", image_path, "PNG or PPM image")->required();
  keypoints->add_option("--size", size, "downsample target COLSxROWS (default 928x704)");
  keypoints->add_option("--grid", grid, "patch grid COLSxROWS (default 32x32)");
  keypoints->add_option("--k", ks, "comma-separated k per level (default 10,20,45)");
  keypoints->add_option("--group", groups, "comma-separated group sizes for levels after the first, e.g. 4x4,4x4");
  keypoints->add_option("--method", method, "kmedoids or kdc");
  keypoints->add_option("--kernel", kernel_name, "KDC kernel: gaussian, cosine or quantum");
  kp_solver.add_to(*keypoints);

  std::string match_a, match_b;
  std::optional<double> rotate;
  std::vector<double> alphas;
  std::optional<std::size_t> n_keypoints;
  std::vector<std::size_t> crop_box;
  SolverOptions match_solver, extract_solver;
  auto* match = app.add_subcommand("match", "keypoint matching via the matching QUBO");
  match->add_option("image_a", match_a, "first image (patch)")->required();
  match->add_option("image_b", match_b, "second image (patch)");
  match->add_option("--rotate", rotate, "match image_a against itself rotated by this many degrees");
  match->add_option("--alpha", alphas, "alpha values in [0, 1] (repeatable)");
  match->add_option("--keypoints", n_keypoints, "keypoints extracted per image");
  match->add_option("--crop", crop_box, "x,y,width,height sub-image")->delimiter(',');
  match_solver.add_to(*match);
  extract_solver.add_to(*match, "extract-");

  std::string points_path, km_image;
  std::vector<std::size_t> km_crop;
  std::string km_kernel;
  std::optional<double> km_scale, km_gamma;
  std::optional<std::uint64_t> km_shots;
  std::optional<std::size_t> km_qubits;
  auto* kernel_matrix = app.add_subcommand("kernel-matrix", "kernel matrix CSV and heatmap");
  kernel_matrix->add_option("--points", points_path, "CSV or JSON file with one vector per row");
  kernel_matrix->add_option("--image", km_image, "image patch whose pixel vectors are used");
  kernel_matrix->add_option("--crop", km_crop, "x,y,width,height sub-image")->delimiter(',');
  kernel_matrix->add_option("--kernel", km_kernel, "gaussian, cosine or quantum");
  kernel_matrix->add_option("--scale", km_scale, "quantum kernel input scale");
  kernel_matrix->add_option("--shots", km_shots, "quantum kernel shots (default exact)");
  kernel_matrix->add_option("--gamma", km_gamma, "gaussian kernel width");
  kernel_matrix->add_option("--qubits", km_qubits, "quantum kernel qubit count");

  std::string qubo_path;
  SolverOptions solve_solver;
  auto* solve_cmd = app.add_subcommand("solve", "solve a QUBO given as JSON");
  solve_cmd->add_option("qubo", qubo_path, "QUBO JSON file")->required();
  solve_solver.add_to(*solve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*keypoints) {
      return cmd_keypoints(global, image_path, size, grid, ks, groups, method, kernel_name, kp_solver);
    }
    if (*match) {
      return cmd_match(global, match_a, match_b, rotate, alphas, n_keypoints, crop_box, match_solver, extract_solver);
    }
    if (*kernel_matrix) {
      return cmd_kernel_matrix(global, points_path, km_image, km_crop, km_kernel, km_scale, km_shots, km_gamma,
                               km_qubits);
    }
    if (*solve_cmd) return cmd_solve(global, qubo_path, solve_solver);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kConfigError;
}

}  // namespace qkp::cli
