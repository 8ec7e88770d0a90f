#include "qkp/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qkp/errors.hpp"
#include "qkp/parallel.hpp"

namespace qkp {
namespace {

double luminance(Rgb c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

// A cell of the current hierarchy level: a pixel rectangle and the keypoints
// found inside it so far.
struct Cell {
  std::size_t origin_col = 0;
  std::size_t origin_row = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Keypoint> keypoints;
};

}  // namespace

Kernel make_kernel(const KernelSpec& spec) {
  switch (spec.kind) {
    case KernelKind::gaussian: return make_gaussian_kernel(spec.gaussian_gamma);
    case KernelKind::cosine: return make_cosine_kernel();
    case KernelKind::quantum: {
      auto fm = quantum::default_feature_map(spec.quantum_qubits, spec.quantum_scale);
      std::optional<quantum::ShotOptions> shots;
      if (spec.quantum_shots > 0) shots = quantum::ShotOptions{spec.quantum_shots, spec.quantum_seed};
      return quantum::make_quantum_kernel(std::move(fm), shots);
    }
  }
  throw ConfigError("unhandled kernel kind");
}

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::cosine: return "cosine";
    case KernelKind::quantum: return "quantum";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(std::string_view name) {
  if (name == "gaussian") return KernelKind::gaussian;
  if (name == "cosine") return KernelKind::cosine;
  if (name == "quantum") return KernelKind::quantum;
  throw ConfigError("unknown kernel '" + std::string(name) + "'");
}

ClusteringSpec LevelSpec::resolve(std::size_t n) const {
  ClusteringSpec spec = ClusteringSpec::with_defaults(k, std::max<std::size_t>(n, 1));
  if (alpha) spec.alpha = *alpha;
  if (beta) spec.beta = *beta;
  if (gamma) spec.gamma = *gamma;
  if (lambda) spec.lambda = *lambda;
  return spec;
}

std::vector<LevelSpec> PipelineConfig::default_levels() {
  LevelSpec level0;
  level0.k = 10;
  LevelSpec level1;
  level1.group_cols = level1.group_rows = 4;
  level1.k = 20;
  LevelSpec level2;
  level2.group_cols = level2.group_rows = 4;
  level2.k = 45;
  return {level0, level1, level2};
}

void PipelineConfig::validate() const {
  if (target_width == 0 || target_height == 0) throw ConfigError("downsample target must be non-empty");
  if (grid_cols == 0 || grid_rows == 0) throw ConfigError("patch grid must be non-empty");
  if (grid_cols > target_width || grid_rows > target_height) {
    throw ConfigError("patch grid is finer than the image");
  }
  if (!(location_weight >= 0.0)) throw ConfigError("location_weight must be non-negative");
  if (levels.empty()) throw ConfigError("at least one clustering level is required");
  if (descriptor_window % 2 == 0) throw ConfigError("descriptor window must be odd");
  std::size_t cols = grid_cols, rows = grid_rows;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& level = levels[l];
    if (level.k == 0) throw ConfigError("level " + std::to_string(l) + ": k must be positive");
    if (l == 0) continue;
    if (level.group_cols == 0 || level.group_rows == 0 || cols % level.group_cols != 0 ||
        rows % level.group_rows != 0) {
      throw ConfigError("level " + std::to_string(l) + ": group " + std::to_string(level.group_cols) + "x" +
                        std::to_string(level.group_rows) + " does not divide the " + std::to_string(cols) + "x" +
                        std::to_string(rows) + " cell grid");
    }
    cols /= level.group_cols;
    rows /= level.group_rows;
  }
  solver.validate();
}

Point pixel_vector(std::size_t local_col, std::size_t local_row, std::size_t region_width, std::size_t region_height,
                   Rgb color, double location_weight) {
  const double wx = static_cast<double>(std::max<std::size_t>(region_width, 2) - 1);
  const double wy = static_cast<double>(std::max<std::size_t>(region_height, 2) - 1);
  Point v{location_weight * static_cast<double>(local_col) / wx, location_weight * static_cast<double>(local_row) / wy,
          color[0] / 255.0, color[1] / 255.0, color[2] / 255.0};
  double sq = 0.0;
  for (double c : v) sq += c * c;
  if (sq == 0.0) {
    v[4] = 1e-9;
    sq = v[4] * v[4];
  }
  const double norm = std::sqrt(sq);
  for (double& c : v) c /= norm;
  return v;
}

PixelGrid preprocess(const Image& image, const PipelineConfig& config) {
  if (image.empty()) throw IoError("empty image");
  return {downsample_area(image, config.target_width, config.target_height), config.location_weight};
}

PixelGrid load_and_preprocess(const std::filesystem::path& path, const PipelineConfig& config) {
  return preprocess(load_image(path), config);
}

std::vector<Patch> split_patches(const PixelGrid& grid, std::size_t grid_cols, std::size_t grid_rows) {
  const Image& image = grid.image;
  if (grid_cols == 0 || grid_rows == 0 || grid_cols > image.width() || grid_rows > image.height()) {
    throw std::invalid_argument("patch grid " + std::to_string(grid_cols) + "x" + std::to_string(grid_rows) +
                                " does not fit a " + std::to_string(image.width()) + "x" +
                                std::to_string(image.height()) + " image");
  }
  const std::size_t pw = image.width() / grid_cols;
  const std::size_t ph = image.height() / grid_rows;
  std::vector<Patch> patches;
  patches.reserve(grid_cols * grid_rows);
  for (std::size_t pr = 0; pr < grid_rows; ++pr) {
    for (std::size_t pc = 0; pc < grid_cols; ++pc) {
      Patch patch{pr * grid_cols + pc, pc * pw, pr * ph, pw, ph, {}};
      patch.vectors.reserve(pw * ph);
      for (std::size_t r = 0; r < ph; ++r) {
        for (std::size_t c = 0; c < pw; ++c) {
          patch.vectors.push_back(
              pixel_vector(c, r, pw, ph, image.at(patch.origin_col + c, patch.origin_row + r), grid.location_weight));
        }
      }
      patches.push_back(std::move(patch));
    }
  }
  return patches;
}

ExtractionReport hierarchical_extract(const PixelGrid& grid, const PipelineConfig& config) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  ExtractionReport report;
  const Image& image = grid.image;

  // Level 0: one clustering problem per patch.
  auto start = Clock::now();
  const auto patches = split_patches(grid, config.grid_cols, config.grid_rows);
  report.patch_count = patches.size();
  report.patch_width = patches.front().width;
  report.patch_height = patches.front().height;

  const LevelSpec& first = config.levels.front();
  const Kernel first_kernel = first.method == ClusteringMethod::kdc ? make_kernel(first.kernel) : Kernel{};
  std::vector<Cell> cells(patches.size());
  std::vector<std::uint8_t> repaired(patches.size(), 0), undersized(patches.size(), 0);
  parallel_for(patches.size(), [&](std::size_t p) {
    const Patch& patch = patches[p];
    Cell& cell = cells[p];
    cell = {patch.origin_col, patch.origin_row, patch.width, patch.height, {}};
    std::vector<std::size_t> chosen;
    if (patch.vectors.size() <= first.k) {
      undersized[p] = patch.vectors.size() < first.k;
      for (std::size_t i = 0; i < patch.vectors.size(); ++i) chosen.push_back(i);
    } else {
      SolverConfig solver = config.solver;
      solver.seed = config.solver.seed ^ (static_cast<std::uint64_t>(p) << 20);
      auto result = extract_keypoints(patch.vectors, first.method, first_kernel, first.resolve(patch.vectors.size()),
                                      solver);
      repaired[p] = result.repaired;
      chosen = std::move(result.indices);
    }
    for (std::size_t i : chosen) {
      cell.keypoints.push_back({patch.pixel_col(i), patch.pixel_row(i), patch.vectors[i], 0, {patch.index}});
    }
  });
  auto summarize = [&](std::size_t level, std::size_t gc, std::size_t gr) {
    LevelReport lr{level, cells.size(), gc, gr, 0, 0, 0,
                   std::chrono::duration<double>(Clock::now() - start).count()};
    for (const auto& c : cells) lr.keypoints += c.keypoints.size();
    for (auto f : repaired) lr.repaired_groups += f;
    for (auto f : undersized) lr.undersized_groups += f;
    report.levels.push_back(lr);
  };
  summarize(0, config.grid_cols, config.grid_rows);

  // Higher levels: merge groups of cells and re-cluster their keypoints.
  std::size_t cols = config.grid_cols, rows = config.grid_rows;
  for (std::size_t l = 1; l < config.levels.size(); ++l) {
    start = Clock::now();
    const LevelSpec& level = config.levels[l];
    const Kernel kernel = level.method == ClusteringMethod::kdc ? make_kernel(level.kernel) : Kernel{};
    const std::size_t next_cols = cols / level.group_cols;
    const std::size_t next_rows = rows / level.group_rows;
    std::vector<Cell> merged(next_cols * next_rows);
    repaired.assign(merged.size(), 0);
    undersized.assign(merged.size(), 0);
    parallel_for(merged.size(), [&](std::size_t g) {
      const std::size_t gc = g % next_cols, gr = g / next_cols;
      Cell& out = merged[g];
      std::vector<const Keypoint*> members;
      for (std::size_t r = 0; r < level.group_rows; ++r) {
        for (std::size_t c = 0; c < level.group_cols; ++c) {
          const Cell& cell = cells[(gr * level.group_rows + r) * cols + gc * level.group_cols + c];
          if (r == 0 && c == 0) {
            out.origin_col = cell.origin_col;
            out.origin_row = cell.origin_row;
          }
          for (const auto& kp : cell.keypoints) members.push_back(&kp);
        }
      }
      const Cell& last = cells[((gr + 1) * level.group_rows - 1) * cols + (gc + 1) * level.group_cols - 1];
      out.width = last.origin_col + last.width - out.origin_col;
      out.height = last.origin_row + last.height - out.origin_row;

      PointSet points;
      points.reserve(members.size());
      for (const Keypoint* kp : members) {
        points.push_back(pixel_vector(kp->col - out.origin_col, kp->row - out.origin_row, out.width, out.height,
                                      image.at(kp->col, kp->row), grid.location_weight));
      }
      std::vector<std::size_t> chosen;
      if (points.size() <= level.k) {
        undersized[g] = points.size() < level.k;
        for (std::size_t i = 0; i < points.size(); ++i) chosen.push_back(i);
      } else {
        SolverConfig solver = config.solver;
        solver.seed = config.solver.seed ^ (static_cast<std::uint64_t>(l) << 40) ^ (static_cast<std::uint64_t>(g) << 20);
        auto result = extract_keypoints(points, level.method, kernel, level.resolve(points.size()), solver);
        repaired[g] = result.repaired;
        chosen = std::move(result.indices);
      }
      for (std::size_t i : chosen) {
        Keypoint kp = *members[i];
        kp.feature = points[i];
        kp.level = l;
        kp.patch_path.push_back(g);
        out.keypoints.push_back(std::move(kp));
      }
    });
    cells = std::move(merged);
    cols = next_cols;
    rows = next_rows;
    summarize(l, level.group_cols, level.group_rows);
  }

  for (auto& cell : cells) {
    for (auto& kp : cell.keypoints) report.keypoints.push_back(std::move(kp));
  }
  return report;
}

Point compute_descriptor(const Image& image, std::size_t col, std::size_t row, std::size_t window) {
  if (window % 2 == 0 || window == 0) throw std::invalid_argument("descriptor window must be odd");
  if (col >= image.width() || row >= image.height()) throw std::invalid_argument("keypoint outside image");
  const long w = static_cast<long>(image.width());
  const long h = static_cast<long>(image.height());
  auto lum = [&](long c, long r) {
    return luminance(image.at(static_cast<std::size_t>(std::clamp(c, 0L, w - 1)),
                              static_cast<std::size_t>(std::clamp(r, 0L, h - 1))));
  };
  constexpr int kBins = 8;
  Point hist(4 * kBins, 0.0);
  const long half = static_cast<long>(window / 2);
  const auto win = static_cast<long>(window);
  for (long v = -half; v <= half; ++v) {
    for (long u = -half; u <= half; ++u) {
      const long c = static_cast<long>(col) + u;
      const long r = static_cast<long>(row) + v;
      const double gx = lum(c + 1, r) - lum(c - 1, r);
      const double gy = lum(c, r + 1) - lum(c, r - 1);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      const int bin = static_cast<int>(angle / (2.0 * std::numbers::pi / kBins)) % kBins;
      const long cell_x = (u + half) * 2 / win;
      const long cell_y = (v + half) * 2 / win;
      hist[static_cast<std::size_t>((cell_y * 2 + cell_x) * kBins + bin)] += mag;
    }
  }
  double sq = 0.0;
  for (double& b : hist) {
    b += 1e-9;
    sq += b * b;
  }
  const double norm = std::sqrt(sq);
  for (double& b : hist) b /= norm;
  return hist;
}

Image render_keypoints(const Image& image, const std::vector<Keypoint>& keypoints, std::size_t scale) {
  Image out = scale > 1 ? upscale_nearest(image, scale) : image;
  const long s = static_cast<long>(scale);
  for (const auto& kp : keypoints) {
    const long c = static_cast<long>(kp.col) * s + s / 2;
    const long r = static_cast<long>(kp.row) * s + s / 2;
    draw_cross(out, c, r, std::max(2L, s), {255, 0, 0});
  }
  return out;
}

Image render_matches(const Image& left, const Image& right, const std::vector<Keypoint>& left_keypoints,
                     const std::vector<Keypoint>& right_keypoints, const MatchSet& matches, std::size_t scale) {
  const std::size_t gap = 4 * scale;
  Image canvas = hstack(upscale_nearest(left, scale), upscale_nearest(right, scale), gap);
  const long s = static_cast<long>(scale);
  const long shift = static_cast<long>(left.width() * scale + gap);
  auto pos = [s](const Keypoint& kp) {
    return std::pair{static_cast<long>(kp.col) * s + s / 2, static_cast<long>(kp.row) * s + s / 2};
  };
  for (const auto& m : matches.pairs) {
    auto [c0, r0] = pos(left_keypoints.at(m.i));
    auto [c1, r1] = pos(right_keypoints.at(m.j));
    draw_line(canvas, c0, r0, c1 + shift, r1, {255, 255, 0});
  }
  for (const auto& kp : left_keypoints) {
    auto [c, r] = pos(kp);
    draw_cross(canvas, c, r, std::max(2L, s / 2), {255, 0, 0});
  }
  for (const auto& kp : right_keypoints) {
    auto [c, r] = pos(kp);
    draw_cross(canvas, c + shift, r, std::max(2L, s / 2), {255, 0, 0});
  }
  return canvas;
}

std::vector<Keypoint> extract_patch_keypoints(const Image& patch, std::size_t k, ClusteringMethod method,
                                              const KernelSpec& kernel, double location_weight,
                                              const SolverConfig& solver) {
  PixelGrid grid{patch, location_weight};
  const auto patches = split_patches(grid, 1, 1);
  const Patch& whole = patches.front();
  const Kernel handle = method == ClusteringMethod::kdc ? make_kernel(kernel) : Kernel{};
  const auto result = extract_keypoints(whole.vectors, method, handle,
                                        ClusteringSpec::with_defaults(k, whole.vectors.size()), solver);
  std::vector<Keypoint> keypoints;
  for (std::size_t i : result.indices) {
    keypoints.push_back({whole.pixel_col(i), whole.pixel_row(i), whole.vectors[i], 0, {0}});
  }
  return keypoints;
}

RotationExperimentResult rotated_matching_experiment(const Image& patch, const RotationExperimentConfig& config) {
  if (patch.width() < 3 || patch.height() < 3) throw std::invalid_argument("patch too small for rotation");
  if (config.keypoints == 0 || config.keypoints > patch.width() * patch.height()) {
    throw std::invalid_argument("keypoint count does not fit the patch");
  }
  RotationExperimentResult out;
  out.original = patch;
  out.rotated = rotate_bilinear(patch, config.angle_degrees);
  out.keypoints_original = extract_patch_keypoints(out.original, config.keypoints, config.method,
                                                   config.extraction_kernel, config.location_weight,
                                                   config.extraction_solver);
  out.keypoints_rotated = extract_patch_keypoints(out.rotated, config.keypoints, config.method,
                                                  config.extraction_kernel, config.location_weight,
                                                  config.extraction_solver);
  for (const auto& kp : out.keypoints_original) {
    out.descriptors_original.push_back(compute_descriptor(out.original, kp.col, kp.row, config.descriptor_window));
  }
  for (const auto& kp : out.keypoints_rotated) {
    out.descriptors_rotated.push_back(compute_descriptor(out.rotated, kp.col, kp.row, config.descriptor_window));
  }
  const Kernel cosine = make_cosine_kernel();
  for (double alpha : config.alphas) {
    MatchingSpec spec = config.matching;
    spec.alpha = alpha;
    out.runs.push_back({alpha, match_keypoints(out.descriptors_original, out.descriptors_rotated, cosine, spec,
                                               config.matching_solver)});
  }
  return out;
}

void to_json(nlohmann::json& j, const Keypoint& keypoint) {
  j = nlohmann::json{{"level", keypoint.level},
                     {"col", keypoint.col},
                     {"row", keypoint.row},
                     {"patch_path", keypoint.patch_path}};
}

nlohmann::json keypoints_to_json(const std::vector<Keypoint>& keypoints) {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    nlohmann::json entry = keypoints[i];
    entry["index"] = i;
    arr.push_back(std::move(entry));
  }
  return arr;
}

}  // namespace qkp
