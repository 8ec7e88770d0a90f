#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkp/clustering.hpp"
#include "qkp/image.hpp"
#include "qkp/kernels.hpp"
#include "qkp/matching.hpp"
#include "qkp/quantum.hpp"
#include "qkp/solvers.hpp"

namespace qkp {

enum class KernelKind { gaussian, cosine, quantum };

struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  double gaussian_gamma = 1.0;
  // quantum kernel: input scale and shots (0 = exact statevector value)
  double quantum_scale = 1.0;
  std::size_t quantum_qubits = 5;
  std::uint64_t quantum_shots = 0;
  std::uint64_t quantum_seed = 0;
};

Kernel make_kernel(const KernelSpec& spec);
std::string_view to_string(KernelKind kind);
KernelKind kernel_kind_from_string(std::string_view name);

// One clustering stage. At level 0 the grouping is ignored: every image
// patch is clustered. At level L > 0 the cells of level L-1 are tiled into
// groups of group_cols x group_rows cells and each group is clustered.
struct LevelSpec {
  std::size_t group_cols = 1;
  std::size_t group_rows = 1;
  std::size_t k = 10;
  ClusteringMethod method = ClusteringMethod::kmedoids;
  KernelSpec kernel;
  // Unset multipliers resolve to ClusteringSpec::with_defaults(k, n) for the
  // n points of each group.
  std::optional<double> alpha, beta, gamma, lambda;

  ClusteringSpec resolve(std::size_t n) const;
};

struct PipelineConfig {
  std::size_t target_width = 928;
  std::size_t target_height = 704;
  std::size_t grid_cols = 32;
  std::size_t grid_rows = 32;
  double location_weight = 0.25;
  std::vector<LevelSpec> levels = default_levels();
  SolverConfig solver = SolverConfig::preset("digital");
  std::size_t descriptor_window = 9;

  // 1024 patches x 10 -> 64 groups x 20 -> 4 groups x 45 = 180 keypoints.
  static std::vector<LevelSpec> default_levels();

  // Throws ConfigError when grids do not divide or a level is malformed.
  void validate() const;
};

// 5-vector (x, y, r, g, b): positions scaled to [0, 1] by the extent of the
// enclosing region and multiplied by location_weight, colours scaled to
// [0, 1], then L2-normalized. An all-zero vector gets 1e-9 added to blue.
Point pixel_vector(std::size_t local_col, std::size_t local_row, std::size_t region_width, std::size_t region_height,
                   Rgb color, double location_weight);

struct Patch {
  std::size_t index = 0;  // row-major position in the patch grid
  std::size_t origin_col = 0;
  std::size_t origin_row = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  PointSet vectors;  // row-major over the patch's pixels

  std::size_t pixel_col(std::size_t i) const { return origin_col + i % width; }
  std::size_t pixel_row(std::size_t i) const { return origin_row + i / width; }
};

// Pixel grid after downsampling.
struct PixelGrid {
  Image image;
  double location_weight = 0.25;
};

// Decodes the file and area-downsamples it to the configured size.
PixelGrid load_and_preprocess(const std::filesystem::path& path, const PipelineConfig& config);
PixelGrid preprocess(const Image& image, const PipelineConfig& config);

// Non-overlapping patches in row-major order. Right and bottom remainders
// that do not fill a whole patch are dropped.
std::vector<Patch> split_patches(const PixelGrid& grid, std::size_t grid_cols, std::size_t grid_rows);

struct Keypoint {
  std::size_t col = 0;
  std::size_t row = 0;
  Point feature;
  std::size_t level = 0;
  std::vector<std::size_t> patch_path;
};

struct LevelReport {
  std::size_t level = 0;
  std::size_t groups = 0;
  std::size_t group_cols = 0;
  std::size_t group_rows = 0;
  std::size_t keypoints = 0;
  std::size_t repaired_groups = 0;
  std::size_t undersized_groups = 0;  // fewer points than k: everything kept
  double seconds = 0.0;
};

struct ExtractionReport {
  std::vector<Keypoint> keypoints;
  std::vector<LevelReport> levels;
  std::size_t patch_width = 0;
  std::size_t patch_height = 0;
  std::size_t patch_count = 0;
};

ExtractionReport hierarchical_extract(const PixelGrid& grid, const PipelineConfig& config);

// 32-dim gradient orientation histogram: 2x2 spatial cells x 8 orientation
// bins over a window x window neighbourhood of the luminance image, border
// pixels clamped, 1e-9 added to every bin, L2-normalized.
Point compute_descriptor(const Image& image, std::size_t col, std::size_t row, std::size_t window = 9);

Image render_keypoints(const Image& image, const std::vector<Keypoint>& keypoints, std::size_t scale = 1);
Image render_matches(const Image& left, const Image& right, const std::vector<Keypoint>& left_keypoints,
                     const std::vector<Keypoint>& right_keypoints, const MatchSet& matches, std::size_t scale = 8);

struct RotationExperimentConfig {
  double angle_degrees = 20.0;
  std::size_t keypoints = 10;
  std::vector<double> alphas{0.05, 0.2};
  MatchingSpec matching;  // alpha overwritten per run
  ClusteringMethod method = ClusteringMethod::kmedoids;
  KernelSpec extraction_kernel;
  double location_weight = 0.25;
  std::size_t descriptor_window = 9;
  SolverConfig extraction_solver = SolverConfig::preset("digital");
  SolverConfig matching_solver = SolverConfig::preset("tabu");
};

struct AlphaRun {
  double alpha = 0.0;
  MatchingResult result;
};

struct RotationExperimentResult {
  Image original;
  Image rotated;
  std::vector<Keypoint> keypoints_original;
  std::vector<Keypoint> keypoints_rotated;
  PointSet descriptors_original;
  PointSet descriptors_rotated;
  std::vector<AlphaRun> runs;
};

// Extracts keypoints from a single patch treated as one clustering problem.
std::vector<Keypoint> extract_patch_keypoints(const Image& patch, std::size_t k, ClusteringMethod method,
                                              const KernelSpec& kernel, double location_weight,
                                              const SolverConfig& solver);

RotationExperimentResult rotated_matching_experiment(const Image& patch, const RotationExperimentConfig& config);

void to_json(nlohmann::json& j, const Keypoint& keypoint);
nlohmann::json keypoints_to_json(const std::vector<Keypoint>& keypoints);

}  // namespace qkp
