#pragma once

#include <string_view>
#include <vector>

#include "qkp/kernels.hpp"
#include "qkp/qubo.hpp"
#include "qkp/solvers.hpp"

namespace qkp {

enum class ClusteringMethod { kmedoids, kdc };

std::string_view to_string(ClusteringMethod method);
ClusteringMethod clustering_method_from_string(std::string_view name);

// Penalty weights for the clustering QUBOs. alpha rewards spread between
// selected medoids, beta penalizes distance to all points, gamma enforces the
// cardinality k for k-medoids; lambda enforces it for kernel density
// clustering.
struct ClusteringSpec {
  std::size_t k = 1;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double lambda = 1.0;

  // alpha = 1/k, beta = 1/n, gamma = 1/k, lambda = 1/k^2
  static ClusteringSpec with_defaults(std::size_t k, std::size_t n);

  void validate(std::size_t n) const;
};

// Q = gamma 11^T - alpha D, q = beta D 1 - 2 gamma k 1, offset gamma k^2.
// Distances are used unsquared.
QuboProblem build_kmedoids_qubo(const DistanceMatrix& distances, const ClusteringSpec& spec);

// Q = K / k^2 + lambda 11^T, q = -2 (K 1 / (k n) + lambda k 1), offset
// lambda k^2, with n the number of points.
QuboProblem build_kdc_qubo(const KernelMatrix& kernel, const ClusteringSpec& spec);

// Indices of set bits, ascending.
std::vector<std::size_t> decode_selection(const BitstringSample& sample);

// Forces exactly k set bits. Surplus bits are dropped one at a time choosing
// the removal with the lowest resulting energy; missing bits are added the
// same way. Ties go to the smallest index. Returns true when bits changed.
bool repair_selection(const QuboProblem& problem, Bits& bits, std::size_t k);

struct ExtractionResult {
  std::vector<std::size_t> indices;
  bool repaired = false;
  BitstringSample sample;  // after repair, energy re-evaluated
};

// Builds the distance (k-medoids) or kernel (KDC) matrix, compiles the QUBO,
// solves it and decodes the selection. `kernel` is only used for KDC.
ExtractionResult extract_keypoints(const PointSet& points, ClusteringMethod method, const Kernel& kernel,
                                   const ClusteringSpec& spec, const SolverConfig& solver);

QuboProblem build_clustering_qubo(const PointSet& points, ClusteringMethod method, const Kernel& kernel,
                                  const ClusteringSpec& spec);

}  // namespace qkp
