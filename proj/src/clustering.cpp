#include "qkp/clustering.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qkp/errors.hpp"

namespace qkp {

std::string_view to_string(ClusteringMethod method) {
  return method == ClusteringMethod::kmedoids ? "kmedoids" : "kdc";
}

ClusteringMethod clustering_method_from_string(std::string_view name) {
  if (name == "kmedoids") return ClusteringMethod::kmedoids;
  if (name == "kdc") return ClusteringMethod::kdc;
  throw ConfigError("unknown clustering method '" + std::string(name) + "'");
}

ClusteringSpec ClusteringSpec::with_defaults(std::size_t k, std::size_t n) {
  if (k == 0 || n == 0) throw std::invalid_argument("clustering defaults need k > 0 and n > 0");
  const double kd = static_cast<double>(k);
  return {k, 1.0 / kd, 1.0 / static_cast<double>(n), 1.0 / kd, 1.0 / (kd * kd)};
}

void ClusteringSpec::validate(std::size_t n) const {
  if (k == 0) throw std::invalid_argument("clustering k must be positive");
  if (k > n) {
    throw std::invalid_argument("clustering k = " + std::to_string(k) + " exceeds the number of points " +
                                std::to_string(n));
  }
  for (double m : {alpha, beta, gamma, lambda}) {
    if (!std::isfinite(m) || m < 0.0) throw std::invalid_argument("clustering multipliers must be finite and >= 0");
  }
}

QuboProblem build_kmedoids_qubo(const DistanceMatrix& distances, const ClusteringSpec& spec) {
  const std::size_t n = distances.size();
  spec.validate(n);
  const auto& D = distances.entries;
  const double k = static_cast<double>(spec.k);
  DenseMatrix Q(n, n);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      Q(i, j) = spec.gamma - spec.alpha * D(i, j);
      row_sum += D(i, j);
    }
    q[i] = spec.beta * row_sum - 2.0 * spec.gamma * k;
  }
  return {std::move(Q), std::move(q), spec.gamma * k * k};
}

QuboProblem build_kdc_qubo(const KernelMatrix& kernel, const ClusteringSpec& spec) {
  const std::size_t n = kernel.rows();
  if (kernel.cols() != n) throw std::invalid_argument("KDC needs a square kernel matrix");
  const auto& K = kernel.entries;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (K(i, j) != K(j, i)) throw std::invalid_argument("KDC needs a symmetric kernel matrix");
    }
  }
  spec.validate(n);
  const double k = static_cast<double>(spec.k);
  const double nd = static_cast<double>(n);
  DenseMatrix Q(n, n);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      Q(i, j) = K(i, j) / (k * k) + spec.lambda;
      row_sum += K(i, j);
    }
    q[i] = -2.0 * (row_sum / (k * nd) + spec.lambda * k);
  }
  return {std::move(Q), std::move(q), spec.lambda * k * k};
}

std::vector<std::size_t> decode_selection(const BitstringSample& sample) {
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < sample.bits.size(); ++i) {
    if (sample.bits[i]) indices.push_back(i);
  }
  return indices;
}

bool repair_selection(const QuboProblem& problem, Bits& bits, std::size_t k) {
  const std::size_t n = problem.dim();
  if (bits.size() != n) throw std::invalid_argument("repair_selection: bitstring length mismatch");
  if (k > n) throw std::invalid_argument("repair_selection: k exceeds dimension");
  const auto& Q = problem.quadratic();

  // field_i = q_i + 2 sum_{j != i} Q_ij z_j; flipping i changes the energy by
  // (1 - 2 z_i)(Q_ii + field_i).
  std::vector<double> field(problem.linear());
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!bits[j]) continue;
    ++count;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) field[i] += 2.0 * Q(i, j);
    }
  }
  bool changed = false;
  while (count != k) {
    const std::uint8_t from = count > k ? 1 : 0;
    std::size_t pick = n;
    double pick_delta = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (bits[i] != from) continue;
      const double d = (from ? -1.0 : 1.0) * (Q(i, i) + field[i]);
      if (d < pick_delta) {
        pick = i;
        pick_delta = d;
      }
    }
    const double sign = from ? -2.0 : 2.0;
    bits[pick] ^= 1U;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != pick) field[j] += sign * Q(j, pick);
    }
    count = from ? count - 1 : count + 1;
    changed = true;
  }
  return changed;
}

QuboProblem build_clustering_qubo(const PointSet& points, ClusteringMethod method, const Kernel& kernel,
                                  const ClusteringSpec& spec) {
  if (method == ClusteringMethod::kmedoids) return build_kmedoids_qubo(build_distance_matrix(points), spec);
  return build_kdc_qubo(build_kernel_matrix(points, kernel), spec);
}

ExtractionResult extract_keypoints(const PointSet& points, ClusteringMethod method, const Kernel& kernel,
                                   const ClusteringSpec& spec, const SolverConfig& solver) {
  spec.validate(points.size());
  const QuboProblem problem = build_clustering_qubo(points, method, kernel, spec);
  const SolveResult result = solve(problem, solver);
  ExtractionResult out;
  out.sample = result.best;
  out.repaired = repair_selection(problem, out.sample.bits, spec.k);
  if (out.repaired) out.sample.energy = evaluate_energy(problem, out.sample.bits);
  out.indices = decode_selection(out.sample);
  return out;
}

}  // namespace qkp
