#include "qkp/matching.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qkp {

std::size_t MatchingSpec::slack_bits() const {
  std::size_t l = 0;
  while ((std::size_t{1} << l) < k_max + 1) ++l;
  return l;
}

void MatchingSpec::validate() const {
  if (k_max == 0) throw std::invalid_argument("matching k_max must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("matching alpha must lie in [0, 1]");
  if (!(beta >= 0.0) || !(gamma >= 0.0) || !std::isfinite(beta) || !std::isfinite(gamma)) {
    throw std::invalid_argument("matching beta and gamma must be finite and non-negative");
  }
}

QuboProblem build_matching_qubo(const KernelMatrix& kernel, const MatchingSpec& spec) {
  spec.validate();
  const std::size_t n = kernel.rows();
  const std::size_t m = kernel.cols();
  if (n == 0 || m == 0) throw std::invalid_argument("matching needs non-empty keypoint sets");
  const auto& K = kernel.entries;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!(K(i, j) >= 0.0 && K(i, j) <= 1.0)) {
        throw std::invalid_argument("kernel value at (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") lies outside [0, 1]; the matching formulation assumes 0 <= K <= 1");
      }
    }
  }
  const std::size_t l = spec.slack_bits();
  const std::size_t N = spec.dim(n, m);
  const double k = static_cast<double>(spec.k_max);
  DenseMatrix Q(N, N);
  std::vector<double> q(N, 0.0);

  // Match cost (1 - alpha) - K_ij.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) q[match_variable(i, j, m)] = (1.0 - spec.alpha) - K(i, j);
  }

  // beta * sum_i v^T S_i v: couples every two distinct left points on the same
  // right point.
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i1 = 0; i1 < n; ++i1) {
      for (std::size_t i2 = 0; i2 < n; ++i2) {
        if (i1 != i2) Q(match_variable(i1, j, m), match_variable(i2, j, m)) += spec.beta;
      }
    }
  }

  // gamma * sum_i (w_i^T z - k)^2 with w_i = indicator of row i of v plus the
  // binary weights of s_i.
  std::vector<std::pair<std::size_t, double>> weights;
  for (std::size_t i = 0; i < n; ++i) {
    weights.clear();
    for (std::size_t j = 0; j < m; ++j) weights.emplace_back(match_variable(i, j, m), 1.0);
    for (std::size_t a = 0; a < l; ++a) {
      weights.emplace_back(slack_variable(i, a, n, m, l), static_cast<double>(std::size_t{1} << a));
    }
    for (auto [p, wp] : weights) {
      for (auto [r, wr] : weights) Q(p, r) += spec.gamma * wp * wr;
      q[p] -= 2.0 * spec.gamma * k * wp;
    }
  }
  const double offset = spec.gamma * static_cast<double>(n) * k * k;
  return {std::move(Q), std::move(q), offset};
}

DecodedMatching decode_matching(const BitstringSample& sample, std::size_t n, std::size_t m,
                                const MatchingSpec& spec, const KernelMatrix* kernel) {
  const std::size_t l = spec.slack_bits();
  if (sample.bits.size() != spec.dim(n, m)) {
    throw std::invalid_argument("decode_matching: sample has " + std::to_string(sample.bits.size()) +
                                " bits, expected " + std::to_string(spec.dim(n, m)));
  }
  if (kernel && (kernel->rows() != n || kernel->cols() != m)) {
    throw std::invalid_argument("decode_matching: kernel matrix shape mismatch");
  }
  DecodedMatching out;
  std::vector<std::size_t> per_target(m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!sample.bits[match_variable(i, j, m)]) continue;
      out.matches.pairs.push_back({i, j, kernel ? kernel->entries(i, j) : 0.0});
      ++count;
      ++per_target[j];
    }
    std::size_t slack = 0;
    for (std::size_t a = 0; a < l; ++a) {
      if (sample.bits[slack_variable(i, a, n, m, l)]) slack += std::size_t{1} << a;
    }
    if (count > spec.k_max) out.report.overfull_sources.push_back(i);
    if (count + slack != spec.k_max) out.report.slack_mismatches.push_back(i);
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (per_target[j] > 1) out.report.duplicate_targets.push_back(j);
  }
  return out;
}

MatchingResult match_keypoints(const PointSet& descriptors_a, const PointSet& descriptors_b, const Kernel& kernel,
                               const MatchingSpec& spec, const SolverConfig& solver) {
  if (descriptors_a.empty() || descriptors_b.empty()) {
    throw std::invalid_argument("match_keypoints: descriptor lists must be non-empty");
  }
  MatchingResult result;
  result.kernel = build_kernel_matrix(descriptors_a, descriptors_b, kernel);
  const QuboProblem problem = build_matching_qubo(result.kernel, spec);
  result.sample = solve(problem, solver).best;
  result.decoded = decode_matching(result.sample, descriptors_a.size(), descriptors_b.size(), spec, &result.kernel);
  return result;
}

void to_json(nlohmann::json& j, const MatchSet& matches) {
  j = nlohmann::json::array();
  for (const auto& p : matches.pairs) j.push_back({{"i", p.i}, {"j", p.j}, {"kernel", p.kernel}});
}

void to_json(nlohmann::json& j, const FeasibilityReport& report) {
  j = nlohmann::json{{"feasible", report.feasible()},
                     {"duplicate_targets", report.duplicate_targets},
                     {"overfull_sources", report.overfull_sources},
                     {"slack_mismatches", report.slack_mismatches}};
}

}  // namespace qkp
