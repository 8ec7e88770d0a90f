#pragma once

#include <vector>

#include <json.hpp>

#include "qkp/kernels.hpp"
#include "qkp/qubo.hpp"
#include "qkp/solvers.hpp"

namespace qkp {

// Matching of n left keypoints to m right keypoints.
//
// Variable layout: z = (v, s_0, ..., s_{n-1}). v holds n*m match indicators in
// row-major order, v[i*m + j] = 1 meaning left i is matched to right j. Each
// s_i is an l-bit slack register (bit a weighs 2^a) turning
// "left i has at most k_max matches" into an equality inside a squared
// penalty.
struct MatchingSpec {
  std::size_t k_max = 1;
  double alpha = 0.2;  // in [0, 1]; larger favours more matches
  double beta = 1.0;   // duplicate-target penalty
  double gamma = 1.0;  // per-left cardinality penalty

  std::size_t slack_bits() const;  // ceil(log2(k_max + 1))
  std::size_t dim(std::size_t n, std::size_t m) const { return n * (m + slack_bits()); }
  void validate() const;
};

inline std::size_t match_variable(std::size_t i, std::size_t j, std::size_t m) { return i * m + j; }
inline std::size_t slack_variable(std::size_t i, std::size_t bit, std::size_t n, std::size_t m, std::size_t l) {
  return n * m + i * l + bit;
}

struct Match {
  std::size_t i = 0;
  std::size_t j = 0;
  double kernel = 0.0;
  bool operator==(const Match&) const = default;
};

struct MatchSet {
  std::vector<Match> pairs;
  std::size_t size() const { return pairs.size(); }
};

struct FeasibilityReport {
  std::vector<std::size_t> duplicate_targets;  // right indices claimed more than once
  std::vector<std::size_t> overfull_sources;   // left indices with more than k_max matches
  std::vector<std::size_t> slack_mismatches;   // left indices with count + slack != k_max

  bool targets_unique() const { return duplicate_targets.empty(); }
  bool within_capacity() const { return overfull_sources.empty(); }
  bool slack_consistent() const { return slack_mismatches.empty(); }
  bool feasible() const { return targets_unique() && within_capacity() && slack_consistent(); }
};

struct DecodedMatching {
  MatchSet matches;
  FeasibilityReport report;
};

QuboProblem build_matching_qubo(const KernelMatrix& kernel, const MatchingSpec& spec);

// `kernel` supplies per-pair kernel values; pass nullptr to leave them 0.
DecodedMatching decode_matching(const BitstringSample& sample, std::size_t n, std::size_t m,
                                const MatchingSpec& spec, const KernelMatrix* kernel = nullptr);

struct MatchingResult {
  DecodedMatching decoded;
  BitstringSample sample;
  KernelMatrix kernel;
};

MatchingResult match_keypoints(const PointSet& descriptors_a, const PointSet& descriptors_b, const Kernel& kernel,
                               const MatchingSpec& spec, const SolverConfig& solver);

void to_json(nlohmann::json& j, const MatchSet& matches);
void to_json(nlohmann::json& j, const FeasibilityReport& report);

}  // namespace qkp
