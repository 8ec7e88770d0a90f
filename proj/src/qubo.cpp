#include "qkp/qubo.hpp"

#include <cmath>
#include <stdexcept>

namespace qkp {

QuboProblem::QuboProblem(DenseMatrix quadratic, std::vector<double> linear, double offset)
    : quadratic_(std::move(quadratic)), linear_(std::move(linear)), offset_(offset) {
  const std::size_t n = linear_.size();
  if (n == 0) throw std::invalid_argument("QUBO dimension must be positive");
  if (quadratic_.rows() != n || quadratic_.cols() != n) {
    throw std::invalid_argument("QUBO dimension mismatch: Q is " + std::to_string(quadratic_.rows()) +
                                "x" + std::to_string(quadratic_.cols()) + ", q has length " +
                                std::to_string(n));
  }
  if (!std::isfinite(offset_)) throw std::invalid_argument("QUBO offset is not finite");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(linear_[i])) throw std::invalid_argument("QUBO linear term is not finite");
    for (std::size_t j = i; j < n; ++j) {
      const double a = quadratic_(i, j);
      const double b = quadratic_(j, i);
      if (!std::isfinite(a) || !std::isfinite(b)) {
        throw std::invalid_argument("QUBO quadratic term is not finite");
      }
      if (a != b) {
        const double s = 0.5 * (a + b);
        quadratic_(i, j) = s;
        quadratic_(j, i) = s;
      }
    }
  }
}

std::uint64_t bits_to_index(std::span<const std::uint8_t> bits) {
  if (bits.size() > 64) throw std::invalid_argument("bitstring longer than 64 bits has no index");
  std::uint64_t index = 0;
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j]) index |= std::uint64_t{1} << j;
  }
  return index;
}

Bits index_to_bits(std::uint64_t index, std::size_t dim) {
  Bits bits(dim, 0);
  for (std::size_t j = 0; j < dim && j < 64; ++j) bits[j] = (index >> j) & 1U;
  return bits;
}

double evaluate_energy(const QuboProblem& problem, std::span<const std::uint8_t> bits) {
  const std::size_t n = problem.dim();
  if (bits.size() != n) {
    throw std::invalid_argument("bitstring length " + std::to_string(bits.size()) +
                                " does not match QUBO dimension " + std::to_string(n));
  }
  const auto& Q = problem.quadratic();
  const auto& q = problem.linear();
  double energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!bits[i]) continue;
    energy += q[i];
    const auto row = Q.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (bits[j]) energy += row[j];
    }
  }
  return energy + problem.offset();
}

std::vector<double> hamiltonian_diagonal(const QuboProblem& problem) {
  const std::size_t n = problem.dim();
  if (n > kMaxDiagonalDim) {
    throw std::invalid_argument("hamiltonian_diagonal: dimension " + std::to_string(n) +
                                " exceeds the limit of " + std::to_string(kMaxDiagonalDim));
  }
  const std::uint64_t states = std::uint64_t{1} << n;
  std::vector<double> diagonal(states);
  Bits bits(n, 0);
  for (std::uint64_t index = 0; index < states; ++index) {
    for (std::size_t j = 0; j < n; ++j) bits[j] = (index >> j) & 1U;
    diagonal[index] = evaluate_energy(problem, bits);
  }
  return diagonal;
}

void to_json(nlohmann::json& j, const QuboProblem& problem) {
  const std::size_t n = problem.dim();
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = problem.quadratic().row(i);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j = nlohmann::json{{"dim", n}, {"Q", std::move(rows)}, {"q", problem.linear()},
                     {"offset", problem.offset()}};
}

void from_json(const nlohmann::json& j, QuboProblem& problem) {
  const auto dim = j.at("dim").get<std::size_t>();
  auto rows = j.at("Q").get<std::vector<std::vector<double>>>();
  auto linear = j.at("q").get<std::vector<double>>();
  const double offset = j.contains("offset") ? j.at("offset").get<double>() : 0.0;
  if (rows.size() != dim || linear.size() != dim) {
    throw std::invalid_argument("QUBO JSON: declared dim " + std::to_string(dim) +
                                " disagrees with Q rows " + std::to_string(rows.size()) +
                                " / q length " + std::to_string(linear.size()));
  }
  problem = QuboProblem(DenseMatrix::from_rows(rows), std::move(linear), offset);
}

void to_json(nlohmann::json& j, const BitstringSample& sample) {
  j = nlohmann::json{{"bits", sample.bits},
                     {"energy", sample.energy},
                     {"shot_index", sample.shot_index},
                     {"solver_id", sample.solver_id}};
}

}  // namespace qkp
