#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkp/matrix.hpp"

namespace qkp {

using Bits = std::vector<std::uint8_t>;

// Minimize  z^T Q z + <q, z> + offset  over z in {0,1}^N.
//
// Q is stored dense and symmetric; the constructor symmetrizes its input as
// (Q + Q^T) / 2, which leaves every energy unchanged. `offset` carries penalty
// constants so energies stay comparable across formulations; it never moves
// the argmin.
class QuboProblem {
 public:
  QuboProblem() = default;
  QuboProblem(DenseMatrix quadratic, std::vector<double> linear, double offset = 0.0);

  std::size_t dim() const { return linear_.size(); }
  const DenseMatrix& quadratic() const { return quadratic_; }
  const std::vector<double>& linear() const { return linear_; }
  double offset() const { return offset_; }

  bool operator==(const QuboProblem&) const = default;

 private:
  DenseMatrix quadratic_;
  std::vector<double> linear_;
  double offset_ = 0.0;
};

struct BitstringSample {
  Bits bits;
  double energy = 0.0;
  int shot_index = 0;
  std::string solver_id;
};

// Integer value of a bitstring with bit j weighted by 2^j. This ordering is
// shared by hamiltonian_diagonal and the exhaustive solver's tie-break.
std::uint64_t bits_to_index(std::span<const std::uint8_t> bits);
Bits index_to_bits(std::uint64_t index, std::size_t dim);

double evaluate_energy(const QuboProblem& problem, std::span<const std::uint8_t> bits);

inline constexpr std::size_t kMaxDiagonalDim = 20;

// Diagonal of H_Q in the computational basis; entry i is the energy of the
// bitstring index_to_bits(i, dim).
std::vector<double> hamiltonian_diagonal(const QuboProblem& problem);

void to_json(nlohmann::json& j, const QuboProblem& problem);
void from_json(const nlohmann::json& j, QuboProblem& problem);
void to_json(nlohmann::json& j, const BitstringSample& sample);

}  // namespace qkp
