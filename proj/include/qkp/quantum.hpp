#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qkp/kernels.hpp"

namespace qkp::quantum {

using Amplitude = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 20;

// Basis index bit q holds the state of qubit q.
class Statevector {
 public:
  static Statevector zero(std::size_t num_qubits);
  static Statevector basis(std::size_t num_qubits, std::uint64_t index);
  // Throws unless the length is a power of two and the norm is 1 within 1e-10.
  static Statevector from_amplitudes(std::vector<Amplitude> amplitudes);

  std::size_t num_qubits() const { return num_qubits_; }
  std::size_t size() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  std::span<Amplitude> amplitudes() { return amplitudes_; }
  const Amplitude& operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm() const;
  double probability(std::uint64_t index) const { return std::norm(amplitudes_[index]); }

 private:
  Statevector(std::size_t num_qubits, std::vector<Amplitude> amplitudes)
      : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {}
  std::size_t num_qubits_ = 0;
  std::vector<Amplitude> amplitudes_;
};

// <a|b>
Amplitude inner_product(const Statevector& a, const Statevector& b);

void apply_hadamard(Statevector& state, std::size_t qubit);
void apply_hadamard_all(Statevector& state);
void apply_x(Statevector& state, std::size_t qubit);
// X on `target` when every control qubit is |1>.
void apply_multi_controlled_x(Statevector& state, std::span<const std::size_t> controls, std::size_t target);
void apply_controlled_swap(Statevector& state, std::size_t control, std::size_t a, std::size_t b);

// Diagonal feature map exp(-i sum_S phi_S(x) prod_{v in S} Z_v) restricted
// to singletons and the listed qubit pairs.
struct FeatureMapSpec {
  std::size_t num_qubits = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::function<double(std::span<const double>, std::size_t)> phi_single;
  std::function<double(std::span<const double>, std::size_t, std::size_t)> phi_pair;
  // Inputs are rescaled as x <- input_scale * x before the feature functions.
  double input_scale = 1.0;

  // Throws std::invalid_argument on out-of-range or duplicate pairs.
  void validate() const;
};

// phi_i(x) = x_i, phi_ij(x) = (pi - x_i)(pi - x_j), all pairs over num_qubits.
FeatureMapSpec default_feature_map(std::size_t num_qubits, double input_scale = 1.0);

// Phase angle theta(b) of basis state b for data x (already scaled).
double feature_phase(std::uint64_t basis_index, std::span<const double> scaled_x, const FeatureMapSpec& spec);

// Multiplies amplitude b by exp(-i theta(b)), or exp(+i theta(b)) when
// `conjugate` is set.
void apply_feature_unitary(Statevector& state, std::span<const double> x, const FeatureMapSpec& spec,
                           bool conjugate = false);

// U_phi(x) H U_phi(x) H |0...0>
Statevector encode(std::span<const double> x, const FeatureMapSpec& spec);

// The full kernel circuit: encode(x) followed by the adjoint encoding of y.
// The kernel value is the probability of the all-zeros outcome.
Statevector kernel_circuit_state(std::span<const double> x, std::span<const double> y,
                                 const FeatureMapSpec& spec);

struct ShotOptions {
  std::uint64_t shots = 10000;
  std::uint64_t seed = 0;
};

// Outcome counts for `shots` measurements in the computational basis, drawn by
// inverse-CDF sampling.
std::vector<std::uint64_t> sample_counts(const Statevector& state, std::uint64_t shots, std::uint64_t seed);

// |<0| U^dag(y) U(x) |0>|^2. Without shot options the exact value is returned;
// with them, the fraction of all-zeros outcomes.
double quantum_kernel_value(std::span<const double> x, std::span<const double> y, const FeatureMapSpec& spec,
                            std::optional<ShotOptions> shots = std::nullopt);

// Kernel handle for build_kernel_matrix. In shot mode each entry uses a seed
// derived from the base seed and the two input vectors.
Kernel make_quantum_kernel(FeatureMapSpec spec, std::optional<ShotOptions> shots = std::nullopt);

// Exact ancilla-zero probability of the swap-test circuit on |0>|x>|y>.
double swap_test_probability(const Statevector& x_state, const Statevector& y_state);

// Adds one (mod 2^n) to the integer held in `register_qubits`, least
// significant qubit first, using a cascade of multi-controlled NOTs driven by
// an ancilla prepared in |1>.
void increment_register(Statevector& state, std::span<const std::size_t> register_qubits);

}  // namespace qkp::quantum
