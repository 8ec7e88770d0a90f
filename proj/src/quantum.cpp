#include "qkp/quantum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace qkp::quantum {
namespace {

void require_qubit(const Statevector& state, std::size_t qubit) {
  if (qubit >= state.num_qubits()) {
    throw std::out_of_range("qubit index " + std::to_string(qubit) + " out of range for " +
                            std::to_string(state.num_qubits()) + "-qubit state");
  }
}

void require_qubit_count(std::size_t n) {
  if (n == 0) throw std::invalid_argument("statevector needs at least one qubit");
  if (n > kMaxQubits) {
    throw std::invalid_argument("statevector of " + std::to_string(n) + " qubits exceeds the limit of " +
                                std::to_string(kMaxQubits));
  }
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer over the running hash
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

}  // namespace

Statevector Statevector::zero(std::size_t num_qubits) { return basis(num_qubits, 0); }

Statevector Statevector::basis(std::size_t num_qubits, std::uint64_t index) {
  require_qubit_count(num_qubits);
  const std::size_t dim = std::size_t{1} << num_qubits;
  if (index >= dim) throw std::out_of_range("basis index out of range");
  std::vector<Amplitude> amps(dim);
  amps[index] = 1.0;
  return Statevector(num_qubits, std::move(amps));
}

Statevector Statevector::from_amplitudes(std::vector<Amplitude> amplitudes) {
  const std::size_t dim = amplitudes.size();
  if (dim < 2 || !std::has_single_bit(dim)) {
    throw std::invalid_argument("amplitude vector length must be a power of two >= 2");
  }
  const auto n = static_cast<std::size_t>(std::countr_zero(dim));
  require_qubit_count(n);
  Statevector s(n, std::move(amplitudes));
  if (std::abs(s.norm() - 1.0) > 1e-10) throw std::invalid_argument("amplitudes are not normalized");
  return s;
}

double Statevector::norm() const {
  double total = 0.0;
  for (const auto& a : amplitudes_) total += std::norm(a);
  return std::sqrt(total);
}

Amplitude inner_product(const Statevector& a, const Statevector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("inner_product: statevector sizes differ");
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

void apply_hadamard(Statevector& state, std::size_t qubit) {
  require_qubit(state, qubit);
  const std::size_t bit = std::size_t{1} << qubit;
  const double h = std::numbers::sqrt2 / 2.0;
  auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & bit) continue;
    const Amplitude a = amps[i];
    const Amplitude b = amps[i | bit];
    amps[i] = h * (a + b);
    amps[i | bit] = h * (a - b);
  }
}

void apply_hadamard_all(Statevector& state) {
  for (std::size_t q = 0; q < state.num_qubits(); ++q) apply_hadamard(state, q);
}

void apply_x(Statevector& state, std::size_t qubit) {
  const std::size_t none[1] = {};
  apply_multi_controlled_x(state, std::span<const std::size_t>(none, 0), qubit);
}

void apply_multi_controlled_x(Statevector& state, std::span<const std::size_t> controls, std::size_t target) {
  require_qubit(state, target);
  std::size_t mask = 0;
  for (std::size_t c : controls) {
    require_qubit(state, c);
    if (c == target) throw std::invalid_argument("control qubit equals target");
    mask |= std::size_t{1} << c;
  }
  const std::size_t bit = std::size_t{1} << target;
  auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & bit) == 0 && (i & mask) == mask) std::swap(amps[i], amps[i | bit]);
  }
}

void apply_controlled_swap(Statevector& state, std::size_t control, std::size_t a, std::size_t b) {
  require_qubit(state, control);
  require_qubit(state, a);
  require_qubit(state, b);
  if (control == a || control == b || a == b) throw std::invalid_argument("controlled swap needs three distinct qubits");
  const std::size_t cbit = std::size_t{1} << control;
  const std::size_t abit = std::size_t{1} << a;
  const std::size_t bbit = std::size_t{1} << b;
  auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    // visit each (a=1, b=0) <-> (a=0, b=1) pair once
    if ((i & cbit) && (i & abit) && !(i & bbit)) std::swap(amps[i], amps[(i & ~abit) | bbit]);
  }
}

void FeatureMapSpec::validate() const {
  require_qubit_count(num_qubits);
  if (!(input_scale >= 0.0) || !std::isfinite(input_scale)) {
    throw std::invalid_argument("feature map input_scale must be finite and non-negative");
  }
  if (!phi_single || (!pairs.empty() && !phi_pair)) {
    throw std::invalid_argument("feature map functions are not set");
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto [i, j] : pairs) {
    if (i >= num_qubits || j >= num_qubits || i == j) {
      throw std::invalid_argument("feature map pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") is invalid for " + std::to_string(num_qubits) + " qubits");
    }
    if (!seen.insert(std::minmax(i, j)).second) throw std::invalid_argument("duplicate feature map pair");
  }
}

FeatureMapSpec default_feature_map(std::size_t num_qubits, double input_scale) {
  FeatureMapSpec spec;
  spec.num_qubits = num_qubits;
  for (std::size_t i = 0; i < num_qubits; ++i) {
    for (std::size_t j = i + 1; j < num_qubits; ++j) spec.pairs.emplace_back(i, j);
  }
  spec.phi_single = [](std::span<const double> x, std::size_t i) { return x[i]; };
  spec.phi_pair = [](std::span<const double> x, std::size_t i, std::size_t j) {
    return (std::numbers::pi - x[i]) * (std::numbers::pi - x[j]);
  };
  spec.input_scale = input_scale;
  return spec;
}

double feature_phase(std::uint64_t b, std::span<const double> x, const FeatureMapSpec& spec) {
  auto z = [b](std::size_t q) { return ((b >> q) & 1U) ? -1.0 : 1.0; };
  double theta = 0.0;
  for (std::size_t i = 0; i < spec.num_qubits; ++i) theta += spec.phi_single(x, i) * z(i);
  for (auto [i, j] : spec.pairs) theta += spec.phi_pair(x, i, j) * z(i) * z(j);
  return theta;
}

void apply_feature_unitary(Statevector& state, std::span<const double> x, const FeatureMapSpec& spec,
                           bool conjugate) {
  if (state.num_qubits() != spec.num_qubits) {
    throw std::invalid_argument("feature unitary: state has " + std::to_string(state.num_qubits()) +
                                " qubits, feature map expects " + std::to_string(spec.num_qubits));
  }
  if (x.size() < spec.num_qubits) {
    throw std::invalid_argument("feature unitary: data vector of length " + std::to_string(x.size()) +
                                " is shorter than the qubit count " + std::to_string(spec.num_qubits));
  }
  std::vector<double> scaled(x.begin(), x.end());
  for (auto& v : scaled) v *= spec.input_scale;

  // theta(b) only depends on the sign pattern, so phases are computed per
  // basis state once.
  const double sign = conjugate ? 1.0 : -1.0;
  auto amps = state.amplitudes();
  for (std::size_t b = 0; b < amps.size(); ++b) {
    const double theta = feature_phase(b, scaled, spec);
    amps[b] *= std::polar(1.0, sign * theta);
  }
}

Statevector encode(std::span<const double> x, const FeatureMapSpec& spec) {
  spec.validate();
  Statevector state = Statevector::zero(spec.num_qubits);
  apply_hadamard_all(state);
  apply_feature_unitary(state, x, spec);
  apply_hadamard_all(state);
  apply_feature_unitary(state, x, spec);
  return state;
}

Statevector kernel_circuit_state(std::span<const double> x, std::span<const double> y,
                                 const FeatureMapSpec& spec) {
  Statevector state = encode(x, spec);
  apply_feature_unitary(state, y, spec, true);
  apply_hadamard_all(state);
  apply_feature_unitary(state, y, spec, true);
  apply_hadamard_all(state);
  return state;
}

std::vector<std::uint64_t> sample_counts(const Statevector& state, std::uint64_t shots, std::uint64_t seed) {
  std::vector<double> cdf(state.size());
  double running = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    running += state.probability(i);
    cdf[i] = running;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, running);
  std::vector<std::uint64_t> counts(state.size(), 0);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = uniform(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return counts;
}

double quantum_kernel_value(std::span<const double> x, std::span<const double> y, const FeatureMapSpec& spec,
                            std::optional<ShotOptions> shots) {
  if (x.size() != y.size()) throw std::invalid_argument("quantum kernel: input dimensions differ");
  if (shots) {
    if (shots->shots < 1) throw std::invalid_argument("quantum kernel: shots must be >= 1");
    const Statevector state = kernel_circuit_state(x, y, spec);
    const auto counts = sample_counts(state, shots->shots, shots->seed);
    return static_cast<double>(counts[0]) / static_cast<double>(shots->shots);
  }
  // <0|U^dag(y) U(x)|0> = <encode(y)|encode(x)>; normalizing by both norms
  // makes identical encodings give exactly 1.
  const Statevector ex = encode(x, spec);
  const Statevector ey = encode(y, spec);
  const Amplitude overlap = inner_product(ey, ex);
  const double nx = inner_product(ex, ex).real();
  const double ny = inner_product(ey, ey).real();
  const double value = std::norm(overlap) / (nx * ny);
  return std::clamp(value, 0.0, 1.0);
}

Kernel make_quantum_kernel(FeatureMapSpec spec, std::optional<ShotOptions> shots) {
  spec.validate();
  return {[spec = std::move(spec), shots](std::span<const double> x, std::span<const double> y) {
            if (!shots) return quantum_kernel_value(x, y, spec);
            std::uint64_t h = shots->seed;
            for (double v : x) h = mix(h, std::bit_cast<std::uint64_t>(v));
            for (double v : y) h = mix(h, std::bit_cast<std::uint64_t>(v));
            return quantum_kernel_value(x, y, spec, ShotOptions{shots->shots, h});
          },
          true};
}

double swap_test_probability(const Statevector& x_state, const Statevector& y_state) {
  const std::size_t n = x_state.num_qubits();
  if (y_state.num_qubits() != n) {
    throw std::invalid_argument("swap test: register sizes differ (" + std::to_string(n) + " vs " +
                                std::to_string(y_state.num_qubits()) + ")");
  }
  const std::size_t total = 1 + 2 * n;
  require_qubit_count(total);
  // qubit 0: ancilla, qubits 1..n: x register, qubits n+1..2n: y register
  std::vector<Amplitude> amps(std::size_t{1} << total);
  for (std::size_t ix = 0; ix < x_state.size(); ++ix) {
    for (std::size_t iy = 0; iy < y_state.size(); ++iy) {
      amps[(ix << 1) | (iy << (n + 1))] = x_state[ix] * y_state[iy];
    }
  }
  Statevector state = Statevector::from_amplitudes(std::move(amps));
  apply_hadamard(state, 0);
  for (std::size_t k = 0; k < n; ++k) apply_controlled_swap(state, 0, 1 + k, 1 + n + k);
  apply_hadamard(state, 0);
  double p0 = 0.0;
  for (std::size_t i = 0; i < state.size(); i += 2) p0 += state.probability(i);
  return p0;
}

void increment_register(Statevector& state, std::span<const std::size_t> register_qubits) {
  const std::size_t n = state.num_qubits();
  std::set<std::size_t> distinct;
  for (std::size_t q : register_qubits) {
    if (q >= n) throw std::out_of_range("register qubit " + std::to_string(q) + " out of range");
    if (!distinct.insert(q).second) throw std::invalid_argument("register qubits must be distinct");
  }
  if (register_qubits.empty()) return;
  require_qubit_count(n + 1);

  // Append the ancilla as the highest qubit, prepared in |1>.
  const std::size_t ancilla = n;
  const std::size_t half = state.size();
  std::vector<Amplitude> extended(2 * half);
  std::copy(state.amplitudes().begin(), state.amplitudes().end(), extended.begin() + static_cast<std::ptrdiff_t>(half));
  Statevector work = Statevector::from_amplitudes(std::move(extended));

  // Highest bit first: q_i flips iff the ancilla and q_0..q_{i-1} are all 1.
  std::vector<std::size_t> controls{ancilla};
  controls.insert(controls.end(), register_qubits.begin(), register_qubits.end());
  for (std::size_t i = register_qubits.size(); i-- > 0;) {
    apply_multi_controlled_x(work, std::span<const std::size_t>(controls.data(), i + 1), register_qubits[i]);
  }

  auto out = state.amplitudes();
  const auto amps = work.amplitudes();
  for (std::size_t b = 0; b < half; ++b) {
    if (amps[b] != Amplitude{}) throw std::logic_error("incrementer left the ancilla entangled");
    out[b] = amps[half + b];
  }
}

}  // namespace qkp::quantum
