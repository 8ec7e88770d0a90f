#include "qkp/solvers.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "qkp/errors.hpp"
#include "qkp/parallel.hpp"

namespace qkp {
namespace {

using Clock = std::chrono::steady_clock;

// Local fields f_i = q_i + 2 * sum_{j != i} Q_ij z_j. Flipping bit i changes
// the energy by (1 - 2 z_i) * (Q_ii + f_i).
class FlipState {
 public:
  FlipState(const QuboProblem& problem, Bits bits)
      : problem_(problem), bits_(std::move(bits)), field_(problem.linear()) {
    const auto& Q = problem_.quadratic();
    const std::size_t n = bits_.size();
    for (std::size_t j = 0; j < n; ++j) {
      if (!bits_[j]) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != j) field_[i] += 2.0 * Q(i, j);
      }
    }
    energy_ = evaluate_energy(problem_, bits_);
  }

  double delta(std::size_t i) const {
    const double d = problem_.quadratic()(i, i) + field_[i];
    return bits_[i] ? -d : d;
  }

  void flip(std::size_t i) {
    energy_ += delta(i);
    const double sign = bits_[i] ? -2.0 : 2.0;
    bits_[i] ^= 1U;
    const auto row = problem_.quadratic().row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j != i) field_[j] += sign * row[j];
    }
  }

  const Bits& bits() const { return bits_; }
  double energy() const { return energy_; }
  std::size_t size() const { return bits_.size(); }

 private:
  const QuboProblem& problem_;
  Bits bits_;
  std::vector<double> field_;
  double energy_ = 0.0;
};

Bits random_bits(std::size_t n, std::mt19937_64& rng) {
  Bits bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
  return bits;
}

std::pair<double, double> automatic_temperatures(const QuboProblem& problem) {
  const auto& Q = problem.quadratic();
  const auto& q = problem.linear();
  const std::size_t n = problem.dim();
  double max_delta = 0.0;
  double min_delta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double diag = std::abs(Q(i, i) + q[i]);
    double total = diag;
    if (diag > 0.0) min_delta = std::min(min_delta, diag);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = 2.0 * std::abs(Q(i, j));
      total += c;
      if (c > 0.0) min_delta = std::min(min_delta, c);
    }
    max_delta = std::max(max_delta, total);
  }
  if (max_delta == 0.0) return {1.0, 0.5};
  const double hot = max_delta / std::log(2.0);
  double cold = min_delta / std::log(100.0);
  if (!(cold < hot)) cold = hot * 1e-3;
  return {hot, cold};
}

SolveResult collect(std::vector<BitstringSample> samples, std::vector<double> seconds) {
  SolveResult result;
  std::size_t best = 0;
  for (std::size_t s = 1; s < samples.size(); ++s) {
    if (samples[s].energy < samples[best].energy) best = s;
  }
  result.best = samples[best];
  result.all_samples = std::move(samples);
  result.shot_seconds = std::move(seconds);
  return result;
}

BitstringSample anneal_shot(const QuboProblem& problem, const SolverConfig& config, int shot,
                            double t_initial, double t_final) {
  std::mt19937_64 rng(config.seed ^ static_cast<std::uint64_t>(shot));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const std::size_t n = problem.dim();
  FlipState state(problem, random_bits(n, rng));
  Bits best_bits = state.bits();
  double best_energy = state.energy();

  const int sweeps = config.sa_sweeps;
  const double ratio = sweeps > 1 ? std::pow(t_final / t_initial, 1.0 / (sweeps - 1)) : 1.0;
  double temperature = sweeps > 1 ? t_initial : t_final;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    const double beta = 1.0 / temperature;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = state.delta(i);
      if (d <= 0.0 || uniform(rng) < std::exp(-d * beta)) {
        state.flip(i);
        if (state.energy() < best_energy) {
          best_energy = state.energy();
          best_bits = state.bits();
        }
      }
    }
    temperature *= ratio;
  }
  BitstringSample sample;
  sample.energy = evaluate_energy(problem, best_bits);
  sample.bits = std::move(best_bits);
  sample.shot_index = shot;
  sample.solver_id = "simulated_annealing";
  return sample;
}

BitstringSample tabu_shot(const QuboProblem& problem, const SolverConfig& config, int shot) {
  std::mt19937_64 rng(config.seed ^ static_cast<std::uint64_t>(shot));
  const std::size_t n = problem.dim();
  FlipState state(problem, random_bits(n, rng));
  Bits best_bits = state.bits();
  double best_energy = state.energy();

  const long tenure = std::min<long>(config.tabu_tenure, static_cast<long>(n) - 1);
  std::vector<long> tabu_until(n, -1);
  int stale = 0;
  // Incremental energies drift; a cycle must not count as progress.
  auto improves = [&](double e) { return e < best_energy - 1e-12 * (1.0 + std::abs(best_energy)); };
  for (long iteration = 0; stale < config.tabu_iterations; ++iteration) {
    std::size_t move = n;
    double move_delta = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = state.delta(i);
      const bool tabu = tabu_until[i] >= iteration;
      const bool aspirates = improves(state.energy() + d);
      if ((!tabu || aspirates) && d < move_delta) {
        move = i;
        move_delta = d;
      }
    }
    if (move == n) {
      // Every move is tabu; release the one that expires first.
      move = static_cast<std::size_t>(
          std::min_element(tabu_until.begin(), tabu_until.end()) - tabu_until.begin());
    }
    state.flip(move);
    tabu_until[move] = iteration + tenure;
    if (improves(state.energy())) {
      best_energy = state.energy();
      best_bits = state.bits();
      stale = 0;
    } else {
      ++stale;
    }
  }
  BitstringSample sample;
  sample.energy = evaluate_energy(problem, best_bits);
  sample.bits = std::move(best_bits);
  sample.shot_index = shot;
  sample.solver_id = "tabu";
  return sample;
}

template <typename ShotFn>
SolveResult run_shots(const SolverConfig& config, ShotFn&& shot_fn) {
  const auto shots = static_cast<std::size_t>(config.shots);
  std::vector<BitstringSample> samples(shots);
  std::vector<double> seconds(shots);
  parallel_for(shots, [&](std::size_t s) {
    const auto start = Clock::now();
    samples[s] = shot_fn(static_cast<int>(s));
    seconds[s] = std::chrono::duration<double>(Clock::now() - start).count();
  });
  return collect(std::move(samples), std::move(seconds));
}

}  // namespace

void SolverConfig::validate() const {
  if (shots < 1) throw ConfigError("solver shots must be >= 1");
  if (sa_sweeps < 1) throw ConfigError("sa_sweeps must be >= 1");
  if (!(sa_temp_final > 0.0) || !(sa_temp_initial > sa_temp_final) || !std::isfinite(sa_temp_initial)) {
    throw ConfigError("simulated annealing temperatures must satisfy initial > final > 0");
  }
  if (tabu_tenure < 1) throw ConfigError("tabu_tenure must be >= 1");
  if (tabu_iterations < 1) throw ConfigError("tabu_iterations must be >= 1");
}

SolverConfig SolverConfig::preset(std::string_view name) {
  SolverConfig config;
  if (name == "sa") return config;
  if (name == "digital") {
    config.shots = 10;
    config.sa_sweeps = 1000;
    config.sa_schedule = TemperatureSchedule::automatic;
    return config;
  }
  if (name == "short") {
    config.shots = 1;
    config.sa_sweeps = 10;
    config.sa_schedule = TemperatureSchedule::automatic;
    return config;
  }
  if (name == "tabu") {
    config.kind = SolverKind::tabu;
    return config;
  }
  if (name == "exhaustive") {
    config.kind = SolverKind::exhaustive;
    config.shots = 1;
    return config;
  }
  throw ConfigError("unknown solver preset '" + std::string(name) + "'");
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::exhaustive: return "exhaustive";
    case SolverKind::simulated_annealing: return "simulated_annealing";
    case SolverKind::tabu: return "tabu";
  }
  return "unknown";
}

SolverKind solver_kind_from_string(std::string_view name) {
  if (name == "exhaustive") return SolverKind::exhaustive;
  if (name == "simulated_annealing" || name == "sa") return SolverKind::simulated_annealing;
  if (name == "tabu") return SolverKind::tabu;
  throw ConfigError("unknown solver kind '" + std::string(name) + "'");
}

SolveResult solve_exhaustive(const QuboProblem& problem) {
  const std::size_t n = problem.dim();
  if (n > kMaxExhaustiveDim) {
    throw SolverError("exhaustive solver refuses dimension " + std::to_string(n) + " (limit " +
                      std::to_string(kMaxExhaustiveDim) + ")");
  }
  const auto start = Clock::now();

  // Gray-code walk with incremental energies; every state within a small
  // tolerance of the running minimum is kept and re-scored exactly so that
  // equal energies are compared bit-for-bit for the tie-break.
  double scale = std::abs(problem.offset());
  for (double v : problem.quadratic().data()) scale += std::abs(v);
  for (double v : problem.linear()) scale += std::abs(v);
  const double tolerance = 1e-9 * (1.0 + scale);

  FlipState state(problem, Bits(n, 0));
  std::uint64_t index = 0;
  double running_min = state.energy();
  std::vector<std::uint64_t> candidates{0};
  const std::uint64_t states = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < states; ++step) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(step));
    state.flip(bit);
    index ^= std::uint64_t{1} << bit;
    const double e = state.energy();
    if (e < running_min - tolerance) {
      running_min = e;
      candidates.clear();
      candidates.push_back(index);
    } else if (e <= running_min + tolerance) {
      running_min = std::min(running_min, e);
      candidates.push_back(index);
    }
  }

  std::sort(candidates.begin(), candidates.end());
  BitstringSample best;
  best.energy = std::numeric_limits<double>::infinity();
  for (std::uint64_t c : candidates) {
    Bits bits = index_to_bits(c, n);
    const double e = evaluate_energy(problem, bits);
    if (e < best.energy) {
      best.energy = e;
      best.bits = std::move(bits);
    }
  }
  best.shot_index = 0;
  best.solver_id = "exhaustive";
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return collect({best}, {seconds});
}

SolveResult solve_simulated_annealing(const QuboProblem& problem, const SolverConfig& config) {
  config.validate();
  auto [t_initial, t_final] = std::pair{config.sa_temp_initial, config.sa_temp_final};
  if (config.sa_schedule == TemperatureSchedule::automatic) {
    std::tie(t_initial, t_final) = automatic_temperatures(problem);
  }
  return run_shots(config, [&](int shot) {
    return anneal_shot(problem, config, shot, t_initial, t_final);
  });
}

SolveResult solve_tabu(const QuboProblem& problem, const SolverConfig& config) {
  config.validate();
  return run_shots(config, [&](int shot) { return tabu_shot(problem, config, shot); });
}

SolveResult solve(const QuboProblem& problem, const SolverConfig& config) {
  switch (config.kind) {
    case SolverKind::exhaustive: return solve_exhaustive(problem);
    case SolverKind::simulated_annealing: return solve_simulated_annealing(problem, config);
    case SolverKind::tabu: return solve_tabu(problem, config);
  }
  throw SolverError("unhandled solver kind");
}

void to_json(nlohmann::json& j, const SolverConfig& config) {
  j = nlohmann::json{
      {"solver", std::string(to_string(config.kind))},
      {"shots", config.shots},
      {"seed", config.seed},
      {"sa_sweeps", config.sa_sweeps},
      {"sa_temp_initial", config.sa_temp_initial},
      {"sa_temp_final", config.sa_temp_final},
      {"sa_schedule", config.sa_schedule == TemperatureSchedule::automatic ? "automatic" : "fixed"},
      {"tabu_tenure", config.tabu_tenure},
      {"tabu_iterations", config.tabu_iterations},
  };
}

void merge_from_json(const nlohmann::json& j, SolverConfig& config) {
  if (!j.is_object()) throw ConfigError("solver section must be an object");
  if (j.contains("preset")) {
    const auto seed = config.seed;
    config = SolverConfig::preset(j.at("preset").get<std::string>());
    config.seed = seed;
  }
  if (j.contains("solver")) config.kind = solver_kind_from_string(j.at("solver").get<std::string>());
  if (j.contains("shots")) config.shots = j.at("shots").get<int>();
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("sa_sweeps")) config.sa_sweeps = j.at("sa_sweeps").get<int>();
  if (j.contains("sa_temp_initial")) config.sa_temp_initial = j.at("sa_temp_initial").get<double>();
  if (j.contains("sa_temp_final")) config.sa_temp_final = j.at("sa_temp_final").get<double>();
  if (j.contains("sa_schedule")) {
    const auto s = j.at("sa_schedule").get<std::string>();
    if (s == "fixed") {
      config.sa_schedule = TemperatureSchedule::fixed;
    } else if (s == "automatic") {
      config.sa_schedule = TemperatureSchedule::automatic;
    } else {
      throw ConfigError("sa_schedule must be 'fixed' or 'automatic'");
    }
  }
  if (j.contains("tabu_tenure")) config.tabu_tenure = j.at("tabu_tenure").get<int>();
  if (j.contains("tabu_iterations")) config.tabu_iterations = j.at("tabu_iterations").get<int>();
}

void to_json(nlohmann::json& j, const SolveResult& result) {
  j = nlohmann::json{{"best", result.best}, {"samples", result.all_samples}};
}

}  // namespace qkp
