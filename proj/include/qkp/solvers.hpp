#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qkp/qubo.hpp"

namespace qkp {

enum class SolverKind { exhaustive, simulated_annealing, tabu };

// fixed: temperatures are taken verbatim from the config.
// automatic: temperatures are derived from the problem's coefficient range so
// the hottest sweep accepts the largest single-flip uphill move with
// probability 1/2 and the coldest accepts the smallest with probability 1/100.
enum class TemperatureSchedule { fixed, automatic };

struct SolverConfig {
  SolverKind kind = SolverKind::simulated_annealing;
  int shots = 10;
  std::uint64_t seed = 0;
  int sa_sweeps = 1000;
  double sa_temp_initial = 10.0;
  double sa_temp_final = 0.05;
  TemperatureSchedule sa_schedule = TemperatureSchedule::fixed;
  int tabu_tenure = 8;
  // Search stops after this many consecutive iterations without improving
  // the best-so-far energy.
  int tabu_iterations = 200;

  // Throws ConfigError when an invariant is violated.
  void validate() const;

  // Named presets: "sa" (defaults above), "digital" (long automatic-schedule
  // annealing standing in for a digital annealer), "short" (low-budget
  // annealing), "tabu", "exhaustive".
  static SolverConfig preset(std::string_view name);
};

std::string_view to_string(SolverKind kind);
SolverKind solver_kind_from_string(std::string_view name);

struct SolveResult {
  BitstringSample best;
  std::vector<BitstringSample> all_samples;
  std::vector<double> shot_seconds;
};

inline constexpr std::size_t kMaxExhaustiveDim = 24;

// Global optimum by enumeration. Ties go to the bitstring with the smallest
// bits_to_index value.
SolveResult solve_exhaustive(const QuboProblem& problem);

// Metropolis single-flip annealing with a geometric temperature schedule.
// Shot i draws its initial state from a generator seeded with seed ^ i.
SolveResult solve_simulated_annealing(const QuboProblem& problem, const SolverConfig& config);

// Steepest-descent single-flip tabu search with aspiration.
SolveResult solve_tabu(const QuboProblem& problem, const SolverConfig& config);

// Dispatches on config.kind.
SolveResult solve(const QuboProblem& problem, const SolverConfig& config);

void to_json(nlohmann::json& j, const SolverConfig& config);
// Missing keys keep the value already present in `config`.
void merge_from_json(const nlohmann::json& j, SolverConfig& config);
void to_json(nlohmann::json& j, const SolveResult& result);

}  // namespace qkp
