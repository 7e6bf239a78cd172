#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixmap/beliefs.hpp"
#include "mixmap/free_energy.hpp"
#include "mixmap/model.hpp"

namespace mixmap {

struct Residuals {
  double message_change = 0.0;
  std::optional<double> reparam;
  std::optional<double> consistency_a;
  std::optional<double> consistency_b;
  std::optional<double> consistency_c;
};

struct SolveReport {
  std::string algorithm;
  MaxConfig decode;
  /// Exact Q(decode) when the oracle can evaluate it.
  std::optional<double> q_exact;
  /// Bethe estimate of Q(decode), filled when the exact value is unavailable.
  std::optional<double> q_approx;
  std::vector<double> objective_trace;
  bool converged = false;
  int iterations = 0;
  Residuals residuals;
  std::optional<BoundResult> bound;
  /// Local marginals tau (weighted engines) or node beliefs used for decoding.
  std::optional<BeliefSet> beliefs;
  /// Mixed beliefs b (zero-temperature engines).
  std::optional<BeliefSet> mixed_beliefs;
  double wall_time_ms = 0.0;
  std::uint64_t seed = 0;
  int runs = 1;
  int best_run = 0;
  std::vector<std::string> notes;

  /// Exact Q if known, else the approximate one, else -inf.
  double score() const;
};

nlohmann::json to_json(const SolveReport& report, bool include_beliefs = false);
nlohmann::json to_json(const BeliefSet& beliefs);

}  // namespace mixmap
