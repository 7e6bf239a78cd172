#include "mixmap/report.hpp"

#include <cmath>

#include "mixmap/logmath.hpp"

namespace mixmap {

namespace {

/// JSON has no infinity; -inf is written as null.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? number(*v) : nlohmann::json(nullptr);
}

}  // namespace

double SolveReport::score() const {
  if (q_exact) return *q_exact;
  if (q_approx) return *q_approx;
  return kNegInf;
}

nlohmann::json to_json(const BeliefSet& beliefs) {
  return {{"node", beliefs.node}, {"edge", beliefs.edge}};
}

nlohmann::json to_json(const SolveReport& r, bool include_beliefs) {
  nlohmann::json doc;
  doc["algorithm"] = r.algorithm;
  doc["decode"] = r.decode;
  doc["q_value"] = optional_number(r.q_exact);
  if (!r.q_exact && r.q_approx) doc["q_approx"] = number(*r.q_approx);
  if (r.bound) {
    doc["bound"] = {{"value", number(r.bound->value)},
                    {"valid", r.bound->valid},
                    {"consistency_residual", r.bound->consistency_residual}};
  } else {
    doc["bound"] = nullptr;
  }
  doc["converged"] = r.converged;
  doc["iterations"] = r.iterations;
  doc["residuals"] = {{"message_change", number(r.residuals.message_change)},
                      {"reparam", optional_number(r.residuals.reparam)},
                      {"a", optional_number(r.residuals.consistency_a)},
                      {"b", optional_number(r.residuals.consistency_b)},
                      {"c", optional_number(r.residuals.consistency_c)}};
  nlohmann::json trace = nlohmann::json::array();
  for (double v : r.objective_trace) trace.push_back(number(v));
  doc["objective_trace"] = trace;
  doc["runs"] = r.runs;
  doc["best_run"] = r.best_run;
  doc["wall_time_ms"] = r.wall_time_ms;
  doc["seed"] = r.seed;
  if (!r.notes.empty()) doc["notes"] = r.notes;
  if (include_beliefs) {
    if (r.beliefs) doc["beliefs"] = to_json(*r.beliefs);
    if (r.mixed_beliefs) doc["mixed_beliefs"] = to_json(*r.mixed_beliefs);
  }
  return doc;
}

}  // namespace mixmap
