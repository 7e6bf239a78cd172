#include "mixmap/baselines.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "mixmap/errors.hpp"
#include "mixmap/logmath.hpp"
#include "mixmap/mp.hpp"

namespace mixmap {

namespace {

struct ConfigHash {
  std::size_t operator()(const MaxConfig& x) const {
    std::size_t h = 1469598103934665603ULL;
    for (int v : x) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

bool is_whole_forest(const PairwiseModel& m) { return is_forest(m, std::vector<bool>(m.num_vars(), true)); }

MaxConfig random_config(const PairwiseModel& model, std::mt19937_64& rng) {
  MaxConfig x;
  for (int i : model.max_nodes()) x.push_back(std::uniform_int_distribution<int>(0, model.card(i) - 1)(rng));
  return x;
}

BeliefSet sum_marginals(const PairwiseModel& m, bool allow_exact, EnumerationLimits limits) {
  if (allow_exact) {
    if (is_whole_forest(m)) return forest_marginals(m);
    std::vector<int> vars(m.num_vars());
    for (int i = 0; i < m.num_vars(); ++i) vars[i] = i;
    if (m.state_count(vars, limits.max_states) <= limits.max_states) return marginals_enumerate(m, limits);
  }
  SolverOptions opts;
  opts.record_trace = false;
  opts.compute_residuals = false;
  return run_generic(m, bethe_weights(m, 1.0), opts).beliefs;
}

MaxConfig maximize(const PairwiseModel& induced, bool allow_exact, EnumerationLimits limits) {
  if (allow_exact) {
    try {
      return map_exact(induced, limits).config;
    } catch (const ResourceLimitError&) {
    }
  }
  SolverOptions opts;
  opts.record_trace = false;
  opts.compute_residuals = false;
  return run_max_product(induced, opts).decode;
}

/// M-step potentials: theta_i + sum over cross edges of E_tau[theta_ij].
std::vector<std::vector<double>> expected_potentials(const PairwiseModel& model, const ClampedModel& clamped,
                                                     const BeliefSet& tau) {
  std::vector<int> pos(model.num_vars(), -1);
  for (std::size_t a = 0; a < clamped.nodes.size(); ++a) pos[clamped.nodes[a]] = static_cast<int>(a);
  std::vector<std::vector<double>> out;
  for (int i : model.max_nodes()) {
    std::vector<double> u = model.node_logpot(i);
    for (const auto& inc : model.neighbors(i)) {
      const int j = inc.neighbor;
      if (model.is_max(j)) continue;
      const auto& t = model.directed_table(inc.out);
      const auto& tj = tau.node[pos[j]];
      for (int xi = 0; xi < model.card(i); ++xi) {
        double s = 0.0;
        for (int xj = 0; xj < model.card(j); ++xj) {
          s += weighted_value(tj[xj], t[static_cast<std::size_t>(xi) * model.card(j) + xj]);
        }
        u[xi] += s;
      }
    }
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace

SolveReport run_em(const PairwiseModel& model, const EmOptions& opts) {
  if (opts.max_rounds < 1) throw InvalidArgument("EM needs at least one round");
  const auto start = std::chrono::steady_clock::now();
  const ConfigScorer scorer(model, opts.limits);

  std::vector<MaxConfig> inits;
  if (opts.init) {
    inits.push_back(*opts.init);
  } else {
    std::mt19937_64 rng(opts.seed);
    for (int k = 0; k < opts.num_random_inits; ++k) inits.push_back(random_config(model, rng));
    if (opts.use_sum_product_init) {
      SolverOptions sp;
      sp.record_trace = false;
      sp.compute_residuals = false;
      inits.push_back(run_sum_product(model, sp).decode);
    }
    if (inits.empty()) inits.emplace_back(model.max_nodes().size(), 0);
  }

  SolveReport best;
  double best_q = kNegInf;
  for (std::size_t k = 0; k < inits.size(); ++k) {
    SolveReport r;
    MaxConfig x = inits[k];
    std::unordered_set<MaxConfig, ConfigHash> seen{x};
    MaxConfig run_best = x;
    double run_best_q = scorer(x);
    r.objective_trace.push_back(run_best_q);
    bool repeated = false;
    int round = 0;
    while (round < opts.max_rounds) {
      ++round;
      const ClampedModel clamped = clamp_max_nodes(model, x);
      BeliefSet tau;
      if (clamped.model.num_vars() > 0) tau = sum_marginals(clamped.model, opts.e_step == EStep::Exact, opts.limits);
      const PairwiseModel induced = induced_max_model(model, expected_potentials(model, clamped, tau));
      MaxConfig next = induced.num_vars() > 0 ? maximize(induced, opts.m_step == MStep::Exact, opts.limits)
                                              : MaxConfig{};
      const double q = scorer(next);
      r.objective_trace.push_back(q);
      if (q > run_best_q) {
        run_best_q = q;
        run_best = next;
      }
      if (!seen.insert(next).second) {
        repeated = true;
        x = std::move(next);
        break;
      }
      x = std::move(next);
    }
    r.decode = run_best;
    r.converged = repeated;
    r.iterations = round;
    if (k == 0 || run_best_q > best_q) {
      best = std::move(r);
      best_q = run_best_q;
      best.best_run = static_cast<int>(k);
    }
  }
  best.algorithm = "em";
  best.runs = static_cast<int>(inits.size());
  best.seed = opts.seed;
  scorer.annotate(best);
  best.wall_time_ms = elapsed_ms(start);
  return best;
}

MaxConfig default_sequential_init(const PairwiseModel& model) {
  MaxConfig x;
  auto pots = model.node_logpots();
  for (int i : model.max_nodes()) {
    const PairwiseModel current = model.with_node_potentials(pots);
    BeliefSet b = sum_marginals(current, true, EnumerationLimits{});
    const int s = argmax_lowest(b.node[i]);
    x.push_back(s);
    for (int k = 0; k < model.card(i); ++k) {
      if (k != s) pots[i][k] = kNegInf;
    }
  }
  return x;
}

SolveReport run_taboo(const PairwiseModel& model, const TabooOptions& opts) {
  if (opts.max_steps < 1) throw InvalidArgument("taboo search needs at least one step");
  const auto start = std::chrono::steady_clock::now();
  const QEvaluator q(model, opts.limits);
  std::unordered_map<MaxConfig, double, ConfigHash> cache;
  auto score = [&](const MaxConfig& x) {
    auto it = cache.find(x);
    if (it != cache.end()) return it->second;
    const double v = q(x);
    cache.emplace(x, v);
    return v;
  };

  std::vector<MaxConfig> inits;
  if (opts.init) {
    inits.push_back(*opts.init);
  } else {
    std::mt19937_64 rng(opts.seed);
    for (int k = 0; k < opts.num_random_inits; ++k) inits.push_back(random_config(model, rng));
    if (opts.use_sequential_init) inits.push_back(default_sequential_init(model));
    if (inits.empty()) inits.emplace_back(model.max_nodes().size(), 0);
  }

  SolveReport best;
  double best_q = kNegInf;
  const auto& B = model.max_nodes();
  for (std::size_t k = 0; k < inits.size(); ++k) {
    SolveReport r;
    MaxConfig cur = inits[k];
    std::unordered_set<MaxConfig, ConfigHash> visited{cur};
    MaxConfig run_best = cur;
    double run_best_q = score(cur);
    r.objective_trace.push_back(run_best_q);
    int steps = 0;
    bool exhausted = false;
    while (steps < opts.max_steps) {
      MaxConfig move;
      double move_q = kNegInf;
      bool found = false;
      MaxConfig cand = cur;
      for (std::size_t p = 0; p < B.size(); ++p) {
        for (int s = 0; s < model.card(B[p]); ++s) {
          if (s == cur[p]) continue;
          cand[p] = s;
          if (!visited.count(cand)) {
            const double v = score(cand);
            if (!found || v > move_q) {
              move = cand;
              move_q = v;
              found = true;
            }
          }
        }
        cand[p] = cur[p];
      }
      if (!found) {
        exhausted = true;
        break;
      }
      ++steps;
      cur = std::move(move);
      visited.insert(cur);
      r.objective_trace.push_back(move_q);
      if (move_q > run_best_q) {
        run_best_q = move_q;
        run_best = cur;
      }
    }
    r.decode = run_best;
    r.iterations = steps;
    r.converged = exhausted || steps == opts.max_steps;
    if (k == 0 || run_best_q > best_q) {
      best = std::move(r);
      best_q = run_best_q;
      best.best_run = static_cast<int>(k);
    }
  }
  best.algorithm = "taboo";
  best.runs = static_cast<int>(inits.size());
  best.seed = opts.seed;
  best.q_exact = best_q;
  best.notes.push_back("generic taboo search: visited-set tabu list, no aspiration rule");
  best.wall_time_ms = elapsed_ms(start);
  return best;
}

}  // namespace mixmap
