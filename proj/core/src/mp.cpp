#include "mixmap/mp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mixmap/errors.hpp"
#include "mixmap/logmath.hpp"

namespace mixmap {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Probe cap for the reparameterization check inside solver drivers.
constexpr EnumerationLimits kProbeLimits{std::uint64_t{1} << 16};

template <class Update, class Trace>
RunState sweep_loop(const PairwiseModel& model, MessageSet msgs, const SolverOptions& opts,
                    Update&& update, Trace&& trace) {
  RunState st;
  const auto schedule = sweep_schedule(model);
  const int total = opts.max_iters + opts.extra_damped_iters;
  for (int t = 0; t < total; ++t) {
    const double gamma = t < opts.max_iters ? 0.0 : opts.damping;
    double change = 0.0;
    for (int d : schedule) {
      auto fresh = update(msgs, d, t);
      damp_message(fresh, msgs.m[d], gamma);
      change = std::max(change, message_change(fresh, msgs.m[d]));
      msgs.m[d] = std::move(fresh);
    }
    st.iterations = t + 1;
    st.last_change = change;
    if (opts.record_trace) trace(msgs, t, st.trace);
    if (change <= opts.tol) {
      st.converged = true;
      break;
    }
  }
  st.msgs = std::move(msgs);
  return st;
}

bool all_positive(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
}

MaxConfig decode_from_tables(const PairwiseModel& model, const BeliefSet& beliefs) {
  MaxConfig x;
  for (int i : model.max_nodes()) x.push_back(argmax_lowest(beliefs.node[i]));
  return x;
}

void fill_residuals(const PairwiseModel& roles_model, const std::vector<double>& rho,
                    const BeliefSet& mixed, SolveReport& report) {
  try {
    report.residuals.reparam = check_reparameterization(roles_model, rho, mixed, kProbeLimits, report.seed);
  } catch (const StructuralViolation& e) {
    report.residuals.reparam = std::numeric_limits<double>::infinity();
    report.notes.push_back(e.what());
  }
  const auto c = check_mixed_consistency(roles_model, mixed);
  report.residuals.consistency_a = c.a;
  report.residuals.consistency_b = c.b;
  report.residuals.consistency_c = c.c;
}

PairwiseModel with_uniform_roles(const PairwiseModel& model, Role role) {
  return model.with_roles(std::vector<Role>(model.num_vars(), role));
}

}  // namespace

void SolverOptions::validate() const {
  if (max_iters < 0 || extra_damped_iters < 0) throw InvalidArgument("iteration counts must be nonnegative");
  if (!(damping >= 0.0 && damping < 1.0)) throw InvalidArgument("damping must lie in [0, 1)");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (num_random_inits < 0) throw InvalidArgument("num_random_inits must be nonnegative");
}

ConfigScorer::ConfigScorer(const PairwiseModel& model, EnumerationLimits limits) : model_(&model) {
  try {
    exact_.emplace(model, limits);
  } catch (const ResourceLimitError&) {
    exact_.reset();
  }
}

double ConfigScorer::operator()(const MaxConfig& x_B) const {
  return exact_ ? (*exact_)(x_B) : approx_q_value(*model_, x_B);
}

void ConfigScorer::annotate(SolveReport& report) const {
  if (exact_) {
    report.q_exact = (*exact_)(report.decode);
  } else {
    report.q_approx = approx_q_value(*model_, report.decode);
  }
}

double approx_q_value(const PairwiseModel& model, const MaxConfig& x_B) {
  const ClampedModel c = clamp_max_nodes(model, x_B);
  if (c.constant == kNegInf) return kNegInf;
  if (c.model.num_vars() == 0) return c.constant;
  if (is_forest(c.model, std::vector<bool>(c.model.num_vars(), true))) {
    return c.constant + forest_log_partition(c.model);
  }
  SolverOptions opts;
  opts.record_trace = false;
  opts.compute_residuals = false;
  const auto w = bethe_weights(c.model, 1.0);
  const auto r = run_generic(c.model, w, opts);
  return c.constant + eval_free_energy_unchecked(c.model, r.beliefs, w);
}

std::vector<int> sweep_schedule(const PairwiseModel& model) {
  std::vector<int> d(model.num_directed());
  for (int k = 0; k < model.num_directed(); ++k) d[k] = k;
  std::sort(d.begin(), d.end(), [&](int a, int b) {
    if (model.source(a) != model.source(b)) return model.source(a) < model.source(b);
    return model.target(a) < model.target(b);
  });
  return d;
}

GenericResult run_generic(const PairwiseModel& model, const EntropyWeights& weights,
                          const SolverOptions& opts, const MessageSet* init) {
  opts.validate();
  const auto start = Clock::now();
  for (int i = 0; i < model.num_vars(); ++i) {
    if (!(weights.w_node(i) > 0.0)) throw InvalidArgument("weighted message passing needs positive node weights");
  }
  for (int e = 0; e < model.num_edges(); ++e) {
    if (!(weights.w_pair(e) > 0.0)) throw InvalidArgument("weighted message passing needs positive pair weights");
  }
  MessageSet msgs = init ? *init : uniform_messages(model);
  RunState st = sweep_loop(
      model, std::move(msgs), opts,
      [&](const MessageSet& m, int d, int) { return weighted_update(model, weights, m, d); },
      [&](const MessageSet& m, int, std::vector<double>& trace) {
        trace.push_back(eval_free_energy_unchecked(model, weighted_beliefs(model, weights, m), weights));
      });
  GenericResult out;
  out.beliefs = weighted_beliefs(model, weights, st.msgs);
  out.report.algorithm = "weighted";
  out.report.decode = decode_from_tables(model, out.beliefs);
  out.report.converged = st.converged;
  out.report.iterations = st.iterations;
  out.report.residuals.message_change = st.last_change;
  out.report.objective_trace = std::move(st.trace);
  out.report.beliefs = out.beliefs;
  out.report.seed = opts.seed;
  out.report.wall_time_ms = elapsed_ms(start);
  out.msgs = std::move(st.msgs);
  return out;
}

MaxConfig decode_max_nodes(const PairwiseModel& model, const MessageSet& msgs) {
  MaxConfig x;
  for (int i : model.max_nodes()) x.push_back(argmax_lowest(log_belief(model, msgs, i)));
  return x;
}

RunState run_mixed_from(const PairwiseModel& model, const std::vector<double>& rho,
                        const SolverOptions& opts, MessageSet init, CrossRule rule) {
  opts.validate();
  if (rho.size() != static_cast<std::size_t>(model.num_edges())) throw InvalidArgument("rho needs one entry per edge");
  std::optional<QEvaluator> q;
  if (opts.record_trace) {
    try {
      q.emplace(model, opts.limits);
    } catch (const ResourceLimitError&) {
    }
  }
  return sweep_loop(
      model, std::move(init), opts,
      [&](const MessageSet& m, int d, int) { return mixed_update(model, rho, m, d, rule); },
      [&](const MessageSet& m, int, std::vector<double>& trace) {
        if (q) trace.push_back((*q)(decode_max_nodes(model, m)));
      });
}

namespace {

SolveReport mixed_driver(const PairwiseModel& model, const std::vector<double>& rho,
                         const SolverOptions& opts, CrossRule rule, const char* name) {
  opts.validate();
  const auto start = Clock::now();
  const ConfigScorer scorer(model, opts.limits);

  std::vector<MessageSet> inits;
  inits.push_back(uniform_messages(model));
  std::mt19937_64 rng(opts.seed);
  for (int k = 0; k < opts.num_random_inits; ++k) inits.push_back(random_messages(model, rng));
  if (opts.use_sum_product_init) {
    SolverOptions sp = opts;
    sp.record_trace = false;
    sp.compute_residuals = false;
    inits.push_back(run_sum_product_full(model, sp).msgs);
  }

  RunState best;
  MaxConfig best_x;
  double best_q = kNegInf;
  int best_run = -1;
  for (std::size_t k = 0; k < inits.size(); ++k) {
    RunState st = run_mixed_from(model, rho, opts, std::move(inits[k]), rule);
    MaxConfig x = decode_max_nodes(model, st.msgs);
    const double q = scorer(x);
    if (best_run < 0 || q > best_q) {
      best = std::move(st);
      best_x = std::move(x);
      best_q = q;
      best_run = static_cast<int>(k);
    }
  }

  SolveReport r;
  r.algorithm = name;
  r.decode = best_x;
  r.converged = best.converged;
  r.iterations = best.iterations;
  r.residuals.message_change = best.last_change;
  r.objective_trace = std::move(best.trace);
  r.seed = opts.seed;
  r.runs = static_cast<int>(inits.size());
  r.best_run = best_run;
  if (all_positive(rho)) {
    BeliefSet b = mixed_beliefs(model, rho, best.msgs);
    if (opts.compute_residuals) fill_residuals(model, rho, b, r);
    r.mixed_beliefs = std::move(b);
  } else {
    r.notes.push_back("mixed beliefs skipped: some rho_ij is zero");
  }
  scorer.annotate(r);
  r.wall_time_ms = elapsed_ms(start);
  return r;
}

}  // namespace

SolveReport run_mixed_product(const PairwiseModel& model, const std::vector<double>& rho,
                              const SolverOptions& opts) {
  return mixed_driver(model, rho, opts, CrossRule::ArgmaxProduct, "mixed-product");
}

SolveReport run_jiang(const PairwiseModel& model, const std::vector<double>& rho, const SolverOptions& opts) {
  return mixed_driver(model, rho, opts, CrossRule::MaxProduct, "jiang");
}

SolveReport run_annealed(const PairwiseModel& model, const std::vector<double>& rho, const SolverOptions& opts) {
  opts.validate();
  const auto start = Clock::now();
  if (!all_positive(rho)) throw InvalidArgument("annealed BP needs positive rho");
  const EntropyWeights base(model, rho, 1.0);
  const ConfigScorer scorer(model, opts.limits);
  std::optional<QEvaluator> q;
  if (scorer.exact()) q.emplace(model, opts.limits);
  EntropyWeights current = base;
  int current_t = -1;
  RunState st = sweep_loop(
      model, uniform_messages(model), opts,
      [&](const MessageSet& m, int d, int t) {
        if (t != current_t) {
          current = base.with_epsilon(1.0 / (t + 1));
          current_t = t;
        }
        return weighted_update(model, current, m, d);
      },
      [&](const MessageSet& m, int, std::vector<double>& trace) {
        if (q) trace.push_back((*q)(decode_max_nodes(model, m)));
      });
  SolveReport r;
  r.algorithm = "annealed";
  r.decode = decode_max_nodes(model, st.msgs);
  r.converged = st.converged;
  r.iterations = st.iterations;
  r.residuals.message_change = st.last_change;
  r.objective_trace = std::move(st.trace);
  r.seed = opts.seed;
  r.beliefs = weighted_beliefs(model, current, st.msgs);
  r.mixed_beliefs = mixed_beliefs(model, rho, st.msgs);
  scorer.annotate(r);
  r.wall_time_ms = elapsed_ms(start);
  return r;
}

SumProductResult run_sum_product_full(const PairwiseModel& model, const SolverOptions& opts) {
  const auto start = Clock::now();
  const auto w = bethe_weights(model, 1.0);
  GenericResult g = run_generic(model, w, opts);
  SumProductResult out;
  out.report = std::move(g.report);
  out.report.algorithm = "sum-product";
  if (opts.compute_residuals) {
    const std::vector<double> ones(model.num_edges(), 1.0);
    fill_residuals(with_uniform_roles(model, Role::Sum), ones, g.beliefs, out.report);
    const ConfigScorer scorer(model, opts.limits);
    scorer.annotate(out.report);
  }
  out.report.wall_time_ms = elapsed_ms(start);
  out.msgs = std::move(g.msgs);
  return out;
}

SolveReport run_sum_product(const PairwiseModel& model, const SolverOptions& opts) {
  SolveReport r = run_sum_product_full(model, opts).report;
  if (!opts.compute_residuals) {
    const auto start = Clock::now();
    ConfigScorer(model, opts.limits).annotate(r);
    r.wall_time_ms += elapsed_ms(start);
  }
  return r;
}

SolveReport run_max_product(const PairwiseModel& model, const SolverOptions& opts) {
  opts.validate();
  const auto start = Clock::now();
  const ConfigScorer scorer(model, opts.limits);
  RunState st = sweep_loop(
      model, uniform_messages(model), opts,
      [&](const MessageSet& m, int d, int) { return max_product_update(model, m, d); },
      [&](const MessageSet& m, int, std::vector<double>& trace) {
        FullConfig x(model.num_vars());
        for (int i = 0; i < model.num_vars(); ++i) x[i] = argmax_lowest(log_belief(model, m, i));
        trace.push_back(energy(model, x));
      });
  SolveReport r;
  r.algorithm = "max-product";
  r.decode = decode_max_nodes(model, st.msgs);
  r.converged = st.converged;
  r.iterations = st.iterations;
  r.residuals.message_change = st.last_change;
  r.objective_trace = std::move(st.trace);
  r.seed = opts.seed;
  const std::vector<double> ones(model.num_edges(), 1.0);
  BeliefSet b = mixed_beliefs(model, ones, st.msgs);
  if (opts.compute_residuals) fill_residuals(with_uniform_roles(model, Role::Max), ones, b, r);
  r.mixed_beliefs = std::move(b);
  scorer.annotate(r);
  r.wall_time_ms = elapsed_ms(start);
  return r;
}

double check_reparameterization(const PairwiseModel& model, const std::vector<double>& rho,
                                const BeliefSet& mixed, EnumerationLimits limits, std::uint64_t seed,
                                int random_probes) {
  std::vector<std::vector<double>> ln(model.num_vars());
  for (int i = 0; i < model.num_vars(); ++i) {
    for (double p : mixed.node[i]) ln[i].push_back(p > 0.0 ? std::log(p) : kNegInf);
  }
  std::vector<std::vector<double>> le(model.num_edges());
  for (int e = 0; e < model.num_edges(); ++e) {
    for (double p : mixed.edge[e]) le[e].push_back(p > 0.0 ? std::log(p) : kNegInf);
  }

  bool have_c = false;
  double c = 0.0;
  double residual = 0.0;
  auto probe = [&](const FullConfig& x) {
    const double lp = energy(model, x);
    if (lp == kNegInf) return;
    double lh = 0.0;
    bool zero = false;
    for (int i = 0; i < model.num_vars(); ++i) {
      zero = zero || ln[i][x[i]] == kNegInf;
      lh += ln[i][x[i]];
    }
    for (int e = 0; e < model.num_edges() && !zero; ++e) {
      const auto [u, v] = model.edge(e);
      const double lb = le[e][static_cast<std::size_t>(x[u]) * model.card(v) + x[v]];
      zero = zero || lb == kNegInf;
      lh += rho[e] * (lb - ln[u][x[u]] - ln[v][x[v]]);
    }
    if (zero) throw StructuralViolation("belief is zero on a configuration with positive probability");
    if (!have_c) {
      c = lh - lp;
      have_c = true;
    }
    residual = std::max(residual, std::abs(lh - lp - c));
  };

  std::vector<int> vars(model.num_vars());
  for (int i = 0; i < model.num_vars(); ++i) vars[i] = i;
  if (model.state_count(vars, limits.max_states) <= limits.max_states) {
    FullConfig x(model.num_vars(), 0);
    while (true) {
      probe(x);
      int k = model.num_vars() - 1;
      while (k >= 0 && ++x[k] == model.card(k)) {
        x[k] = 0;
        --k;
      }
      if (k < 0) break;
    }
  } else {
    std::mt19937_64 rng(seed);
    FullConfig x(model.num_vars(), 0);
    for (int p = 0; p < random_probes; ++p) {
      for (int i = 0; i < model.num_vars(); ++i) {
        x[i] = std::uniform_int_distribution<int>(0, model.card(i) - 1)(rng);
      }
      probe(x);
    }
  }
  return residual;
}

ConsistencyResiduals check_mixed_consistency(const PairwiseModel& model, const BeliefSet& mixed) {
  ConsistencyResiduals out;
  auto record = [](std::optional<double>& slot, double v) { slot = std::max(slot.value_or(0.0), v); };
  for (int d = 0; d < model.num_directed(); ++d) {
    const int i = model.source(d);
    const int j = model.target(d);
    const int e = d / 2;
    const bool forward = d % 2 == 0;
    const int ci = model.card(i);
    const int cj = model.card(j);
    auto pair = [&](int xi, int xj) {
      const auto& t = mixed.edge[e];
      return forward ? t[static_cast<std::size_t>(xi) * cj + xj] : t[static_cast<std::size_t>(xj) * ci + xi];
    };
    std::vector<double> lhs(cj, 0.0);
    std::optional<double>* slot = nullptr;
    if (model.is_sum(i)) {
      slot = &out.a;
      for (int xj = 0; xj < cj; ++xj) {
        for (int xi = 0; xi < ci; ++xi) lhs[xj] += pair(xi, xj);
      }
    } else if (model.is_max(j)) {
      slot = &out.b;
      for (int xj = 0; xj < cj; ++xj) {
        for (int xi = 0; xi < ci; ++xi) lhs[xj] = std::max(lhs[xj], pair(xi, xj));
      }
    } else {
      slot = &out.c;
      std::vector<double> lb;
      for (double p : mixed.node[i]) lb.push_back(p > 0.0 ? std::log(p) : kNegInf);
      for (int xi : argmax_set(lb)) {
        for (int xj = 0; xj < cj; ++xj) lhs[xj] += pair(xi, xj);
      }
    }
    double total = 0.0;
    for (double v : lhs) total += v;
    double r = 0.0;
    if (total <= 0.0) {
      r = std::numeric_limits<double>::infinity();
    } else {
      for (int xj = 0; xj < cj; ++xj) r = std::max(r, std::abs(lhs[xj] / total - mixed.node[j][xj]));
    }
    record(*slot, r);
  }
  return out;
}

std::vector<bool> verify_local_optimality(const PairwiseModel& model, const MaxConfig& x_B,
                                          const std::vector<std::vector<int>>& subsets,
                                          EnumerationLimits limits) {
  const QEvaluator q(model, limits);
  const double base = q(x_B);
  std::vector<bool> out;
  for (const auto& C : subsets) {
    std::vector<int> pos;
    for (int i : C) {
      if (i < 0 || i >= model.num_vars() || !model.is_max(i)) {
        throw InvalidArgument("subset entry " + std::to_string(i) + " is not a Max node");
      }
      pos.push_back(model.max_position(i));
    }
    if (model.state_count(C, limits.max_states) > limits.max_states) {
      throw ResourceLimitError("subset enumeration exceeds the cap");
    }
    MaxConfig x = x_B;
    for (int p : pos) x[p] = 0;
    bool ok = true;
    while (ok) {
      if (q(x) > base + 1e-9) ok = false;
      int k = static_cast<int>(pos.size()) - 1;
      while (k >= 0 && ++x[pos[k]] == model.card(C[k])) {
        x[pos[k]] = 0;
        --k;
      }
      if (k < 0) break;
    }
    out.push_back(ok);
  }
  return out;
}

BeliefSet perturb_beliefs(const BeliefSet& beliefs) {
  BeliefSet b = beliefs;
  auto bump = [](std::vector<double>& t) {
    for (double& v : t) {
      if (v > 0.0) {
        v *= 2.0;
        return true;
      }
    }
    return false;
  };
  for (auto& t : b.edge) {
    if (bump(t)) return b;
  }
  for (auto& t : b.node) {
    if (bump(t)) return b;
  }
  return b;
}

}  // namespace mixmap
