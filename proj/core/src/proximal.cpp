#include "mixmap/proximal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mixmap/errors.hpp"
#include "mixmap/logmath.hpp"
#include "mixmap/mp.hpp"

namespace mixmap {

namespace {

double floored_log(double p) { return p > 0.0 ? std::max(std::log(p), kLogFloor) : kLogFloor; }

/// theta + lambda log tau_B under the pairwise decomposition of tau_B.
PairwiseModel shifted_model(const PairwiseModel& model, const EntropyWeights& weights,
                            const BeliefSet& tau, double lambda) {
  auto nodes = model.node_logpots();
  for (int i : model.max_nodes()) {
    for (int k = 0; k < model.card(i); ++k) nodes[i][k] += lambda * floored_log(tau.node[i][k]);
  }
  auto tables = model.edge_logpots();
  for (int e = 0; e < model.num_edges(); ++e) {
    const auto [u, v] = model.edge(e);
    if (!model.is_max(u) || !model.is_max(v)) continue;
    const int cv = model.card(v);
    for (int a = 0; a < model.card(u); ++a) {
      for (int b = 0; b < cv; ++b) {
        const std::size_t k = static_cast<std::size_t>(a) * cv + b;
        const double pmi =
            floored_log(tau.edge[e][k]) - floored_log(tau.node[u][a]) - floored_log(tau.node[v][b]);
        tables[e][k] += lambda * weights.rho(e) * pmi;
      }
    }
  }
  return PairwiseModel(model.cards(), model.roles(), std::move(nodes), model.edges(), std::move(tables));
}

double max_node_change(const PairwiseModel& model, const BeliefSet& a, const BeliefSet& b) {
  double r = 0.0;
  for (int i : model.max_nodes()) {
    for (int k = 0; k < model.card(i); ++k) r = std::max(r, std::abs(a.node[i][k] - b.node[i][k]));
  }
  return r;
}

}  // namespace

void ProximalOptions::validate() const {
  if (max_outer < 1) throw InvalidArgument("max_outer must be at least 1");
  if (inner_iters < 0 || inner_damped_iters < 0) throw InvalidArgument("inner iteration counts must be nonnegative");
  if (!(damping >= 0.0 && damping < 1.0)) throw InvalidArgument("damping must lie in [0, 1)");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
}

SolveReport run_proximal(const PairwiseModel& model, ProximalFlavor flavor, const ProximalOptions& opts) {
  if (flavor == ProximalFlavor::Bethe) {
    SolveReport r = run_proximal(model, bethe_weights(model), opts, false);
    r.algorithm = "proximal-bethe";
    return r;
  }
  SolveReport r = run_proximal(model, trw_weights_covering(model, opts.seed), opts, true);
  r.algorithm = "proximal-trw";
  return r;
}

SolveReport run_proximal(const PairwiseModel& model, const EntropyWeights& weights,
                         const ProximalOptions& opts, bool report_bound) {
  opts.validate();
  const auto start = std::chrono::steady_clock::now();
  const EntropyWeights objective_weights = weights.with_epsilon(0.0);

  SolverOptions inner;
  inner.max_iters = opts.inner_iters;
  inner.extra_damped_iters = opts.inner_damped_iters;
  inner.damping = opts.damping;
  inner.tol = opts.tol;
  inner.record_trace = false;
  inner.compute_residuals = false;
  inner.seed = opts.seed;

  SolveReport r;
  r.algorithm = "proximal";
  r.seed = opts.seed;
  BeliefSet tau = uniform_beliefs(model);
  MessageSet msgs = uniform_messages(model);
  double last_inner_change = 0.0;
  bool converged = false;
  int t = 1;
  for (; t <= opts.max_outer; ++t) {
    const double lambda = opts.lambda_at(t);
    const PairwiseModel shifted = shifted_model(model, weights, tau, lambda);
    GenericResult g = run_generic(shifted, weights.with_epsilon(lambda), inner, &msgs);
    msgs = std::move(g.msgs);
    last_inner_change = g.report.residuals.message_change;
    const double delta = max_node_change(model, g.beliefs, tau);
    tau = std::move(g.beliefs);
    if (opts.record_trace) r.objective_trace.push_back(eval_free_energy_unchecked(model, tau, objective_weights));
    if (delta <= opts.tol && last_inner_change <= opts.tol) {
      converged = true;
      break;
    }
  }

  r.converged = converged;
  r.iterations = std::min(t, opts.max_outer);
  r.residuals.message_change = last_inner_change;
  for (int i : model.max_nodes()) r.decode.push_back(argmax_lowest(tau.node[i]));
  if (report_bound) r.bound = trw_upper_bound(model, tau, objective_weights, converged);

  const bool positive = std::all_of(weights.rho().begin(), weights.rho().end(), [](double x) { return x > 0.0; });
  if (positive) {
    BeliefSet b = mixed_beliefs(model, weights.rho(), msgs);
    if (opts.compute_residuals) {
      const auto c = check_mixed_consistency(model, b);
      r.residuals.consistency_a = c.a;
      r.residuals.consistency_b = c.b;
      r.residuals.consistency_c = c.c;
    }
    r.mixed_beliefs = std::move(b);
  }
  r.beliefs = std::move(tau);
  ConfigScorer(model, opts.limits).annotate(r);
  r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

double pairwise_proximal_distance(const PairwiseModel& model, const BeliefSet& tau, const BeliefSet& prev,
                                  const ConvexityCertificate& certificate) {
  auto kl_term = [](double p, double q) {
    if (p <= 0.0) return 0.0;
    if (q <= 0.0) throw InvalidArgument("proximal distance: reference has no mass where beliefs do");
    return p * std::log(p / q);
  };
  double d = 0.0;
  for (std::size_t k = 0; k < model.max_nodes().size(); ++k) {
    const int i = model.max_nodes()[k];
    double kl = 0.0;
    for (int s = 0; s < model.card(i); ++s) kl += kl_term(tau.node[i][s], prev.node[i][s]);
    d += certificate.kappa_node[k] * kl;
  }
  for (int e = 0; e < model.num_edges(); ++e) {
    const auto [u, v] = model.edge(e);
    if (!model.is_max(u) || !model.is_max(v)) continue;
    const int cu = model.card(u);
    const int cv = model.card(v);
    // Direction u -> v conditions x_u on x_v; v -> u conditions x_v on x_u.
    double kl_uv = 0.0;
    double kl_vu = 0.0;
    for (int a = 0; a < cu; ++a) {
      for (int b = 0; b < cv; ++b) {
        const std::size_t k = static_cast<std::size_t>(a) * cv + b;
        const double p = tau.edge[e][k];
        const double q = prev.edge[e][k];
        if (p <= 0.0) continue;
        if (q <= 0.0) throw InvalidArgument("proximal distance: reference has no mass where beliefs do");
        kl_uv += kl_term(p / tau.node[v][b], q / prev.node[v][b]) * tau.node[v][b];
        kl_vu += kl_term(p / tau.node[u][a], q / prev.node[u][a]) * tau.node[u][a];
      }
    }
    d += certificate.kappa_dir[2 * e] * kl_uv + certificate.kappa_dir[2 * e + 1] * kl_vu;
  }
  return d;
}

}  // namespace mixmap
