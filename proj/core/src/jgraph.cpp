#include "mixmap/jgraph.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "mixmap/errors.hpp"
#include "mixmap/logmath.hpp"
#include "mixmap/messages.hpp"

namespace mixmap {

namespace {

std::size_t state_space(const std::vector<int>& vars, const std::vector<int>& cards) {
  std::size_t n = 1;
  for (int v : vars) n *= static_cast<std::size_t>(cards[v]);
  return n;
}

/// Calls f(assignment) for each joint state of `vars`; `assignment` is indexed
/// by variable id and only the entries of `vars` are meaningful.
template <class F>
void for_each_assignment(const std::vector<int>& vars, const std::vector<int>& cards, std::vector<int>& assignment,
                         F&& f) {
  for (int v : vars) assignment[v] = 0;
  while (true) {
    f(static_cast<const std::vector<int>&>(assignment));
    int k = static_cast<int>(vars.size()) - 1;
    while (k >= 0 && ++assignment[vars[k]] == cards[vars[k]]) {
      assignment[vars[k]] = 0;
      --k;
    }
    if (k < 0) return;
  }
}

/// For each state of `outer`, the flat index into a table over `inner` (inner subset of outer).
std::vector<std::size_t> projection(const std::vector<int>& outer, const std::vector<int>& inner,
                                    const std::vector<int>& cards) {
  std::vector<std::size_t> out;
  out.reserve(state_space(outer, cards));
  std::vector<int> a(cards.size(), 0);
  for_each_assignment(outer, cards, a, [&](const std::vector<int>& x) { out.push_back(table_index(inner, cards, x)); });
  return out;
}

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

std::vector<int> intersection(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

double table_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) h -= xlogx(v);
  return h;
}

}  // namespace

JunctionGraph build_junction_graph(const FactorModel& fm, EliminationPolicy policy) {
  const int n = fm.num_vars();
  std::vector<std::set<int>> adj(n);
  for (const auto& f : fm.factors()) {
    for (int a : f.scope) {
      for (int b : f.scope) {
        if (a != b) adj[a].insert(b);
      }
    }
  }

  JunctionGraph jg;
  jg.cards = fm.cards();
  jg.roles = fm.roles();
  std::vector<bool> removed(n, false);
  std::vector<std::vector<int>> cliques;
  for (int step = 0; step < n; ++step) {
    bool sum_left = false;
    for (int v = 0; v < n; ++v) sum_left = sum_left || (!removed[v] && fm.role(v) == Role::Sum);
    int best = -1;
    long best_fill = 0;
    for (int v = 0; v < n; ++v) {
      if (removed[v]) continue;
      if (policy == EliminationPolicy::SumFirstMinFill && sum_left && fm.role(v) != Role::Sum) continue;
      std::vector<int> nb(adj[v].begin(), adj[v].end());
      long fill = 0;
      for (std::size_t x = 0; x < nb.size(); ++x) {
        for (std::size_t y = x + 1; y < nb.size(); ++y) fill += adj[nb[x]].count(nb[y]) ? 0 : 1;
      }
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    std::vector<int> nb(adj[best].begin(), adj[best].end());
    for (std::size_t x = 0; x < nb.size(); ++x) {
      for (std::size_t y = x + 1; y < nb.size(); ++y) {
        adj[nb[x]].insert(nb[y]);
        adj[nb[y]].insert(nb[x]);
      }
    }
    std::vector<int> clique = nb;
    clique.push_back(best);
    std::sort(clique.begin(), clique.end());
    cliques.push_back(clique);
    for (int u : nb) adj[u].erase(best);
    adj[best].clear();
    removed[best] = true;
    jg.elimination_order.push_back(best);
  }

  for (std::size_t k = 0; k < cliques.size(); ++k) {
    bool subsumed = false;
    for (std::size_t j = 0; j < cliques.size() && !subsumed; ++j) {
      if (j == k) continue;
      const bool inside = std::includes(cliques[j].begin(), cliques[j].end(), cliques[k].begin(), cliques[k].end());
      subsumed = inside && (cliques[j].size() > cliques[k].size() || j < k);
    }
    if (!subsumed) jg.clusters.push_back({cliques[k], {}, {}, {}});
  }

  const int m = static_cast<int>(jg.clusters.size());
  struct Candidate {
    std::size_t weight;
    int a;
    int b;
  };
  std::vector<Candidate> cand;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      const auto s = intersection(jg.clusters[a].vars, jg.clusters[b].vars);
      if (!s.empty()) cand.push_back({s.size(), a, b});
    }
  }
  std::stable_sort(cand.begin(), cand.end(), [](const Candidate& x, const Candidate& y) { return x.weight > y.weight; });
  DisjointSets ds(m);
  for (const auto& c : cand) {
    if (ds.unite(c.a, c.b)) {
      jg.separators.push_back({c.a, c.b, intersection(jg.clusters[c.a].vars, jg.clusters[c.b].vars)});
    }
  }

  for (std::size_t f = 0; f < fm.factors().size(); ++f) {
    std::vector<int> scope = fm.factors()[f].scope;
    std::sort(scope.begin(), scope.end());
    for (auto& c : jg.clusters) {
      if (std::includes(c.vars.begin(), c.vars.end(), scope.begin(), scope.end())) {
        c.factors.push_back(static_cast<int>(f));
        break;
      }
    }
  }
  std::vector<int> assignment(n, 0);
  for (auto& c : jg.clusters) {
    c.log_potential.clear();
    for_each_assignment(c.vars, jg.cards, assignment, [&](const std::vector<int>& x) {
      double v = 0.0;
      for (int f : c.factors) {
        const auto& fac = fm.factors()[f];
        v += fac.table[table_index(fac.scope, jg.cards, x)];
      }
      c.log_potential.push_back(v);
    });
  }
  for (int v = 0; v < n; ++v) {
    if (fm.role(v) != Role::Max) continue;
    for (auto& c : jg.clusters) {
      if (std::binary_search(c.vars.begin(), c.vars.end(), v)) {
        c.pi.push_back(v);
        break;
      }
    }
  }
  return jg;
}

bool check_running_intersection(const JunctionGraph& jg) {
  const int n = static_cast<int>(jg.cards.size());
  const int m = static_cast<int>(jg.clusters.size());
  for (int v = 0; v < n; ++v) {
    std::vector<bool> holds(m, false);
    int nodes = 0;
    for (int k = 0; k < m; ++k) {
      holds[k] = std::binary_search(jg.clusters[k].vars.begin(), jg.clusters[k].vars.end(), v);
      nodes += holds[k] ? 1 : 0;
    }
    if (nodes == 0) return false;
    DisjointSets ds(m);
    int edges = 0;
    for (const auto& s : jg.separators) {
      if (!std::count(s.vars.begin(), s.vars.end(), v)) continue;
      if (!holds[s.a] || !holds[s.b]) return false;
      ++edges;
      if (!ds.unite(s.a, s.b)) return false;
    }
    if (edges != nodes - 1) return false;
  }
  std::vector<bool> hosted(n, false);
  for (const auto& c : jg.clusters) {
    for (int v : c.pi) {
      if (hosted[v] || !std::binary_search(c.vars.begin(), c.vars.end(), v)) return false;
      hosted[v] = true;
    }
  }
  for (int v = 0; v < n; ++v) {
    if (jg.roles[v] == Role::Max && !hosted[v]) return false;
  }
  return true;
}

double energy(const JunctionGraph& jg, const FullConfig& x) {
  double total = 0.0;
  for (const auto& c : jg.clusters) total += c.log_potential[table_index(c.vars, jg.cards, x)];
  return total;
}

void project_joint(const JunctionGraph& jg, const std::vector<double>& joint,
                   std::vector<std::vector<double>>& cluster_beliefs,
                   std::vector<std::vector<double>>& separator_beliefs) {
  std::vector<int> all(jg.cards.size());
  std::iota(all.begin(), all.end(), 0);
  cluster_beliefs.clear();
  separator_beliefs.clear();
  for (const auto& c : jg.clusters) cluster_beliefs.emplace_back(state_space(c.vars, jg.cards), 0.0);
  for (const auto& s : jg.separators) separator_beliefs.emplace_back(state_space(s.vars, jg.cards), 0.0);
  std::vector<int> a(jg.cards.size(), 0);
  std::size_t flat = 0;
  for_each_assignment(all, jg.cards, a, [&](const std::vector<int>& x) {
    const double p = joint[flat++];
    for (std::size_t k = 0; k < jg.clusters.size(); ++k) {
      cluster_beliefs[k][table_index(jg.clusters[k].vars, jg.cards, x)] += p;
    }
    for (std::size_t s = 0; s < jg.separators.size(); ++s) {
      separator_beliefs[s][table_index(jg.separators[s].vars, jg.cards, x)] += p;
    }
  });
}

double jg_dual_objective(const JunctionGraph& jg, const std::vector<std::vector<double>>& cluster_beliefs,
                         const std::vector<std::vector<double>>& separator_beliefs) {
  double total = 0.0;
  for (std::size_t k = 0; k < jg.clusters.size(); ++k) {
    const auto& c = jg.clusters[k];
    const auto& tau = cluster_beliefs[k];
    for (std::size_t z = 0; z < tau.size(); ++z) total += weighted_value(tau[z], c.log_potential[z]);
    total += table_entropy(tau);
    if (!c.pi.empty()) {
      const auto proj = projection(c.vars, c.pi, jg.cards);
      std::vector<double> marg(state_space(c.pi, jg.cards), 0.0);
      for (std::size_t z = 0; z < tau.size(); ++z) marg[proj[z]] += tau[z];
      total -= table_entropy(marg);
    }
  }
  for (const auto& t : separator_beliefs) total -= table_entropy(t);
  return total;
}

JgbpResult run_mixed_jgbp(const JunctionGraph& jg, const SolverOptions& opts) {
  opts.validate();
  const auto start = std::chrono::steady_clock::now();
  const int m = static_cast<int>(jg.clusters.size());
  const int ns = static_cast<int>(jg.separators.size());

  // Directed separator 2s is a -> b, 2s + 1 is b -> a.
  std::vector<std::vector<int>> incident(m);
  for (int s = 0; s < ns; ++s) {
    incident[jg.separators[s].a].push_back(s);
    incident[jg.separators[s].b].push_back(s);
  }
  std::vector<std::vector<std::vector<std::size_t>>> sep_proj(m);
  for (int k = 0; k < m; ++k) {
    for (int s : incident[k]) sep_proj[k].push_back(projection(jg.clusters[k].vars, jg.separators[s].vars, jg.cards));
  }
  std::vector<std::vector<std::size_t>> pi_proj(m);
  for (int k = 0; k < m; ++k) {
    if (jg.is_max_cluster(k)) pi_proj[k] = projection(jg.clusters[k].vars, jg.clusters[k].pi, jg.cards);
  }
  auto source = [&](int d) { return d % 2 == 0 ? jg.separators[d / 2].a : jg.separators[d / 2].b; };
  auto target = [&](int d) { return d % 2 == 0 ? jg.separators[d / 2].b : jg.separators[d / 2].a; };

  std::vector<std::vector<double>> msgs(2 * ns);
  for (int d = 0; d < 2 * ns; ++d) msgs[d].assign(state_space(jg.separators[d / 2].vars, jg.cards), 0.0);

  // Cluster log belief, optionally leaving out the message arriving over separator `skip`.
  auto belief = [&](int k, int skip) {
    std::vector<double> b = jg.clusters[k].log_potential;
    for (std::size_t r = 0; r < incident[k].size(); ++r) {
      const int s = incident[k][r];
      if (s == skip) continue;
      const int in = jg.separators[s].a == k ? 2 * s + 1 : 2 * s;
      const auto& proj = sep_proj[k][r];
      for (std::size_t z = 0; z < b.size(); ++z) b[z] += msgs[in][proj[z]];
    }
    return b;
  };
  auto pi_marginal = [&](int k, const std::vector<double>& b) {
    std::vector<std::vector<double>> groups(state_space(jg.clusters[k].pi, jg.cards));
    for (std::size_t z = 0; z < b.size(); ++z) groups[pi_proj[k][z]].push_back(b[z]);
    std::vector<double> out;
    for (const auto& g : groups) out.push_back(log_sum_exp(g));
    return out;
  };

  std::vector<int> schedule(2 * ns);
  std::iota(schedule.begin(), schedule.end(), 0);
  std::sort(schedule.begin(), schedule.end(), [&](int x, int y) {
    return std::make_pair(source(x), target(x)) < std::make_pair(source(y), target(y));
  });

  JgbpResult out;
  bool converged = false;
  int iterations = 0;
  double change = 0.0;
  const int total = opts.max_iters + opts.extra_damped_iters;
  for (int t = 0; t < total; ++t) {
    const double gamma = t < opts.max_iters ? 0.0 : opts.damping;
    change = 0.0;
    for (int d : schedule) {
      const int k = source(d);
      const int s = d / 2;
      const std::size_t r = std::find(incident[k].begin(), incident[k].end(), s) - incident[k].begin();
      const auto excl = belief(k, s);
      std::vector<bool> allowed;
      if (jg.is_max_cluster(k)) {
        const auto pm = pi_marginal(k, belief(k, -1));
        allowed.assign(pm.size(), false);
        for (int z : argmax_set(pm)) allowed[z] = true;
      }
      std::vector<std::vector<double>> groups(msgs[d].size());
      for (std::size_t z = 0; z < excl.size(); ++z) {
        if (!allowed.empty() && !allowed[pi_proj[k][z]]) continue;
        groups[sep_proj[k][r][z]].push_back(excl[z]);
      }
      std::vector<double> fresh;
      for (const auto& g : groups) fresh.push_back(log_sum_exp(g));
      max_normalize(fresh);
      damp_message(fresh, msgs[d], gamma);
      change = std::max(change, message_change(fresh, msgs[d]));
      msgs[d] = std::move(fresh);
    }
    iterations = t + 1;
    if (change <= opts.tol) {
      converged = true;
      break;
    }
  }

  out.full_decode.assign(jg.cards.size(), 0);
  for (int k = 0; k < m; ++k) {
    auto b = belief(k, -1);
    if (jg.is_max_cluster(k)) {
      const auto pm = pi_marginal(k, b);
      std::size_t flat = static_cast<std::size_t>(argmax_lowest(pm));
      const auto& pi = jg.clusters[k].pi;
      for (int q = static_cast<int>(pi.size()) - 1; q >= 0; --q) {
        out.full_decode[pi[q]] = static_cast<int>(flat % jg.cards[pi[q]]);
        flat /= jg.cards[pi[q]];
      }
    }
    log_normalize(b);
    out.cluster_beliefs.push_back(exp_all(b));
  }
  SolveReport& r = out.report;
  r.algorithm = "mixed-jg";
  for (std::size_t v = 0; v < jg.cards.size(); ++v) {
    if (jg.roles[v] == Role::Max) r.decode.push_back(out.full_decode[v]);
  }
  r.converged = converged;
  r.iterations = iterations;
  r.residuals.message_change = change;
  r.seed = opts.seed;
  r.notes.push_back("max variables hosted by the first cluster containing them");
  r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace mixmap
