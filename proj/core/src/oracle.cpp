#include "mixmap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "mixmap/errors.hpp"
#include "mixmap/logmath.hpp"

namespace mixmap {

namespace {

/// Streaming log-sum-exp accumulator.
class LseAccumulator {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x > max_) {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    } else {
      sum_ += std::exp(x - max_);
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

/// Calls f(states) for every joint state of `cards`, first entry most significant.
template <class F>
void for_each_state(const std::vector<int>& cards, F&& f) {
  std::vector<int> s(cards.size(), 0);
  for (int c : cards) {
    if (c <= 0) return;
  }
  while (true) {
    f(static_cast<const std::vector<int>&>(s));
    int k = static_cast<int>(s.size()) - 1;
    while (k >= 0 && ++s[k] == cards[k]) {
      s[k] = 0;
      --k;
    }
    if (k < 0) return;
  }
}

void check_cap(std::uint64_t count, const EnumerationLimits& limits, const char* what) {
  if (count > limits.max_states) {
    throw ResourceLimitError(std::string(what) + " exceeds the enumeration cap of " +
                             std::to_string(limits.max_states) + " states");
  }
}

std::vector<int> all_vars(const PairwiseModel& model) {
  std::vector<int> v(model.num_vars());
  for (int i = 0; i < model.num_vars(); ++i) v[i] = i;
  return v;
}

void sanitize_unary(std::vector<double>& u, double& constant) {
  if (max_of(u) == kNegInf) {
    std::fill(u.begin(), u.end(), 0.0);
    constant = kNegInf;
  }
}

/// BFS orientation of a forest: parents precede children.
struct ForestSchedule {
  std::vector<int> order;
  std::vector<int> parent;
  std::vector<int> up_dir;  // directed edge child -> parent
  std::vector<int> roots;
};

ForestSchedule forest_schedule(const PairwiseModel& model) {
  if (!is_forest(model, std::vector<bool>(model.num_vars(), true))) {
    throw InvalidArgument("model graph is not a forest");
  }
  const int n = model.num_vars();
  ForestSchedule s;
  s.parent.assign(n, -1);
  s.up_dir.assign(n, -1);
  std::vector<bool> seen(n, false);
  for (int r = 0; r < n; ++r) {
    if (seen[r]) continue;
    seen[r] = true;
    s.roots.push_back(r);
    std::queue<int> q;
    q.push(r);
    while (!q.empty()) {
      const int i = q.front();
      q.pop();
      s.order.push_back(i);
      for (const auto& inc : model.neighbors(i)) {
        if (seen[inc.neighbor]) continue;
        seen[inc.neighbor] = true;
        s.parent[inc.neighbor] = i;
        s.up_dir[inc.neighbor] = inc.in;
        q.push(inc.neighbor);
      }
    }
  }
  return s;
}

/// Message child -> parent: op over x_c of (u_c(x_c) + table[x_c][x_p]).
std::vector<double> eliminate(const std::vector<double>& u_c, const std::vector<double>& table,
                              int card_p, bool use_max) {
  const int card_c = static_cast<int>(u_c.size());
  std::vector<double> msg(card_p);
  std::vector<double> vals(card_c);
  for (int xp = 0; xp < card_p; ++xp) {
    for (int xc = 0; xc < card_c; ++xc) vals[xc] = u_c[xc] + table[static_cast<std::size_t>(xc) * card_p + xp];
    msg[xp] = use_max ? max_of(vals) : log_sum_exp(vals);
  }
  return msg;
}

void add_into(std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
}

}  // namespace

ClampedModel clamp_max_nodes(const PairwiseModel& model, const MaxConfig& x_B) {
  const FullConfig x = expand_max_config(model, x_B);
  ClampedModel out;
  out.nodes = model.sum_nodes();
  std::vector<int> pos(model.num_vars(), -1);
  for (std::size_t a = 0; a < out.nodes.size(); ++a) pos[out.nodes[a]] = static_cast<int>(a);

  double constant = 0.0;
  for (int j : model.max_nodes()) constant += model.node_logpot(j)[x[j]];

  std::vector<int> cards;
  std::vector<Role> roles;
  std::vector<std::vector<double>> unary;
  for (int i : out.nodes) {
    cards.push_back(model.card(i));
    roles.push_back(Role::Sum);
    unary.push_back(model.node_logpot(i));
  }
  std::vector<Edge> edges;
  std::vector<std::vector<double>> tables;
  for (int e = 0; e < model.num_edges(); ++e) {
    const auto [u, v] = model.edge(e);
    const bool mu = model.is_max(u);
    const bool mv = model.is_max(v);
    if (mu && mv) {
      constant += model.edge_value(e, x[u], x[v]);
    } else if (mu) {
      for (int s = 0; s < model.card(v); ++s) unary[pos[v]][s] += model.edge_value(e, x[u], s);
    } else if (mv) {
      for (int s = 0; s < model.card(u); ++s) unary[pos[u]][s] += model.edge_value(e, s, x[v]);
    } else {
      edges.push_back({pos[u], pos[v]});
      tables.push_back(model.edge_logpot(e));
    }
  }
  for (auto& u : unary) sanitize_unary(u, constant);
  out.model = PairwiseModel(std::move(cards), std::move(roles), std::move(unary), std::move(edges),
                            std::move(tables));
  out.constant = constant;
  return out;
}

PairwiseModel induced_max_model(const PairwiseModel& model,
                                const std::vector<std::vector<double>>& unary) {
  const auto& B = model.max_nodes();
  if (unary.size() != B.size()) throw InvalidArgument("unary potentials must align with max_nodes()");
  std::vector<int> cards;
  std::vector<Role> roles(B.size(), Role::Max);
  std::vector<std::vector<double>> pots = unary;
  double unused = 0.0;
  for (std::size_t k = 0; k < B.size(); ++k) {
    cards.push_back(model.card(B[k]));
    sanitize_unary(pots[k], unused);
  }
  std::vector<Edge> edges;
  std::vector<std::vector<double>> tables;
  for (int e = 0; e < model.num_edges(); ++e) {
    const auto [u, v] = model.edge(e);
    if (model.is_max(u) && model.is_max(v)) {
      edges.push_back({model.max_position(u), model.max_position(v)});
      tables.push_back(model.edge_logpot(e));
    }
  }
  return PairwiseModel(std::move(cards), std::move(roles), std::move(pots), std::move(edges),
                       std::move(tables));
}

QEvaluator::QEvaluator(const PairwiseModel& model, EnumerationLimits limits)
    : model_(&model), limits_(limits), sum_nodes_(model.sum_nodes()) {
  const int n = model.num_vars();
  std::vector<int> pos(n, -1);
  int total = 0;
  for (std::size_t a = 0; a < sum_nodes_.size(); ++a) {
    pos[sum_nodes_[a]] = static_cast<int>(a);
    offset_.push_back(total);
    total += model.card(sum_nodes_[a]);
  }
  offset_.push_back(total);
  cross_.resize(sum_nodes_.size());
  for (std::size_t a = 0; a < sum_nodes_.size(); ++a) {
    for (const auto& inc : model.neighbors(sum_nodes_[a])) {
      if (model.is_max(inc.neighbor)) {
        cross_[a].push_back({model.max_position(inc.neighbor), &model.directed_table(inc.out),
                             model.card(inc.neighbor)});
      }
    }
  }
  std::vector<bool> mask(n, false);
  for (int i : sum_nodes_) mask[i] = true;
  forest_ = is_forest(model, mask);
  if (forest_) {
    std::vector<bool> seen(n, false);
    for (int r : sum_nodes_) {
      if (seen[r]) continue;
      seen[r] = true;
      roots_.push_back(pos[r]);
      std::queue<int> q;
      q.push(r);
      while (!q.empty()) {
        const int i = q.front();
        q.pop();
        for (const auto& inc : model.neighbors(i)) {
          const int j = inc.neighbor;
          if (!mask[j] || seen[j]) continue;
          seen[j] = true;
          steps_.push_back({pos[j], pos[i], &model.directed_table(inc.in)});
          q.push(j);
        }
      }
    }
  } else {
    check_cap(model.state_count(sum_nodes_, limits_.max_states), limits_, "Sum-part enumeration");
    for (int e = 0; e < model.num_edges(); ++e) {
      if (mask[model.edge(e).u] && mask[model.edge(e).v]) sum_edges_.push_back(e);
    }
  }
}

double QEvaluator::operator()(const MaxConfig& x_B) const {
  const PairwiseModel& m = *model_;
  const auto& B = m.max_nodes();
  if (x_B.size() != B.size()) throw InvalidConfiguration("Max configuration has the wrong length");
  double constant = 0.0;
  for (std::size_t k = 0; k < B.size(); ++k) {
    if (x_B[k] < 0 || x_B[k] >= m.card(B[k])) {
      throw InvalidConfiguration("state " + std::to_string(x_B[k]) + " out of range for variable " +
                                 std::to_string(B[k]));
    }
    constant += m.node_logpot(B[k])[x_B[k]];
  }
  for (const auto& inc_list : B) {
    for (const auto& inc : m.neighbors(inc_list)) {
      if (!m.is_max(inc.neighbor) || inc.neighbor < inc_list) continue;
      constant += m.directed_table(inc.out)[static_cast<std::size_t>(x_B[m.max_position(inc_list)]) *
                                                m.card(inc.neighbor) +
                                            x_B[m.max_position(inc.neighbor)]];
    }
  }
  if (constant == kNegInf) return kNegInf;

  std::vector<double> u(static_cast<std::size_t>(offset_.back()));
  for (std::size_t a = 0; a < sum_nodes_.size(); ++a) {
    const auto& theta = m.node_logpot(sum_nodes_[a]);
    double* ua = u.data() + offset_[a];
    for (std::size_t s = 0; s < theta.size(); ++s) {
      double val = theta[s];
      for (const auto& c : cross_[a]) val += (*c.table)[s * c.card_max + x_B[c.max_pos]];
      ua[s] = val;
    }
  }

  if (forest_) {
    double buf[64];
    std::vector<double> big;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
      const int cc = offset_[it->child + 1] - offset_[it->child];
      const int cp = offset_[it->parent + 1] - offset_[it->parent];
      double* vals = buf;
      if (cc > 64) {
        big.resize(cc);
        vals = big.data();
      }
      const double* uc = u.data() + offset_[it->child];
      double* up = u.data() + offset_[it->parent];
      const auto& t = *it->table;
      for (int xp = 0; xp < cp; ++xp) {
        for (int xc = 0; xc < cc; ++xc) vals[xc] = uc[xc] + t[static_cast<std::size_t>(xc) * cp + xp];
        up[xp] += log_sum_exp(std::span<const double>(vals, cc));
      }
    }
    double total = constant;
    for (int r : roots_) {
      total += log_sum_exp(std::span<const double>(u.data() + offset_[r], offset_[r + 1] - offset_[r]));
    }
    return total;
  }

  std::vector<int> cards;
  std::vector<int> pos(m.num_vars(), -1);
  for (std::size_t a = 0; a < sum_nodes_.size(); ++a) {
    cards.push_back(m.card(sum_nodes_[a]));
    pos[sum_nodes_[a]] = static_cast<int>(a);
  }
  LseAccumulator acc;
  for_each_state(cards, [&](const std::vector<int>& s) {
    double val = 0.0;
    for (std::size_t a = 0; a < s.size(); ++a) val += u[offset_[a] + s[a]];
    for (int e : sum_edges_) val += m.edge_value(e, s[pos[m.edge(e).u]], s[pos[m.edge(e).v]]);
    acc.add(val);
  });
  return constant + acc.value();
}

double q_value(const PairwiseModel& model, const MaxConfig& x_B, EnumerationLimits limits) {
  return QEvaluator(model, limits)(x_B);
}

MmapResult marginal_map_exact(const PairwiseModel& model, EnumerationLimits limits) {
  const auto& B = model.max_nodes();
  check_cap(model.state_count(B, limits.max_states), limits, "Max-part enumeration");
  QEvaluator q(model, limits);
  std::vector<int> cards;
  for (int j : B) cards.push_back(model.card(j));
  MmapResult best{MaxConfig(B.size(), 0), kNegInf};
  bool first = true;
  for_each_state(cards, [&](const std::vector<int>& s) {
    const double v = q(s);
    if (first || v > best.value) {
      best.config = s;
      best.value = v;
      first = false;
    }
  });
  return best;
}

double log_partition_enumerate(const PairwiseModel& model, EnumerationLimits limits) {
  const auto vars = all_vars(model);
  check_cap(model.state_count(vars, limits.max_states), limits, "joint enumeration");
  LseAccumulator acc;
  for_each_state(model.cards(), [&](const std::vector<int>& s) { acc.add(energy(model, s)); });
  return acc.value();
}

Marginals marginals_enumerate(const PairwiseModel& model, EnumerationLimits limits) {
  return marginals_of(model, joint_distribution(model, limits));
}

double forest_log_partition(const PairwiseModel& model) {
  const auto s = forest_schedule(model);
  auto u = model.node_logpots();
  for (auto it = s.order.rbegin(); it != s.order.rend(); ++it) {
    const int c = *it;
    const int p = s.parent[c];
    if (p < 0) continue;
    add_into(u[p], eliminate(u[c], model.directed_table(s.up_dir[c]), model.card(p), false));
  }
  double total = 0.0;
  for (int r : s.roots) total += log_sum_exp(u[r]);
  return total;
}

Marginals forest_marginals(const PairwiseModel& model) {
  const auto s = forest_schedule(model);
  const int n = model.num_vars();
  auto up_acc = model.node_logpots();  // theta_i + messages from children
  std::vector<std::vector<double>> up(n);
  for (auto it = s.order.rbegin(); it != s.order.rend(); ++it) {
    const int c = *it;
    const int p = s.parent[c];
    if (p < 0) continue;
    up[c] = eliminate(up_acc[c], model.directed_table(s.up_dir[c]), model.card(p), false);
    add_into(up_acc[p], up[c]);
  }
  std::vector<std::vector<double>> down(n);
  std::vector<std::vector<double>> full(n);
  for (int i : s.order) {
    full[i] = up_acc[i];
    if (s.parent[i] >= 0) add_into(full[i], down[i]);
    for (const auto& inc : model.neighbors(i)) {
      const int c = inc.neighbor;
      if (s.parent[c] != i) continue;
      std::vector<double> excl = full[i];
      for (std::size_t k = 0; k < excl.size(); ++k) excl[k] -= up[c][k];
      // -inf - (-inf) can only occur where full[i] is -inf; keep it at -inf.
      for (std::size_t k = 0; k < excl.size(); ++k) {
        if (std::isnan(excl[k])) excl[k] = kNegInf;
      }
      down[c] = eliminate(excl, model.directed_table(inc.out), model.card(c), false);
    }
  }
  Marginals out;
  out.node.resize(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> b = full[i];
    log_normalize(b);
    out.node[i] = exp_all(b);
  }
  out.edge.resize(model.num_edges());
  for (int e = 0; e < model.num_edges(); ++e) {
    const auto [u, v] = model.edge(e);
    const int c = s.parent[v] == u ? v : u;
    const int p = c == v ? u : v;
    std::vector<double> bc = full[c];
    for (std::size_t k = 0; k < bc.size(); ++k) bc[k] -= down[c][k];
    std::vector<double> bp = full[p];
    for (std::size_t k = 0; k < bp.size(); ++k) bp[k] -= up[c][k];
    for (auto* vec : {&bc, &bp}) {
      for (double& val : *vec) {
        if (std::isnan(val)) val = kNegInf;
      }
    }
    std::vector<double> t(static_cast<std::size_t>(model.card(u)) * model.card(v));
    for (int a = 0; a < model.card(u); ++a) {
      for (int b = 0; b < model.card(v); ++b) {
        const double bu = u == c ? bc[a] : bp[a];
        const double bv = v == c ? bc[b] : bp[b];
        t[static_cast<std::size_t>(a) * model.card(v) + b] = bu + bv + model.edge_value(e, a, b);
      }
    }
    log_normalize(t);
    out.edge[e] = exp_all(t);
  }
  return out;
}

MapResult forest_map(const PairwiseModel& model) {
  const auto s = forest_schedule(model);
  auto u = model.node_logpots();
  for (auto it = s.order.rbegin(); it != s.order.rend(); ++it) {
    const int c = *it;
    const int p = s.parent[c];
    if (p < 0) continue;
    add_into(u[p], eliminate(u[c], model.directed_table(s.up_dir[c]), model.card(p), true));
  }
  MapResult r;
  r.config.assign(model.num_vars(), 0);
  for (int i : s.order) {
    std::vector<double> score = u[i];
    if (s.parent[i] >= 0) {
      const int p = s.parent[i];
      const auto& t = model.directed_table(s.up_dir[i]);
      for (int k = 0; k < model.card(i); ++k) {
        score[k] += t[static_cast<std::size_t>(k) * model.card(p) + r.config[p]];
      }
    }
    r.config[i] = argmax_lowest(score);
  }
  r.value = energy(model, r.config);
  return r;
}

double log_partition_exact(const PairwiseModel& model, EnumerationLimits limits) {
  if (is_forest(model, std::vector<bool>(model.num_vars(), true))) return forest_log_partition(model);
  return log_partition_enumerate(model, limits);
}

Marginals marginals_exact(const PairwiseModel& model, EnumerationLimits limits) {
  if (is_forest(model, std::vector<bool>(model.num_vars(), true))) return forest_marginals(model);
  return marginals_enumerate(model, limits);
}

MapResult map_exact(const PairwiseModel& model, EnumerationLimits limits) {
  const auto vars = all_vars(model);
  if (model.state_count(vars, limits.max_states) > limits.max_states) {
    if (is_forest(model, std::vector<bool>(model.num_vars(), true))) return forest_map(model);
    check_cap(limits.max_states + 1, limits, "joint enumeration");
  }
  MapResult best{FullConfig(model.num_vars(), 0), kNegInf};
  bool first = true;
  for_each_state(model.cards(), [&](const std::vector<int>& s) {
    const double v = energy(model, s);
    if (first || v > best.value) {
      best.config = s;
      best.value = v;
      first = false;
    }
  });
  return best;
}

ExactResult solve_exact(const PairwiseModel& model, EnumerationLimits limits) {
  ExactResult r;
  r.log_partition = log_partition_exact(model, limits);
  r.marginals = marginals_exact(model, limits);
  const auto map = map_exact(model, limits);
  r.map_config = map.config;
  r.map_value = map.value;
  const auto mmap = marginal_map_exact(model, limits);
  r.mmap_config = mmap.config;
  r.mmap_value = mmap.value;
  return r;
}

double smoothed_phi(const PairwiseModel& model, double epsilon, EnumerationLimits limits) {
  if (!(epsilon > 0.0)) throw InvalidArgument("smoothing temperature must be positive");
  const auto& B = model.max_nodes();
  check_cap(model.state_count(B, limits.max_states), limits, "Max-part enumeration");
  QEvaluator q(model, limits);
  std::vector<int> cards;
  for (int j : B) cards.push_back(model.card(j));
  LseAccumulator acc;
  for_each_state(cards, [&](const std::vector<int>& s) { acc.add(q(s) / epsilon); });
  return epsilon * acc.value();
}

JointDistribution joint_distribution(const PairwiseModel& model, EnumerationLimits limits) {
  const auto vars = all_vars(model);
  check_cap(model.state_count(vars, limits.max_states), limits, "joint enumeration");
  JointDistribution j;
  j.cards = model.cards();
  for_each_state(model.cards(), [&](const std::vector<int>& s) { j.p.push_back(energy(model, s)); });
  log_normalize(j.p);
  for (double& v : j.p) v = std::exp(v);
  return j;
}

JointDistribution clamped_distribution(const PairwiseModel& model, const MaxConfig& x_B,
                                       EnumerationLimits limits) {
  const auto vars = all_vars(model);
  check_cap(model.state_count(vars, limits.max_states), limits, "joint enumeration");
  const FullConfig fixed = expand_max_config(model, x_B);
  JointDistribution j;
  j.cards = model.cards();
  for_each_state(model.cards(), [&](const std::vector<int>& s) {
    bool match = true;
    for (int b : model.max_nodes()) match = match && s[b] == fixed[b];
    j.p.push_back(match ? energy(model, s) : kNegInf);
  });
  log_normalize(j.p);
  for (double& v : j.p) v = std::exp(v);
  return j;
}

double joint_entropy(const JointDistribution& joint) {
  double h = 0.0;
  for (double p : joint.p) h -= xlogx(p);
  return h;
}

namespace {

std::vector<double> subset_marginal(const JointDistribution& joint, const std::vector<bool>& subset,
                                    std::vector<std::size_t>* index_of_state) {
  std::vector<std::size_t> stride(joint.cards.size(), 0);
  std::size_t size = 1;
  for (int k = static_cast<int>(joint.cards.size()) - 1; k >= 0; --k) {
    if (subset[k]) {
      stride[k] = size;
      size *= joint.cards[k];
    }
  }
  std::vector<double> m(size, 0.0);
  std::size_t flat = 0;
  for_each_state(joint.cards, [&](const std::vector<int>& s) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < s.size(); ++k) idx += stride[k] * s[k];
    m[idx] += joint.p[flat];
    if (index_of_state) index_of_state->push_back(idx);
    ++flat;
  });
  return m;
}

}  // namespace

double subset_entropy(const JointDistribution& joint, const std::vector<bool>& subset) {
  const auto m = subset_marginal(joint, subset, nullptr);
  double h = 0.0;
  for (double p : m) h -= xlogx(p);
  return h;
}

double conditional_entropy_exact(const JointDistribution& joint, const std::vector<bool>& is_max) {
  std::vector<std::size_t> idx;
  const auto pb = subset_marginal(joint, is_max, &idx);
  double h = 0.0;
  for (std::size_t k = 0; k < joint.p.size(); ++k) {
    const double p = joint.p[k];
    if (p > 0.0) h -= p * std::log(p / pb[idx[k]]);
  }
  return h;
}

double conditional_entropy_exact(const PairwiseModel& model, EnumerationLimits limits) {
  std::vector<bool> is_max(model.num_vars());
  for (int i = 0; i < model.num_vars(); ++i) is_max[i] = model.is_max(i);
  return conditional_entropy_exact(joint_distribution(model, limits), is_max);
}

double expected_energy(const PairwiseModel& model, const JointDistribution& joint) {
  double total = 0.0;
  std::size_t flat = 0;
  for_each_state(joint.cards, [&](const std::vector<int>& s) {
    const double p = joint.p[flat++];
    if (p > 0.0) total += p * energy(model, s);
  });
  return total;
}

Marginals marginals_of(const PairwiseModel& model, const JointDistribution& joint) {
  Marginals m;
  for (int i = 0; i < model.num_vars(); ++i) m.node.emplace_back(model.card(i), 0.0);
  for (int e = 0; e < model.num_edges(); ++e) {
    m.edge.emplace_back(static_cast<std::size_t>(model.card(model.edge(e).u)) * model.card(model.edge(e).v), 0.0);
  }
  std::size_t flat = 0;
  for_each_state(joint.cards, [&](const std::vector<int>& s) {
    const double p = joint.p[flat++];
    for (int i = 0; i < model.num_vars(); ++i) m.node[i][s[i]] += p;
    for (int e = 0; e < model.num_edges(); ++e) {
      const auto [u, v] = model.edge(e);
      m.edge[e][static_cast<std::size_t>(s[u]) * model.card(v) + s[v]] += p;
    }
  });
  return m;
}

double dual_objective(const PairwiseModel& model, const JointDistribution& joint) {
  std::vector<bool> is_max(model.num_vars());
  for (int i = 0; i < model.num_vars(); ++i) is_max[i] = model.is_max(i);
  return expected_energy(model, joint) + conditional_entropy_exact(joint, is_max);
}

MmapResult ab_tree_mmap(const PairwiseModel& model, const AbTreeResult& tree) {
  if (!tree.is_ab_tree) throw InvalidArgument("model is not an A-B tree");
  auto u = model.node_logpots();
  std::vector<int> up_dir(model.num_vars(), -1);
  for (int i = 0; i < model.num_vars(); ++i) {
    if (tree.parent[i] < 0) continue;
    for (const auto& inc : model.neighbors(i)) {
      if (inc.neighbor == tree.parent[i]) up_dir[i] = inc.out;
    }
  }
  MmapResult r;
  r.value = 0.0;
  for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
    const int c = *it;
    const int p = tree.parent[c];
    if (p < 0) {
      r.value += model.is_max(c) ? max_of(u[c]) : log_sum_exp(u[c]);
      continue;
    }
    add_into(u[p], eliminate(u[c], model.directed_table(up_dir[c]), model.card(p), model.is_max(c)));
  }
  FullConfig x(model.num_vars(), 0);
  r.config.assign(model.max_nodes().size(), 0);
  for (int i : tree.order) {
    if (!model.is_max(i)) continue;
    std::vector<double> score = u[i];
    if (tree.parent[i] >= 0) {
      const int p = tree.parent[i];
      const auto& t = model.directed_table(up_dir[i]);
      for (int k = 0; k < model.card(i); ++k) score[k] += t[static_cast<std::size_t>(k) * model.card(p) + x[p]];
    }
    x[i] = argmax_lowest(score);
    r.config[model.max_position(i)] = x[i];
  }
  return r;
}

}  // namespace mixmap
