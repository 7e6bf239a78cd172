#include "mixmap/messages.hpp"

#include <algorithm>
#include <cmath>

#include "mixmap/errors.hpp"
#include "mixmap/logmath.hpp"

namespace mixmap {

namespace {

/// Entries where the log belief is -inf are skipped so that -inf - (-inf) never arises.
std::vector<double> sum_kernel(const PairwiseModel& model, const std::vector<double>& logb,
                               const std::vector<double>& back, int d, double w_i, double w_ij,
                               const std::vector<int>* restrict_to) {
  const int ci = model.card(model.source(d));
  const int cj = model.card(model.target(d));
  const auto& t = model.directed_table(d);
  std::vector<double> out(cj);
  std::vector<double> vals;
  vals.reserve(ci);
  for (int xj = 0; xj < cj; ++xj) {
    vals.clear();
    auto term = [&](int xi) {
      if (logb[xi] == kNegInf) return;
      vals.push_back(logb[xi] / w_i + (t[static_cast<std::size_t>(xi) * cj + xj] - back[xi]) / w_ij);
    };
    if (restrict_to) {
      for (int xi : *restrict_to) term(xi);
    } else {
      for (int xi = 0; xi < ci; ++xi) term(xi);
    }
    out[xj] = w_ij * log_sum_exp(vals);
  }
  max_normalize(out);
  return out;
}

std::vector<double> max_kernel(const PairwiseModel& model, const std::vector<double>& logb,
                               const std::vector<double>& back, int d, double rho) {
  const int ci = model.card(model.source(d));
  const int cj = model.card(model.target(d));
  const auto& t = model.directed_table(d);
  std::vector<double> out(cj, kNegInf);
  for (int xj = 0; xj < cj; ++xj) {
    for (int xi = 0; xi < ci; ++xi) {
      if (logb[xi] == kNegInf) continue;
      out[xj] = std::max(out[xj], rho * logb[xi] + t[static_cast<std::size_t>(xi) * cj + xj] - back[xi]);
    }
  }
  max_normalize(out);
  return out;
}

}  // namespace

MessageSet uniform_messages(const PairwiseModel& model) {
  MessageSet s;
  for (int d = 0; d < model.num_directed(); ++d) s.m.emplace_back(model.card(model.target(d)), 0.0);
  return s;
}

MessageSet random_messages(const PairwiseModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MessageSet s;
  for (int d = 0; d < model.num_directed(); ++d) {
    std::vector<double> v(model.card(model.target(d)));
    for (double& x : v) x = normal(rng);
    max_normalize(v);
    s.m.push_back(std::move(v));
  }
  return s;
}

std::vector<double> log_belief(const PairwiseModel& model, const MessageSet& msgs, int i) {
  std::vector<double> b = model.node_logpot(i);
  for (const auto& inc : model.neighbors(i)) {
    const auto& m = msgs.m[inc.in];
    for (std::size_t k = 0; k < b.size(); ++k) b[k] += m[k];
  }
  return b;
}

std::vector<double> weighted_update(const PairwiseModel& model, const EntropyWeights& weights,
                                    const MessageSet& msgs, int d) {
  const int i = model.source(d);
  const double w_i = weights.w_node(i);
  const double w_ij = weights.w_pair(d / 2);
  if (!(w_i > 0.0) || !(w_ij > 0.0)) {
    throw InvalidArgument("weighted update requires positive node and pair weights");
  }
  return sum_kernel(model, log_belief(model, msgs, i), msgs.m[PairwiseModel::reverse(d)], d, w_i, w_ij,
                    nullptr);
}

std::vector<double> mixed_update(const PairwiseModel& model, const std::vector<double>& rho,
                                 const MessageSet& msgs, int d, CrossRule rule) {
  const int i = model.source(d);
  const int j = model.target(d);
  const double r = rho[d / 2];
  const auto logb = log_belief(model, msgs, i);
  const auto& back = msgs.m[PairwiseModel::reverse(d)];
  if (model.is_sum(i)) return sum_kernel(model, logb, back, d, 1.0, r, nullptr);
  if (model.is_max(j) || rule == CrossRule::MaxProduct) return max_kernel(model, logb, back, d, r);
  const std::vector<int> best = argmax_set(logb);
  return sum_kernel(model, logb, back, d, 1.0, r, &best);
}

std::vector<double> max_product_update(const PairwiseModel& model, const MessageSet& msgs, int d) {
  return max_kernel(model, log_belief(model, msgs, model.source(d)), msgs.m[PairwiseModel::reverse(d)],
                    d, 1.0);
}

void damp_message(std::vector<double>& fresh, const std::vector<double>& old, double gamma) {
  if (gamma <= 0.0) return;
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    if (fresh[k] == kNegInf || old[k] == kNegInf) {
      fresh[k] = kNegInf;
    } else {
      fresh[k] = (1.0 - gamma) * fresh[k] + gamma * old[k];
    }
  }
  max_normalize(fresh);
}

double message_change(const std::vector<double>& a, const std::vector<double>& b) {
  double r = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = log_abs_diff(a[k], b[k]);
    r = std::max(r, std::isnan(diff) ? std::numeric_limits<double>::infinity() : diff);
  }
  return r;
}

namespace {

BeliefSet beliefs_from(const PairwiseModel& model, const MessageSet& msgs,
                       const std::vector<double>& node_scale, const std::vector<double>& pair_scale) {
  const int n = model.num_vars();
  BeliefSet out;
  std::vector<std::vector<double>> lognode(n);
  for (int i = 0; i < n; ++i) {
    auto b = log_belief(model, msgs, i);
    for (double& v : b) v /= node_scale[i];
    log_normalize(b);
    lognode[i] = b;
    out.node.push_back(exp_all(b));
  }
  for (int e = 0; e < model.num_edges(); ++e) {
    const auto [u, v] = model.edge(e);
    const int cu = model.card(u);
    const int cv = model.card(v);
    const auto& m_uv = msgs.m[2 * e];
    const auto& m_vu = msgs.m[2 * e + 1];
    std::vector<double> t(static_cast<std::size_t>(cu) * cv);
    for (int a = 0; a < cu; ++a) {
      for (int b = 0; b < cv; ++b) {
        const std::size_t k = static_cast<std::size_t>(a) * cv + b;
        if (lognode[u][a] == kNegInf || lognode[v][b] == kNegInf) {
          t[k] = kNegInf;
          continue;
        }
        t[k] = lognode[u][a] + lognode[v][b] + (model.edge_value(e, a, b) - m_uv[b] - m_vu[a]) / pair_scale[e];
      }
    }
    log_normalize(t);
    out.edge.push_back(exp_all(t));
  }
  return out;
}

}  // namespace

BeliefSet weighted_beliefs(const PairwiseModel& model, const EntropyWeights& weights,
                           const MessageSet& msgs) {
  std::vector<double> ns(model.num_vars());
  std::vector<double> ps(model.num_edges());
  for (int i = 0; i < model.num_vars(); ++i) ns[i] = weights.w_node(i);
  for (int e = 0; e < model.num_edges(); ++e) ps[e] = weights.w_pair(e);
  for (double w : ns) {
    if (!(w > 0.0)) throw InvalidArgument("weighted beliefs require positive node weights");
  }
  for (double w : ps) {
    if (!(w > 0.0)) throw InvalidArgument("weighted beliefs require positive pair weights");
  }
  return beliefs_from(model, msgs, ns, ps);
}

BeliefSet mixed_beliefs(const PairwiseModel& model, const std::vector<double>& rho, const MessageSet& msgs) {
  for (double r : rho) {
    if (!(r > 0.0)) throw InvalidArgument("mixed beliefs require positive rho");
  }
  return beliefs_from(model, msgs, std::vector<double>(model.num_vars(), 1.0), rho);
}

}  // namespace mixmap
