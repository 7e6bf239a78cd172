#include "mixmap/factor_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "mixmap/errors.hpp"

namespace mixmap {

FactorModel::FactorModel(std::vector<int> cards, std::vector<Role> roles, std::vector<Factor> factors)
    : cards_(std::move(cards)), roles_(std::move(roles)), factors_(std::move(factors)) {
  if (roles_.size() != cards_.size()) throw InvalidArgument("roles and cardinalities differ in length");
  for (std::size_t i = 0; i < cards_.size(); ++i) {
    if (cards_[i] < 1) throw InvalidArgument("variable " + std::to_string(i) + " has cardinality < 1");
  }
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const auto& scope = factors_[f].scope;
    std::set<int> unique(scope.begin(), scope.end());
    if (unique.size() != scope.size()) throw InvalidArgument("factor " + std::to_string(f) + " repeats a variable");
    std::size_t size = 1;
    for (int v : scope) {
      if (v < 0 || v >= num_vars()) throw InvalidArgument("factor " + std::to_string(f) + " has an invalid variable");
      size *= static_cast<std::size_t>(cards_[v]);
    }
    if (factors_[f].table.size() != size) {
      throw StructuralError("factor " + std::to_string(f) + " has " + std::to_string(factors_[f].table.size()) +
                            " entries, expected " + std::to_string(size));
    }
  }
}

FactorModel FactorModel::with_roles(std::vector<Role> roles) const {
  return FactorModel(cards_, std::move(roles), factors_);
}

std::size_t table_index(const std::vector<int>& scope, const std::vector<int>& cards,
                        const std::vector<int>& assignment) {
  std::size_t idx = 0;
  for (int v : scope) idx = idx * static_cast<std::size_t>(cards[v]) + assignment[v];
  return idx;
}

double energy(const FactorModel& model, const FullConfig& x) {
  if (x.size() != static_cast<std::size_t>(model.num_vars())) {
    throw InvalidConfiguration("configuration length does not match the model");
  }
  for (int i = 0; i < model.num_vars(); ++i) {
    if (x[i] < 0 || x[i] >= model.card(i)) throw InvalidConfiguration("state out of range for variable " + std::to_string(i));
  }
  double total = 0.0;
  for (const auto& f : model.factors()) total += f.table[table_index(f.scope, model.cards(), x)];
  return total;
}

FactorModel to_factor_model(const PairwiseModel& model) {
  std::vector<Factor> factors;
  for (int i = 0; i < model.num_vars(); ++i) factors.push_back({{i}, model.node_logpot(i)});
  for (int e = 0; e < model.num_edges(); ++e) {
    factors.push_back({{model.edge(e).u, model.edge(e).v}, model.edge_logpot(e)});
  }
  return FactorModel(model.cards(), model.roles(), std::move(factors));
}

PairwiseModel to_pairwise(const FactorModel& model) {
  const int n = model.num_vars();
  std::vector<std::vector<double>> unary(n);
  for (int i = 0; i < n; ++i) unary[i].assign(model.card(i), 0.0);
  std::map<std::pair<int, int>, std::vector<double>> pairs;
  std::vector<std::pair<int, int>> order;
  for (std::size_t f = 0; f < model.factors().size(); ++f) {
    const auto& fac = model.factors()[f];
    if (fac.scope.size() > 2) {
      throw StructuralError("factor " + std::to_string(f) + " has arity " + std::to_string(fac.scope.size()) +
                            "; pairwise algorithms need arity <= 2");
    }
    if (fac.scope.empty()) continue;
    if (fac.scope.size() == 1) {
      for (int k = 0; k < model.card(fac.scope[0]); ++k) unary[fac.scope[0]][k] += fac.table[k];
      continue;
    }
    const int a = fac.scope[0];
    const int b = fac.scope[1];
    const int u = std::min(a, b);
    const int v = std::max(a, b);
    auto [it, fresh] = pairs.try_emplace({u, v}, std::vector<double>(static_cast<std::size_t>(model.card(u)) * model.card(v), 0.0));
    if (fresh) order.push_back({u, v});
    for (int xa = 0; xa < model.card(a); ++xa) {
      for (int xb = 0; xb < model.card(b); ++xb) {
        const int xu = a == u ? xa : xb;
        const int xv = a == u ? xb : xa;
        it->second[static_cast<std::size_t>(xu) * model.card(v) + xv] +=
            fac.table[static_cast<std::size_t>(xa) * model.card(b) + xb];
      }
    }
  }
  std::vector<Edge> edges;
  std::vector<std::vector<double>> tables;
  for (const auto& key : order) {
    edges.push_back({key.first, key.second});
    tables.push_back(pairs[key]);
  }
  return PairwiseModel(model.cards(), model.roles(), std::move(unary), std::move(edges), std::move(tables));
}

}  // namespace mixmap
