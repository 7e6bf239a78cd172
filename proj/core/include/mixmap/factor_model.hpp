#pragma once

// Higher-order factor models (UAI import target and junction-graph input).

#include <vector>

#include "mixmap/model.hpp"

namespace mixmap {

/// Log table over an ordered scope; the last scope variable varies fastest.
struct Factor {
  std::vector<int> scope;
  std::vector<double> table;
};

class FactorModel {
 public:
  FactorModel() = default;
  FactorModel(std::vector<int> cards, std::vector<Role> roles, std::vector<Factor> factors);

  int num_vars() const { return static_cast<int>(cards_.size()); }
  int card(int i) const { return cards_[i]; }
  const std::vector<int>& cards() const { return cards_; }
  Role role(int i) const { return roles_[i]; }
  const std::vector<Role>& roles() const { return roles_; }
  const std::vector<Factor>& factors() const { return factors_; }

  FactorModel with_roles(std::vector<Role> roles) const;

 private:
  std::vector<int> cards_;
  std::vector<Role> roles_;
  std::vector<Factor> factors_;
};

/// Flat index of `assignment` (indexed by variable id) into a table over `scope`.
std::size_t table_index(const std::vector<int>& scope, const std::vector<int>& cards,
                        const std::vector<int>& assignment);

double energy(const FactorModel& model, const FullConfig& x);

/// One unary factor per variable followed by one pairwise factor per edge.
FactorModel to_factor_model(const PairwiseModel& model);

/// Merges unary and pairwise factors into a PairwiseModel. Empty-scope
/// factors are dropped. Throws StructuralError on factors of arity above 2.
PairwiseModel to_pairwise(const FactorModel& model);

}  // namespace mixmap
