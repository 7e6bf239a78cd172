#pragma once

// Log-domain message kernels shared by every BP variant.

#include <random>
#include <vector>

#include "mixmap/beliefs.hpp"
#include "mixmap/free_energy.hpp"
#include "mixmap/model.hpp"

namespace mixmap {

/// One log message per directed edge d, over the states of target(d).
/// Messages are kept max-normalized (largest entry 0).
struct MessageSet {
  std::vector<std::vector<double>> m;
};

MessageSet uniform_messages(const PairwiseModel& model);
/// i.i.d. standard normal log entries, then max-normalized.
MessageSet random_messages(const PairwiseModel& model, std::mt19937_64& rng);

/// theta_i + sum of all incoming messages.
std::vector<double> log_belief(const PairwiseModel& model, const MessageSet& msgs, int i);

/// How B -> A messages are formed in the zero-temperature updates.
enum class CrossRule { ArgmaxProduct, MaxProduct };

/// Weighted update for directed edge d = i -> j:
///   m(x_j) = w_ij log sum_{x_i} exp[ b_i(x_i) / w_i + (theta_ij - m_{j->i}(x_i)) / w_ij ]
/// with b_i = log_belief(i). Requires positive weights; throws InvalidArgument otherwise.
std::vector<double> weighted_update(const PairwiseModel& model, const EntropyWeights& weights,
                                    const MessageSet& msgs, int d);

/// Zero-temperature update dispatched on endpoint roles: sum-product out of Sum
/// nodes, max-product between Max nodes, and for Max -> Sum either the
/// argmax-restricted sum or plain max-product.
std::vector<double> mixed_update(const PairwiseModel& model, const std::vector<double>& rho,
                                 const MessageSet& msgs, int d,
                                 CrossRule rule = CrossRule::ArgmaxProduct);

/// Classic max-product update (every node treated as Max, rho = 1).
std::vector<double> max_product_update(const PairwiseModel& model, const MessageSet& msgs, int d);

/// m := (1 - gamma) fresh + gamma old (log domain), then max-normalized.
void damp_message(std::vector<double>& fresh, const std::vector<double>& old, double gamma);

/// Max absolute entrywise difference; matching infinities count as equal.
double message_change(const std::vector<double>& a, const std::vector<double>& b);

/// Local marginals tau_i ~ exp(b_i / w_i), tau_ij ~ tau_i tau_j exp((theta_ij - m_ij - m_ji) / w_ij).
BeliefSet weighted_beliefs(const PairwiseModel& model, const EntropyWeights& weights,
                           const MessageSet& msgs);

/// Mixed beliefs b_i ~ psi_i m_~i, b_ij ~ b_i b_j exp((theta_ij - m_ij - m_ji) / rho_ij).
BeliefSet mixed_beliefs(const PairwiseModel& model, const std::vector<double>& rho,
                        const MessageSet& msgs);

}  // namespace mixmap
