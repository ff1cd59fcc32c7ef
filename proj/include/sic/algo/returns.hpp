#pragma once

#include <span>
#include <vector>

namespace sic {

// G_t = sum_{k>=t} gamma^(k-t) * r_k
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

// Generalized advantage estimation. values holds V(s_0..s_T) with the
// bootstrap value last, so len(values) == len(rewards) + 1.
std::vector<double> gae_advantages(std::span<const double> rewards, std::span<const double> values,
                                   double gamma, double lambda);

// Counterfactual advantage: Q at the taken action minus the policy-weighted
// mean of Q over all actions.
double coma_advantage(std::span<const double> q, std::span<const double> probs, int taken);

}  // namespace sic
