#pragma once

#include <vector>

#include "sic/rng.hpp"

namespace sic {

// Empirical (or exact) distribution over a team's joint actions, laid out
// row-major over the two members' individual actions.
struct JointDistribution {
  std::vector<double> probs;
  int rows = 0;
  int cols = 0;
  long long sample_count = 0;
};

// ParameterError when shape and probs disagree; DistributionError when any
// entry is negative or the mass is not 1 within 1e-9.
void validate_distribution(const JointDistribution& d);

struct ProductFit {
  double error = 0.0;      // Frobenius distance to the closest product
  std::vector<double> p;   // row marginal of the best product
  std::vector<double> q;   // column marginal
};

// Closest independent-play distribution to a 2x2 joint: minimizes
// ||J - p (x) q|| over marginals via a dense grid over (p1, q1) with step
// 1e-3, refined by alternating exact coordinate minimization. Error near zero
// certifies the joint is realizable without any coordination device; a large
// error certifies that correlation was necessary.
ProductFit product_fit(const JointDistribution& dist);

struct RealizationResult {
  std::vector<double> cumulative;  // interval upper bounds, one per joint action
  std::vector<double> realized;    // Monte-Carlo frequencies
  double error = 0.0;              // max absolute deviation from the target
};

// Constructs the deterministic map from a 1-D standard-normal signal to joint
// actions that realizes `target`: the line is cut into consecutive intervals
// whose normal masses equal the target probabilities. Draws n_signals probes
// and reports how closely the realized frequencies match; the deviation is
// bounded by 2/sqrt(n_signals) with overwhelming probability.
RealizationResult signal_realization_check(const JointDistribution& target, long long n_signals,
                                           Rng& rng);

}  // namespace sic
