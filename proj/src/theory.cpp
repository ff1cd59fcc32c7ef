#include "sic/eval/theory.hpp"

#include <algorithm>
#include <cmath>

#include "sic/errors.hpp"

namespace sic {

void validate_distribution(const JointDistribution& d) {
  if (d.rows < 1 || d.cols < 1 ||
      static_cast<int>(d.probs.size()) != d.rows * d.cols)
    throw ParameterError("JointDistribution: probs size does not match rows x cols");
  double sum = 0.0;
  for (double p : d.probs) {
    if (p < 0.0) throw DistributionError("JointDistribution: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw DistributionError("JointDistribution: mass is " + std::to_string(sum) + ", not 1");
}

namespace {

// Squared Frobenius distance between a 2x2 joint and (p1,1-p1) (x) (q1,1-q1).
double sq_error_2x2(const std::vector<double>& j, double p1, double q1) {
  double p[2] = {p1, 1.0 - p1};
  double q[2] = {q1, 1.0 - q1};
  double acc = 0.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      double d = j[static_cast<size_t>(r * 2 + c)] - p[r] * q[c];
      acc += d * d;
    }
  return acc;
}

// Exact minimizer of the squared error over p1 for fixed q (and symmetrically
// for q1 for fixed p): setting the derivative to zero gives
//   p1 = (sum_c q_c (J_0c - J_1c) + sum_c q_c^2) / (2 sum_c q_c^2),
// clamped to [0, 1]. A zero column marginal leaves p1 unconstrained.
double best_first_component(const std::vector<double>& j, double other1, bool for_rows) {
  double o[2] = {other1, 1.0 - other1};
  double sq = o[0] * o[0] + o[1] * o[1];
  if (sq <= 0.0) return 0.5;
  double num = 0.0;
  for (int c = 0; c < 2; ++c) {
    double j0 = for_rows ? j[static_cast<size_t>(c)] : j[static_cast<size_t>(c * 2)];
    double j1 = for_rows ? j[static_cast<size_t>(2 + c)] : j[static_cast<size_t>(c * 2 + 1)];
    num += o[c] * (j0 - j1);
  }
  return std::clamp((num + sq) / (2.0 * sq), 0.0, 1.0);
}

}  // namespace

ProductFit product_fit(const JointDistribution& dist) {
  validate_distribution(dist);
  if (dist.rows != 2 || dist.cols != 2)
    throw ParameterError("product_fit: expects a 2x2 joint distribution");
  const std::vector<double>& j = dist.probs;

  double best_p = 0.5, best_q = 0.5;
  double best = sq_error_2x2(j, best_p, best_q);
  const int kSteps = 1000;  // grid step 1e-3 over [0, 1]^2
  for (int a = 0; a <= kSteps; ++a) {
    double p1 = static_cast<double>(a) / kSteps;
    for (int b = 0; b <= kSteps; ++b) {
      double q1 = static_cast<double>(b) / kSteps;
      double e = sq_error_2x2(j, p1, q1);
      if (e < best) {
        best = e;
        best_p = p1;
        best_q = q1;
      }
    }
  }

  // alternating exact coordinate minimization from the grid optimum
  for (int it = 0; it < 200; ++it) {
    double np = best_first_component(j, best_q, true);
    double nq = best_first_component(j, np, false);
    double e = sq_error_2x2(j, np, nq);
    bool moved = std::abs(np - best_p) > 1e-15 || std::abs(nq - best_q) > 1e-15;
    best_p = np;
    best_q = nq;
    best = e;
    if (!moved) break;
  }

  ProductFit out;
  out.error = std::sqrt(best);
  out.p = {best_p, 1.0 - best_p};
  out.q = {best_q, 1.0 - best_q};
  return out;
}

RealizationResult signal_realization_check(const JointDistribution& target, long long n_signals,
                                           Rng& rng) {
  validate_distribution(target);
  if (n_signals < 1) throw ParameterError("signal_realization_check: n_signals must be >= 1");

  const size_t k = target.probs.size();
  RealizationResult out;
  out.cumulative.resize(k);
  double acc = 0.0;
  for (size_t i = 0; i < k; ++i) {
    acc += target.probs[i];
    out.cumulative[i] = acc;
  }
  out.cumulative.back() = 1.0;  // guard against rounding at the top end

  std::vector<long long> counts(k, 0);
  for (long long s = 0; s < n_signals; ++s) {
    double z = rng.normal();
    double u = 0.5 * (1.0 + std::erf(z / std::sqrt(2.0)));  // standard-normal CDF
    size_t idx = static_cast<size_t>(
        std::upper_bound(out.cumulative.begin(), out.cumulative.end(), u) -
        out.cumulative.begin());
    if (idx >= k) idx = k - 1;
    while (idx > 0 && target.probs[idx] <= 0.0) --idx;  // never land on zero mass
    counts[idx] += 1;
  }

  out.realized.resize(k);
  out.error = 0.0;
  for (size_t i = 0; i < k; ++i) {
    out.realized[i] = static_cast<double>(counts[i]) / static_cast<double>(n_signals);
    out.error = std::max(out.error, std::abs(out.realized[i] - target.probs[i]));
  }
  return out;
}

}  // namespace sic
