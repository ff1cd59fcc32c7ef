#include "sic/algo/returns.hpp"

#include "sic/errors.hpp"

namespace sic {

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw ParameterError("discounted_returns: gamma outside [0, 1]");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
    acc = rewards[static_cast<size_t>(t)] + gamma * acc;
    out[static_cast<size_t>(t)] = acc;
  }
  return out;
}

std::vector<double> gae_advantages(std::span<const double> rewards, std::span<const double> values,
                                   double gamma, double lambda) {
  if (values.size() != rewards.size() + 1)
    throw InputShapeError("gae_advantages: need len(values) == len(rewards) + 1");
  if (gamma < 0.0 || gamma > 1.0 || lambda < 0.0 || lambda > 1.0)
    throw ParameterError("gae_advantages: gamma and lambda must lie in [0, 1]");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
    double delta = rewards[static_cast<size_t>(t)] + gamma * values[static_cast<size_t>(t) + 1] -
                   values[static_cast<size_t>(t)];
    acc = delta + gamma * lambda * acc;
    out[static_cast<size_t>(t)] = acc;
  }
  return out;
}

double coma_advantage(std::span<const double> q, std::span<const double> probs, int taken) {
  if (q.size() != probs.size()) throw InputShapeError("coma_advantage: q/probs length mismatch");
  if (taken < 0 || taken >= static_cast<int>(q.size()))
    throw InputShapeError("coma_advantage: taken action out of range");
  double baseline = 0.0;
  for (size_t a = 0; a < q.size(); ++a) baseline += probs[a] * q[a];
  return q[static_cast<size_t>(taken)] - baseline;
}

}  // namespace sic
