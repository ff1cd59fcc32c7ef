#include "sic/gumbel.hpp"

#include <algorithm>
#include <cmath>

#include "sic/errors.hpp"

namespace sic {

double gumbel_noise(Rng& rng) {
  double u = std::clamp(rng.uniform(), 1e-12, 1.0 - 1e-12);
  return -std::log(-std::log(u));
}

ad::NodeId gumbel_softmax_node(ad::Tape& tape, ad::NodeId logits, std::span<const double> noise,
                               double temperature) {
  if (temperature <= 0.0) throw ParameterError("gumbel_softmax: temperature must be positive");
  ad::Tape::Dim d = tape.dim(logits);
  if (static_cast<int>(noise.size()) != d.size())
    throw InputShapeError("gumbel_softmax: noise length != logits size");
  ad::NodeId g = tape.input(noise, d.rows, d.cols);
  ad::NodeId shifted = tape.add(logits, g);
  ad::NodeId scaled = tape.scale(shifted, 1.0 / temperature);
  return tape.softmax_rows(scaled);
}

std::vector<double> gumbel_softmax_sample(std::span<const double> logits, double temperature,
                                          Rng& rng) {
  if (temperature <= 0.0) throw ParameterError("gumbel_softmax: temperature must be positive");
  std::vector<double> y(logits.size());
  double mx = -1e300;
  for (size_t i = 0; i < logits.size(); ++i) {
    y[i] = (logits[i] + gumbel_noise(rng)) / temperature;
    mx = std::max(mx, y[i]);
  }
  double sum = 0.0;
  for (double& v : y) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : y) v /= sum;
  return y;
}

std::vector<double> relaxed_softmax(std::span<const double> logits, double temperature) {
  if (temperature <= 0.0) throw ParameterError("gumbel_softmax: temperature must be positive");
  std::vector<double> y(logits.size());
  double mx = -1e300;
  for (size_t i = 0; i < logits.size(); ++i) {
    y[i] = logits[i] / temperature;
    mx = std::max(mx, y[i]);
  }
  double sum = 0.0;
  for (double& v : y) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : y) v /= sum;
  return y;
}

}  // namespace sic
