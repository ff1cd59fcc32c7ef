#include "sic/signal.hpp"

namespace sic {

Signal sample_signal(int dim, Rng& rng) {
  if (dim < 0) throw ParameterError("sample_signal: dim must be >= 0");
  Signal s;
  s.values.resize(static_cast<size_t>(dim));
  for (double& v : s.values) v = rng.normal();
  return s;
}

ad::NodeId unet_reconstruct(ad::Tape& tape, Mlp& unet, ad::NodeId state,
                            std::span<const ad::NodeId> hiddens) {
  int cols = tape.dim(state).cols;
  for (ad::NodeId h : hiddens) cols += tape.dim(h).cols;
  if (cols != unet.spec().input_dim())
    throw InputShapeError("unet_reconstruct: state+hidden layout does not match U-Net input");
  std::vector<ad::NodeId> parts;
  parts.reserve(hiddens.size() + 1);
  parts.push_back(state);
  parts.insert(parts.end(), hiddens.begin(), hiddens.end());
  ad::NodeId joined = tape.concat_cols(parts);
  return unet.forward(tape, joined).output;
}

ad::NodeId mi_loss_node(ad::Tape& tape, ad::NodeId zprime, std::span<const double> z_rows) {
  ad::Tape::Dim d = tape.dim(zprime);
  if (static_cast<int>(z_rows.size()) != d.size())
    throw InputShapeError("mi_loss: signal batch does not match reconstruction shape");
  ad::NodeId z = tape.input(z_rows, d.rows, d.cols);
  return tape.mse(zprime, z);
}

double mi_loss(std::span<const double> z, std::span<const double> zprime) {
  if (z.size() != zprime.size()) throw InputShapeError("mi_loss: length mismatch");
  if (z.empty()) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    double d = z[i] - zprime[i];
    acc += d * d;
  }
  return acc / static_cast<double>(z.size());
}

double mi_loss_batch(const std::vector<std::vector<double>>& z_steps,
                     const std::vector<std::vector<double>>& zprime_steps) {
  if (z_steps.size() != zprime_steps.size()) throw InputShapeError("mi_loss: step count mismatch");
  if (z_steps.empty()) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < z_steps.size(); ++i)
    acc += mi_loss(std::span<const double>(z_steps[i]), std::span<const double>(zprime_steps[i]));
  return acc / static_cast<double>(z_steps.size());
}

}  // namespace sic
