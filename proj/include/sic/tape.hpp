#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sic/tensor.hpp"

namespace sic::ad {

using NodeId = int32_t;

// Reverse-mode autodiff tape over batched matrices. Every node is a [rows,
// cols] block of doubles; a batch of vectors is one node with one row per
// sample. The graph is rebuilt from scratch for each optimization step, so
// nodes are append-only and backward() walks them in reverse creation order,
// which keeps gradient accumulation order deterministic.
class Tape {
 public:
  struct Dim {
    int rows = 0;
    int cols = 0;
    int size() const { return rows * cols; }
  };

  // Constant matrix copied onto the tape; receives no gradient.
  NodeId input(std::span<const double> data, int rows, int cols);
  NodeId scalar_input(double v);

  // Leaf bound to an external parameter tensor (rank 1 or 2). After
  // backward(), the accumulated gradient is written into t.grad.
  NodeId param(Tensor& t);

  // y = x * W^T + b for x [B, in], W [out, in], b [out].
  NodeId affine(NodeId w, NodeId b, NodeId x);

  NodeId relu(NodeId x);
  NodeId tanh_op(NodeId x);
  NodeId softmax_rows(NodeId x);
  NodeId log_op(NodeId x);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise
  NodeId scale(NodeId x, double c);

  NodeId concat_cols(std::span<const NodeId> parts);

  // out[r, 0] = x[r, idx[r]]
  NodeId gather_cols(NodeId x, std::span<const int> idx);

  NodeId mean_all(NodeId x);

  // (1/B) * sum_r w[r] * x[r, 0] for x [B, 1]
  NodeId weighted_mean(NodeId x, std::span<const double> w);

  // mean over all elements of (a - b)^2
  NodeId mse(NodeId a, NodeId b);

  // sum_i coeff[i] * x_i over scalar nodes
  NodeId add_scalars(std::span<const NodeId> xs, std::span<const double> coeffs);

  // Seeds d(loss)/d(loss) = 1 and propagates to every reachable node. Zeroes
  // the grad buffer of every bound parameter first, then accumulates, so
  // parameters that do not influence the loss end with exactly zero gradient.
  void backward(NodeId loss);

  std::span<const double> value(NodeId id) const;
  std::span<const double> grad(NodeId id) const;
  Dim dim(NodeId id) const;
  int node_count() const { return static_cast<int>(nodes_.size()); }

 private:
  enum class Op : uint8_t {
    Input,
    Param,
    Affine,
    Relu,
    Tanh,
    SoftmaxRows,
    Log,
    Add,
    Sub,
    Mul,
    Scale,
    ConcatCols,
    GatherCols,
    MeanAll,
    WeightedMean,
    Mse,
    AddScalars,
  };

  struct Node {
    Op op;
    Dim d;
    int p0 = -1, p1 = -1, p2 = -1;
    std::vector<int> parents;  // ConcatCols / AddScalars
    std::vector<int> idx;      // GatherCols
    std::vector<double> aux;   // Scale constant, WeightedMean weights, AddScalars coeffs
    std::vector<double> val;
    std::vector<double> grd;
    Tensor* bound = nullptr;
  };

  NodeId push(Node n);
  Node& at(NodeId id);
  const Node& at(NodeId id) const;
  void check_finite(const Node& n, const char* what) const;
  void backward_node(Node& n);

  std::vector<Node> nodes_;
};

}  // namespace sic::ad
