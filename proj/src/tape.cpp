#include "sic/tape.hpp"

#include <cmath>
#include <cstring>

namespace sic::ad {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ShapeError(msg);
}

}  // namespace

NodeId Tape::push(Node n) {
  check_finite(n, "forward");
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Tape::Node& Tape::at(NodeId id) {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size())) throw ShapeError("tape: bad node id");
  return nodes_[static_cast<size_t>(id)];
}

const Tape::Node& Tape::at(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size())) throw ShapeError("tape: bad node id");
  return nodes_[static_cast<size_t>(id)];
}

void Tape::check_finite(const Node& n, const char* what) const {
  for (double v : n.val) {
    if (!std::isfinite(v)) throw NumericalError(std::string("tape: non-finite value in ") + what);
  }
}

NodeId Tape::input(std::span<const double> data, int rows, int cols) {
  require(rows >= 1 && cols >= 1, "input: dims must be positive");
  require(static_cast<int>(data.size()) == rows * cols, "input: data length != rows*cols");
  Node n;
  n.op = Op::Input;
  n.d = {rows, cols};
  n.val.assign(data.begin(), data.end());
  return push(std::move(n));
}

NodeId Tape::scalar_input(double v) {
  double d[1] = {v};
  return input(std::span<const double>(d, 1), 1, 1);
}

NodeId Tape::param(Tensor& t) {
  if (t.shape.empty() || t.shape.size() > 2)
    throw ShapeError("param: only rank-1 and rank-2 tensors are supported");
  Node n;
  n.op = Op::Param;
  n.d = {t.rows(), t.cols()};
  n.val = t.values;
  n.bound = &t;
  return push(std::move(n));
}

NodeId Tape::affine(NodeId w, NodeId b, NodeId x) {
  const Node& wn = at(w);
  const Node& bn = at(b);
  const Node& xn = at(x);
  int out = wn.d.rows, in = wn.d.cols, batch = xn.d.rows;
  require(xn.d.cols == in, "affine: input cols != weight cols");
  require(bn.d.rows == 1 && bn.d.cols == out, "affine: bias length != weight rows");
  Node n;
  n.op = Op::Affine;
  n.d = {batch, out};
  n.p0 = w;
  n.p1 = b;
  n.p2 = x;
  n.val.assign(static_cast<size_t>(batch) * out, 0.0);
  const double* W = wn.val.data();
  const double* B = bn.val.data();
  const double* X = xn.val.data();
  double* Y = n.val.data();
  for (int r = 0; r < batch; ++r) {
    const double* xr = X + static_cast<size_t>(r) * in;
    double* yr = Y + static_cast<size_t>(r) * out;
    for (int o = 0; o < out; ++o) {
      const double* wo = W + static_cast<size_t>(o) * in;
      double acc = B[o];
      for (int i = 0; i < in; ++i) acc += xr[i] * wo[i];
      yr[o] = acc;
    }
  }
  return push(std::move(n));
}

NodeId Tape::relu(NodeId x) {
  const Node& xn = at(x);
  Node n;
  n.op = Op::Relu;
  n.d = xn.d;
  n.p0 = x;
  n.val.resize(xn.val.size());
  for (size_t i = 0; i < xn.val.size(); ++i) n.val[i] = xn.val[i] > 0.0 ? xn.val[i] : 0.0;
  return push(std::move(n));
}

NodeId Tape::tanh_op(NodeId x) {
  const Node& xn = at(x);
  Node n;
  n.op = Op::Tanh;
  n.d = xn.d;
  n.p0 = x;
  n.val.resize(xn.val.size());
  for (size_t i = 0; i < xn.val.size(); ++i) n.val[i] = std::tanh(xn.val[i]);
  return push(std::move(n));
}

NodeId Tape::softmax_rows(NodeId x) {
  const Node& xn = at(x);
  Node n;
  n.op = Op::SoftmaxRows;
  n.d = xn.d;
  n.p0 = x;
  n.val.resize(xn.val.size());
  int rows = xn.d.rows, cols = xn.d.cols;
  for (int r = 0; r < rows; ++r) {
    const double* xr = xn.val.data() + static_cast<size_t>(r) * cols;
    double* yr = n.val.data() + static_cast<size_t>(r) * cols;
    double mx = xr[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, xr[c]);
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      sum += yr[c];
    }
    for (int c = 0; c < cols; ++c) yr[c] /= sum;
  }
  return push(std::move(n));
}

NodeId Tape::log_op(NodeId x) {
  const Node& xn = at(x);
  Node n;
  n.op = Op::Log;
  n.d = xn.d;
  n.p0 = x;
  n.val.resize(xn.val.size());
  for (size_t i = 0; i < xn.val.size(); ++i) n.val[i] = std::log(xn.val[i]);
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Node& an = at(a);
  const Node& bn = at(b);
  require(an.d.rows == bn.d.rows && an.d.cols == bn.d.cols, "add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.d = an.d;
  n.p0 = a;
  n.p1 = b;
  n.val.resize(an.val.size());
  for (size_t i = 0; i < an.val.size(); ++i) n.val[i] = an.val[i] + bn.val[i];
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  const Node& an = at(a);
  const Node& bn = at(b);
  require(an.d.rows == bn.d.rows && an.d.cols == bn.d.cols, "sub: shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.d = an.d;
  n.p0 = a;
  n.p1 = b;
  n.val.resize(an.val.size());
  for (size_t i = 0; i < an.val.size(); ++i) n.val[i] = an.val[i] - bn.val[i];
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Node& an = at(a);
  const Node& bn = at(b);
  require(an.d.rows == bn.d.rows && an.d.cols == bn.d.cols, "mul: shape mismatch");
  Node n;
  n.op = Op::Mul;
  n.d = an.d;
  n.p0 = a;
  n.p1 = b;
  n.val.resize(an.val.size());
  for (size_t i = 0; i < an.val.size(); ++i) n.val[i] = an.val[i] * bn.val[i];
  return push(std::move(n));
}

NodeId Tape::scale(NodeId x, double c) {
  const Node& xn = at(x);
  Node n;
  n.op = Op::Scale;
  n.d = xn.d;
  n.p0 = x;
  n.aux = {c};
  n.val.resize(xn.val.size());
  for (size_t i = 0; i < xn.val.size(); ++i) n.val[i] = xn.val[i] * c;
  return push(std::move(n));
}

NodeId Tape::concat_cols(std::span<const NodeId> parts) {
  require(!parts.empty(), "concat_cols: no parts");
  int rows = at(parts[0]).d.rows;
  int cols = 0;
  for (NodeId p : parts) {
    require(at(p).d.rows == rows, "concat_cols: row mismatch");
    cols += at(p).d.cols;
  }
  Node n;
  n.op = Op::ConcatCols;
  n.d = {rows, cols};
  n.parents.assign(parts.begin(), parts.end());
  n.val.assign(static_cast<size_t>(rows) * cols, 0.0);
  int off = 0;
  for (NodeId p : parts) {
    const Node& pn = at(p);
    for (int r = 0; r < rows; ++r)
      std::memcpy(n.val.data() + static_cast<size_t>(r) * cols + off,
                  pn.val.data() + static_cast<size_t>(r) * pn.d.cols,
                  static_cast<size_t>(pn.d.cols) * sizeof(double));
    off += pn.d.cols;
  }
  return push(std::move(n));
}

NodeId Tape::gather_cols(NodeId x, std::span<const int> idx) {
  const Node& xn = at(x);
  require(static_cast<int>(idx.size()) == xn.d.rows, "gather_cols: one index per row required");
  for (int i : idx) require(i >= 0 && i < xn.d.cols, "gather_cols: index out of range");
  Node n;
  n.op = Op::GatherCols;
  n.d = {xn.d.rows, 1};
  n.p0 = x;
  n.idx.assign(idx.begin(), idx.end());
  n.val.resize(static_cast<size_t>(xn.d.rows));
  for (int r = 0; r < xn.d.rows; ++r)
    n.val[static_cast<size_t>(r)] = xn.val[static_cast<size_t>(r) * xn.d.cols + idx[r]];
  return push(std::move(n));
}

NodeId Tape::mean_all(NodeId x) {
  const Node& xn = at(x);
  Node n;
  n.op = Op::MeanAll;
  n.d = {1, 1};
  n.p0 = x;
  double acc = 0.0;
  for (double v : xn.val) acc += v;
  n.val = {acc / static_cast<double>(xn.val.size())};
  return push(std::move(n));
}

NodeId Tape::weighted_mean(NodeId x, std::span<const double> w) {
  const Node& xn = at(x);
  require(xn.d.cols == 1, "weighted_mean: expects a column");
  require(static_cast<int>(w.size()) == xn.d.rows, "weighted_mean: one weight per row required");
  Node n;
  n.op = Op::WeightedMean;
  n.d = {1, 1};
  n.p0 = x;
  n.aux.assign(w.begin(), w.end());
  double acc = 0.0;
  for (int r = 0; r < xn.d.rows; ++r) acc += w[r] * xn.val[static_cast<size_t>(r)];
  n.val = {acc / static_cast<double>(xn.d.rows)};
  return push(std::move(n));
}

NodeId Tape::mse(NodeId a, NodeId b) {
  const Node& an = at(a);
  const Node& bn = at(b);
  require(an.d.rows == bn.d.rows && an.d.cols == bn.d.cols, "mse: shape mismatch");
  Node n;
  n.op = Op::Mse;
  n.d = {1, 1};
  n.p0 = a;
  n.p1 = b;
  double acc = 0.0;
  for (size_t i = 0; i < an.val.size(); ++i) {
    double d = an.val[i] - bn.val[i];
    acc += d * d;
  }
  n.val = {acc / static_cast<double>(an.val.size())};
  return push(std::move(n));
}

NodeId Tape::add_scalars(std::span<const NodeId> xs, std::span<const double> coeffs) {
  require(!xs.empty() && xs.size() == coeffs.size(), "add_scalars: xs/coeffs length mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const Node& xn = at(xs[i]);
    require(xn.d.size() == 1, "add_scalars: inputs must be scalars");
    acc += coeffs[i] * xn.val[0];
  }
  Node n;
  n.op = Op::AddScalars;
  n.d = {1, 1};
  n.parents.assign(xs.begin(), xs.end());
  n.aux.assign(coeffs.begin(), coeffs.end());
  n.val = {acc};
  return push(std::move(n));
}

void Tape::backward(NodeId loss) {
  Node& ln = at(loss);
  if (ln.d.size() != 1) throw ShapeError("backward: loss must be a scalar");

  for (Node& n : nodes_) {
    if (n.op == Op::Param && n.bound) n.bound->zero_grad();
  }
  for (Node& n : nodes_) n.grd.assign(n.val.size(), 0.0);
  ln.grd[0] = 1.0;

  for (NodeId id = loss; id >= 0; --id) backward_node(nodes_[static_cast<size_t>(id)]);

  for (Node& n : nodes_) {
    if (n.op == Op::Param && n.bound) {
      for (size_t i = 0; i < n.grd.size(); ++i) n.bound->grad[i] += n.grd[i];
    }
  }
}

void Tape::backward_node(Node& n) {
  bool any = false;
  for (double g : n.grd) {
    if (g != 0.0) {
      any = true;
      break;
    }
  }
  if (!any) return;

  switch (n.op) {
    case Op::Input:
    case Op::Param:
      break;
    case Op::Affine: {
      Node& wn = at(n.p0);
      Node& bn = at(n.p1);
      Node& xn = at(n.p2);
      int out = wn.d.rows, in = wn.d.cols, batch = xn.d.rows;
      const double* G = n.grd.data();
      const double* W = wn.val.data();
      const double* X = xn.val.data();
      for (int r = 0; r < batch; ++r) {
        const double* gr = G + static_cast<size_t>(r) * out;
        const double* xr = X + static_cast<size_t>(r) * in;
        double* dxr = xn.grd.data() + static_cast<size_t>(r) * in;
        for (int o = 0; o < out; ++o) {
          double g = gr[o];
          if (g == 0.0) continue;
          const double* wo = W + static_cast<size_t>(o) * in;
          double* dwo = wn.grd.data() + static_cast<size_t>(o) * in;
          for (int i = 0; i < in; ++i) {
            dxr[i] += g * wo[i];
            dwo[i] += g * xr[i];
          }
          bn.grd[static_cast<size_t>(o)] += g;
        }
      }
      break;
    }
    case Op::Relu: {
      Node& xn = at(n.p0);
      for (size_t i = 0; i < n.grd.size(); ++i)
        if (xn.val[i] > 0.0) xn.grd[i] += n.grd[i];
      break;
    }
    case Op::Tanh: {
      Node& xn = at(n.p0);
      for (size_t i = 0; i < n.grd.size(); ++i)
        xn.grd[i] += n.grd[i] * (1.0 - n.val[i] * n.val[i]);
      break;
    }
    case Op::SoftmaxRows: {
      Node& xn = at(n.p0);
      int rows = n.d.rows, cols = n.d.cols;
      for (int r = 0; r < rows; ++r) {
        const double* y = n.val.data() + static_cast<size_t>(r) * cols;
        const double* g = n.grd.data() + static_cast<size_t>(r) * cols;
        double* dx = xn.grd.data() + static_cast<size_t>(r) * cols;
        double dot = 0.0;
        for (int c = 0; c < cols; ++c) dot += g[c] * y[c];
        for (int c = 0; c < cols; ++c) dx[c] += y[c] * (g[c] - dot);
      }
      break;
    }
    case Op::Log: {
      Node& xn = at(n.p0);
      for (size_t i = 0; i < n.grd.size(); ++i) xn.grd[i] += n.grd[i] / xn.val[i];
      break;
    }
    case Op::Add: {
      Node& an = at(n.p0);
      Node& bn = at(n.p1);
      for (size_t i = 0; i < n.grd.size(); ++i) {
        an.grd[i] += n.grd[i];
        bn.grd[i] += n.grd[i];
      }
      break;
    }
    case Op::Sub: {
      Node& an = at(n.p0);
      Node& bn = at(n.p1);
      for (size_t i = 0; i < n.grd.size(); ++i) {
        an.grd[i] += n.grd[i];
        bn.grd[i] -= n.grd[i];
      }
      break;
    }
    case Op::Mul: {
      Node& an = at(n.p0);
      Node& bn = at(n.p1);
      for (size_t i = 0; i < n.grd.size(); ++i) {
        an.grd[i] += n.grd[i] * bn.val[i];
        bn.grd[i] += n.grd[i] * an.val[i];
      }
      break;
    }
    case Op::Scale: {
      Node& xn = at(n.p0);
      double c = n.aux[0];
      for (size_t i = 0; i < n.grd.size(); ++i) xn.grd[i] += n.grd[i] * c;
      break;
    }
    case Op::ConcatCols: {
      int cols = n.d.cols, rows = n.d.rows;
      int off = 0;
      for (int p : n.parents) {
        Node& pn = at(p);
        for (int r = 0; r < rows; ++r) {
          const double* src = n.grd.data() + static_cast<size_t>(r) * cols + off;
          double* dst = pn.grd.data() + static_cast<size_t>(r) * pn.d.cols;
          for (int c = 0; c < pn.d.cols; ++c) dst[c] += src[c];
        }
        off += pn.d.cols;
      }
      break;
    }
    case Op::GatherCols: {
      Node& xn = at(n.p0);
      for (int r = 0; r < n.d.rows; ++r)
        xn.grd[static_cast<size_t>(r) * xn.d.cols + n.idx[static_cast<size_t>(r)]] +=
            n.grd[static_cast<size_t>(r)];
      break;
    }
    case Op::MeanAll: {
      Node& xn = at(n.p0);
      double g = n.grd[0] / static_cast<double>(xn.val.size());
      for (size_t i = 0; i < xn.grd.size(); ++i) xn.grd[i] += g;
      break;
    }
    case Op::WeightedMean: {
      Node& xn = at(n.p0);
      double g = n.grd[0] / static_cast<double>(xn.d.rows);
      for (int r = 0; r < xn.d.rows; ++r)
        xn.grd[static_cast<size_t>(r)] += g * n.aux[static_cast<size_t>(r)];
      break;
    }
    case Op::Mse: {
      Node& an = at(n.p0);
      Node& bn = at(n.p1);
      double g = 2.0 * n.grd[0] / static_cast<double>(an.val.size());
      for (size_t i = 0; i < an.val.size(); ++i) {
        double d = g * (an.val[i] - bn.val[i]);
        an.grd[i] += d;
        bn.grd[i] -= d;
      }
      break;
    }
    case Op::AddScalars: {
      for (size_t i = 0; i < n.parents.size(); ++i)
        at(n.parents[i]).grd[0] += n.grd[0] * n.aux[i];
      break;
    }
  }
}

std::span<const double> Tape::value(NodeId id) const {
  const Node& n = at(id);
  return {n.val.data(), n.val.size()};
}

std::span<const double> Tape::grad(NodeId id) const {
  const Node& n = at(id);
  return {n.grd.data(), n.grd.size()};
}

Tape::Dim Tape::dim(NodeId id) const { return at(id).d; }

}  // namespace sic::ad
