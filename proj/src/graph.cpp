#include "bnaf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace bnaf {

namespace {

double softplus1(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid1(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logaddexp1(double x, double y) {
  const double m = std::max(x, y);
  return m + std::log1p(std::exp(-std::abs(x - y)));
}

enum class Bcast { Same, ScalarA, ScalarB };

Bcast classify(const Tensor& a, const Tensor& b, const char* op_name) {
  if (a.same_shape(b)) return Bcast::Same;
  // Checked second so a one-element left operand keeps its shape against a
  // one-element right operand.
  if (b.numel() == 1) return Bcast::ScalarB;
  if (a.numel() == 1) return Bcast::ScalarA;
  throw DimensionError(std::string(op_name) + ": shapes " + shape_str(a.shape()) + " and " +
                       shape_str(b.shape()) + " do not match");
}

Graph* same_graph(Value a, Value b) {
  if (a.graph == nullptr || b.graph == nullptr || a.graph != b.graph) {
    throw ContractError("operands belong to different graphs");
  }
  return a.graph;
}

Graph* graph_of(Value a) {
  if (a.graph == nullptr) throw ContractError("operation on empty Value");
  return a.graph;
}

struct AxisSplit {
  Index outer, red, inner;
};

AxisSplit split_axis(const Shape& shape, Index axis, const char* op_name) {
  if (axis < 0 || axis >= static_cast<Index>(shape.size())) {
    throw DimensionError(std::string(op_name) + ": axis " + std::to_string(axis) +
                         " invalid for shape " + shape_str(shape));
  }
  AxisSplit s{1, shape[static_cast<size_t>(axis)], 1};
  for (Index i = 0; i < axis; ++i) s.outer *= shape[static_cast<size_t>(i)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < shape.size(); ++i) s.inner *= shape[i];
  if (s.red == 0) throw DomainError(std::string(op_name) + ": empty reduction axis");
  return s;
}

Shape drop_axis(const Shape& shape, Index axis) {
  Shape out;
  for (Index i = 0; i < static_cast<Index>(shape.size()); ++i) {
    if (i != axis) out.push_back(shape[static_cast<size_t>(i)]);
  }
  return out;
}

}  // namespace

const Graph::Node& Graph::node(Value v) const {
  check(v);
  return nodes_[static_cast<size_t>(v.id)];
}

void Graph::check(Value v) const {
  if (v.graph != this || v.id < 0 || static_cast<size_t>(v.id) >= nodes_.size()) {
    throw ContractError("Value does not belong to this graph");
  }
}

Value Graph::emit(Op op, Tensor value, int in0, int in1, bool requires_grad, Index p0, Index p1,
                  std::shared_ptr<const std::vector<Index>> indices) {
  Node n;
  n.op = op;
  n.in0 = in0;
  n.in1 = in1;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.p0 = p0;
  n.p1 = p1;
  n.indices = std::move(indices);
  nodes_.push_back(std::move(n));
  return Value{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor& Graph::grad_buffer(int id) {
  if (!has_adjoint_[static_cast<size_t>(id)]) {
    adjoints_[static_cast<size_t>(id)] = Tensor::zeros(nodes_[static_cast<size_t>(id)].value.shape());
    has_adjoint_[static_cast<size_t>(id)] = 1;
  }
  return adjoints_[static_cast<size_t>(id)];
}

Tensor Graph::adjoint(Value v) const {
  check(v);
  if (adjoints_.size() == nodes_.size() && has_adjoint_[static_cast<size_t>(v.id)]) {
    return adjoints_[static_cast<size_t>(v.id)];
  }
  return Tensor::zeros(node(v).value.shape());
}

void Graph::backward(Value root) {
  check(root);
  const Node& r = nodes_[static_cast<size_t>(root.id)];
  if (r.value.numel() != 1) {
    throw ContractError("backward root must be scalar, got shape " + shape_str(r.value.shape()));
  }
  adjoints_.assign(nodes_.size(), Tensor{});
  has_adjoint_.assign(nodes_.size(), 0);
  grad_buffer(root.id) = Tensor::ones(r.value.shape());
  for (int id = root.id; id >= 0; --id) {
    if (has_adjoint_[static_cast<size_t>(id)]) backward_node(id);
  }
}

void Graph::backward_node(int id) {
  const Node& n = nodes_[static_cast<size_t>(id)];
  const Tensor& g = adjoints_[static_cast<size_t>(id)];
  auto wants = [&](int in) {
    return in >= 0 && nodes_[static_cast<size_t>(in)].requires_grad;
  };
  const Tensor* av = n.in0 >= 0 ? &nodes_[static_cast<size_t>(n.in0)].value : nullptr;
  const Tensor* bv = n.in1 >= 0 ? &nodes_[static_cast<size_t>(n.in1)].value : nullptr;

  switch (n.op) {
    case Op::Leaf:
      break;

    case Op::Add:
    case Op::Sub: {
      const double sign_b = n.op == Op::Add ? 1.0 : -1.0;
      if (wants(n.in0)) {
        Tensor& ga = grad_buffer(n.in0);
        if (av->numel() == 1) ga.at(0) += g.arr().sum();
        else ga.arr() += g.arr();
      }
      if (wants(n.in1)) {
        Tensor& gb = grad_buffer(n.in1);
        if (bv->numel() == 1) gb.at(0) += sign_b * g.arr().sum();
        else gb.arr() += sign_b * g.arr();
      }
      break;
    }

    case Op::Mul: {
      const Bcast bc = classify(*av, *bv, "mul");
      if (wants(n.in0)) {
        Tensor& ga = grad_buffer(n.in0);
        if (bc == Bcast::ScalarA) ga.at(0) += (g.arr() * bv->arr()).sum();
        else if (bc == Bcast::ScalarB) ga.arr() += g.arr() * bv->at(0);
        else ga.arr() += g.arr() * bv->arr();
      }
      if (wants(n.in1)) {
        Tensor& gb = grad_buffer(n.in1);
        if (bc == Bcast::ScalarB) gb.at(0) += (g.arr() * av->arr()).sum();
        else if (bc == Bcast::ScalarA) gb.arr() += g.arr() * av->at(0);
        else gb.arr() += g.arr() * av->arr();
      }
      break;
    }

    case Op::Neg:
      if (wants(n.in0)) grad_buffer(n.in0).arr() -= g.arr();
      break;
    case Op::Exp:
      if (wants(n.in0)) grad_buffer(n.in0).arr() += g.arr() * n.value.arr();
      break;
    case Op::Log:
      if (wants(n.in0)) grad_buffer(n.in0).arr() += g.arr() / av->arr();
      break;
    case Op::Tanh:
      if (wants(n.in0)) grad_buffer(n.in0).arr() += g.arr() * (1.0 - n.value.arr().square());
      break;
    case Op::Softplus:
      if (wants(n.in0)) {
        Tensor& ga = grad_buffer(n.in0);
        for (Index i = 0; i < g.numel(); ++i) ga.at(i) += g.at(i) * sigmoid1(av->at(i));
      }
      break;
    case Op::Sigmoid:
      if (wants(n.in0)) grad_buffer(n.in0).arr() += g.arr() * n.value.arr() * (1.0 - n.value.arr());
      break;
    case Op::Sqrt:
      if (wants(n.in0)) grad_buffer(n.in0).arr() += g.arr() * 0.5 / n.value.arr();
      break;
    case Op::Sin:
      if (wants(n.in0)) grad_buffer(n.in0).arr() += g.arr() * av->arr().cos();
      break;

    case Op::LogAddExp: {
      const Bcast bc = classify(*av, *bv, "logaddexp");
      if (wants(n.in0)) {
        Tensor& ga = grad_buffer(n.in0);
        if (bc == Bcast::ScalarA) {
          double acc = 0.0;
          for (Index i = 0; i < g.numel(); ++i) acc += g.at(i) * std::exp(av->at(0) - n.value.at(i));
          ga.at(0) += acc;
        } else {
          for (Index i = 0; i < g.numel(); ++i) ga.at(i) += g.at(i) * std::exp(av->at(i) - n.value.at(i));
        }
      }
      if (wants(n.in1)) {
        Tensor& gb = grad_buffer(n.in1);
        if (bc == Bcast::ScalarB) {
          double acc = 0.0;
          for (Index i = 0; i < g.numel(); ++i) acc += g.at(i) * std::exp(bv->at(0) - n.value.at(i));
          gb.at(0) += acc;
        } else {
          for (Index i = 0; i < g.numel(); ++i) gb.at(i) += g.at(i) * std::exp(bv->at(i) - n.value.at(i));
        }
      }
      break;
    }

    case Op::MatMul: {
      if (wants(n.in0)) grad_buffer(n.in0).mat().noalias() += g.mat() * bv->mat().transpose();
      if (wants(n.in1)) grad_buffer(n.in1).mat().noalias() += av->mat().transpose() * g.mat();
      break;
    }

    case Op::Transpose:
      if (wants(n.in0)) grad_buffer(n.in0).mat().noalias() += g.mat().transpose();
      break;

    case Op::Reshape:
      if (wants(n.in0)) grad_buffer(n.in0).arr() += g.arr();
      break;

    case Op::TileRows: {
      if (wants(n.in0)) {
        Tensor& ga = grad_buffer(n.in0);
        const Index w = av->numel();
        for (Index k = 0; k < n.p0; ++k) {
          ga.arr() += Eigen::Map<const Eigen::ArrayXd>(g.data() + k * w, w);
        }
      }
      break;
    }

    case Op::TileCols: {
      if (wants(n.in0)) {
        Tensor& ga = grad_buffer(n.in0);
        const Index m = av->numel();
        const Index cols = n.p0;
        for (Index r = 0; r < m; ++r) {
          double acc = 0.0;
          for (Index c = 0; c < cols; ++c) acc += g.at(r * cols + c);
          ga.at(r) += acc;
        }
      }
      break;
    }

    case Op::RepeatColsGrouped: {
      if (wants(n.in0)) {
        Tensor& ga = grad_buffer(n.in0);
        const Index a_rep = n.p0, b_blk = n.p1;
        const Index rows = av->extent(0), w_in = av->extent(1);
        const Index groups = w_in / b_blk;
        const Index w_out = w_in * a_rep;
        for (Index row = 0; row < rows; ++row) {
          for (Index grp = 0; grp < groups; ++grp) {
            for (Index c = 0; c < b_blk; ++c) {
              double acc = 0.0;
              for (Index r = 0; r < a_rep; ++r) {
                acc += g.at(row * w_out + (grp * a_rep + r) * b_blk + c);
              }
              ga.at(row * w_in + grp * b_blk + c) += acc;
            }
          }
        }
      }
      break;
    }

    case Op::SelectCols: {
      if (wants(n.in0)) {
        Tensor& ga = grad_buffer(n.in0);
        const auto& idx = *n.indices;
        const Index rows = av->extent(0), cols_in = av->extent(1);
        const Index cols_out = static_cast<Index>(idx.size());
        for (Index r = 0; r < rows; ++r) {
          for (Index j = 0; j < cols_out; ++j) {
            ga.at(r * cols_in + idx[static_cast<size_t>(j)]) += g.at(r * cols_out + j);
          }
        }
      }
      break;
    }

    case Op::LogSumExp: {
      if (wants(n.in0)) {
        Tensor& ga = grad_buffer(n.in0);
        const AxisSplit s = split_axis(av->shape(), n.p0, "logsumexp");
        for (Index o = 0; o < s.outer; ++o) {
          for (Index i = 0; i < s.inner; ++i) {
            const double gout = g.at(o * s.inner + i);
            const double out = n.value.at(o * s.inner + i);
            for (Index r = 0; r < s.red; ++r) {
              const Index flat = (o * s.red + r) * s.inner + i;
              ga.at(flat) += gout * std::exp(av->at(flat) - out);
            }
          }
        }
      }
      break;
    }

    case Op::Sum:
    case Op::Mean: {
      if (wants(n.in0)) {
        Tensor& ga = grad_buffer(n.in0);
        if (n.p0 < 0) {  // reduce over all entries
          const double scale = n.op == Op::Mean ? 1.0 / static_cast<double>(av->numel()) : 1.0;
          ga.arr() += g.at(0) * scale;
        } else {
          const AxisSplit s = split_axis(av->shape(), n.p0, "reduce");
          const double scale = n.op == Op::Mean ? 1.0 / static_cast<double>(s.red) : 1.0;
          for (Index o = 0; o < s.outer; ++o) {
            for (Index r = 0; r < s.red; ++r) {
              for (Index i = 0; i < s.inner; ++i) {
                ga.at((o * s.red + r) * s.inner + i) += g.at(o * s.inner + i) * scale;
              }
            }
          }
        }
      }
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Op builders
// ---------------------------------------------------------------------------

namespace {

Value binary_elementwise(Op op, Value a, Value b, const char* name) {
  Graph* g = same_graph(a, b);
  const Tensor& av = g->value(a);
  const Tensor& bv = g->value(b);
  const Bcast bc = classify(av, bv, name);
  const Tensor& shape_src = bc == Bcast::ScalarA ? bv : av;
  Tensor out(shape_src.shape());
  switch (op) {
    case Op::Add:
      if (bc == Bcast::ScalarA) out.arr() = av.at(0) + bv.arr();
      else if (bc == Bcast::ScalarB) out.arr() = av.arr() + bv.at(0);
      else out.arr() = av.arr() + bv.arr();
      break;
    case Op::Sub:
      if (bc == Bcast::ScalarA) out.arr() = av.at(0) - bv.arr();
      else if (bc == Bcast::ScalarB) out.arr() = av.arr() - bv.at(0);
      else out.arr() = av.arr() - bv.arr();
      break;
    case Op::Mul:
      if (bc == Bcast::ScalarA) out.arr() = av.at(0) * bv.arr();
      else if (bc == Bcast::ScalarB) out.arr() = av.arr() * bv.at(0);
      else out.arr() = av.arr() * bv.arr();
      break;
    case Op::LogAddExp:
      for (Index i = 0; i < out.numel(); ++i) {
        const double x = bc == Bcast::ScalarA ? av.at(0) : av.at(i);
        const double y = bc == Bcast::ScalarB ? bv.at(0) : bv.at(i);
        out.at(i) = logaddexp1(x, y);
      }
      break;
    default: throw ContractError("not a binary elementwise op");
  }
  const bool rg = g->node(a).requires_grad || g->node(b).requires_grad;
  return g->emit(op, std::move(out), a.id, b.id, rg);
}

Value unary_elementwise(Op op, Value a) {
  Graph* g = graph_of(a);
  const Tensor& av = g->value(a);
  Tensor out(av.shape());
  switch (op) {
    case Op::Neg: out.arr() = -av.arr(); break;
    case Op::Exp: out.arr() = av.arr().exp(); break;
    case Op::Log:
      for (Index i = 0; i < av.numel(); ++i) {
        if (!(av.at(i) > 0.0)) {
          throw DomainError("log of non-positive input " + std::to_string(av.at(i)));
        }
      }
      out.arr() = av.arr().log();
      break;
    case Op::Tanh: out.arr() = av.arr().tanh(); break;
    case Op::Softplus:
      for (Index i = 0; i < av.numel(); ++i) out.at(i) = softplus1(av.at(i));
      break;
    case Op::Sigmoid:
      for (Index i = 0; i < av.numel(); ++i) out.at(i) = sigmoid1(av.at(i));
      break;
    case Op::Sqrt:
      for (Index i = 0; i < av.numel(); ++i) {
        if (av.at(i) < 0.0) throw DomainError("sqrt of negative input");
      }
      out.arr() = av.arr().sqrt();
      break;
    case Op::Sin: out.arr() = av.arr().sin(); break;
    default: throw ContractError("not a unary elementwise op");
  }
  return g->emit(op, std::move(out), a.id, -1, g->node(a).requires_grad);
}

}  // namespace

Value add(Value a, Value b) { return binary_elementwise(Op::Add, a, b, "add"); }
Value sub(Value a, Value b) { return binary_elementwise(Op::Sub, a, b, "sub"); }
Value mul(Value a, Value b) { return binary_elementwise(Op::Mul, a, b, "mul"); }
Value logaddexp(Value a, Value b) { return binary_elementwise(Op::LogAddExp, a, b, "logaddexp"); }
Value neg(Value a) { return unary_elementwise(Op::Neg, a); }
Value exp(Value a) { return unary_elementwise(Op::Exp, a); }
Value log(Value a) { return unary_elementwise(Op::Log, a); }
Value tanh(Value a) { return unary_elementwise(Op::Tanh, a); }
Value softplus(Value a) { return unary_elementwise(Op::Softplus, a); }
Value sigmoid(Value a) { return unary_elementwise(Op::Sigmoid, a); }
Value sqrt(Value a) { return unary_elementwise(Op::Sqrt, a); }
Value sin(Value a) { return unary_elementwise(Op::Sin, a); }

Value matmul(Value a, Value b) {
  Graph* g = same_graph(a, b);
  const Tensor& av = g->value(a);
  const Tensor& bv = g->value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.extent(1) != bv.extent(0)) {
    throw DimensionError("matmul: shapes " + shape_str(av.shape()) + " and " +
                         shape_str(bv.shape()) + " are incompatible");
  }
  Tensor out({av.extent(0), bv.extent(1)});
  out.mat().noalias() = av.mat() * bv.mat();
  const bool rg = g->node(a).requires_grad || g->node(b).requires_grad;
  return g->emit(Op::MatMul, std::move(out), a.id, b.id, rg);
}

Value transpose(Value a) {
  Graph* g = graph_of(a);
  const Tensor& av = g->value(a);
  if (av.rank() != 2) throw DimensionError("transpose requires rank 2, got " + shape_str(av.shape()));
  Tensor out({av.extent(1), av.extent(0)});
  out.mat() = av.mat().transpose();
  return g->emit(Op::Transpose, std::move(out), a.id, -1, g->node(a).requires_grad);
}

Value reshape(Value a, Shape shape) {
  Graph* g = graph_of(a);
  const Tensor& av = g->value(a);
  if (shape_numel(shape) != av.numel()) {
    throw DimensionError("reshape from " + shape_str(av.shape()) + " to " + shape_str(shape) +
                         " changes element count");
  }
  Tensor out(std::move(shape));
  out.arr() = av.arr();
  return g->emit(Op::Reshape, std::move(out), a.id, -1, g->node(a).requires_grad);
}

Value tile_rows(Value a, Index n) {
  Graph* g = graph_of(a);
  const Tensor& av = g->value(a);
  if (n < 1) throw DimensionError("tile_rows: count must be >= 1");
  const Index w = av.numel();
  Tensor out({n * av.rows2d(), av.cols2d()});
  for (Index k = 0; k < n; ++k) {
    std::memcpy(out.data() + k * w, av.data(), static_cast<size_t>(w) * sizeof(double));
  }
  return g->emit(Op::TileRows, std::move(out), a.id, -1, g->node(a).requires_grad, n);
}

Value tile_cols(Value a, Index n) {
  Graph* g = graph_of(a);
  const Tensor& av = g->value(a);
  if (n < 1) throw DimensionError("tile_cols: count must be >= 1");
  const Index m = av.numel();
  Tensor out({m, n});
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < n; ++c) out.at(r * n + c) = av.at(r);
  }
  return g->emit(Op::TileCols, std::move(out), a.id, -1, g->node(a).requires_grad, n);
}

Value repeat_cols_grouped(Value a, Index block_rows, Index block_cols) {
  Graph* g = graph_of(a);
  const Tensor& av = g->value(a);
  if (av.rank() != 2) throw DimensionError("repeat_cols_grouped requires rank 2");
  if (block_rows < 1 || block_cols < 1 || av.extent(1) % block_cols != 0) {
    throw DimensionError("repeat_cols_grouped: width " + std::to_string(av.extent(1)) +
                         " not divisible into blocks of " + std::to_string(block_cols));
  }
  const Index rows = av.extent(0), w_in = av.extent(1);
  const Index groups = w_in / block_cols;
  Tensor out({rows, w_in * block_rows});
  const Index w_out = w_in * block_rows;
  for (Index row = 0; row < rows; ++row) {
    for (Index grp = 0; grp < groups; ++grp) {
      const double* src = av.data() + row * w_in + grp * block_cols;
      for (Index r = 0; r < block_rows; ++r) {
        std::memcpy(out.data() + row * w_out + (grp * block_rows + r) * block_cols, src,
                    static_cast<size_t>(block_cols) * sizeof(double));
      }
    }
  }
  return g->emit(Op::RepeatColsGrouped, std::move(out), a.id, -1, g->node(a).requires_grad,
                 block_rows, block_cols);
}

Value select_cols(Value a, std::vector<Index> idx) {
  Graph* g = graph_of(a);
  const Tensor& av = g->value(a);
  if (av.rank() != 2) throw DimensionError("select_cols requires rank 2");
  const Index rows = av.extent(0), cols_in = av.extent(1);
  for (Index j : idx) {
    if (j < 0 || j >= cols_in) {
      throw DimensionError("select_cols: index " + std::to_string(j) + " out of range for " +
                           shape_str(av.shape()));
    }
  }
  const Index cols_out = static_cast<Index>(idx.size());
  Tensor out({rows, cols_out});
  for (Index r = 0; r < rows; ++r) {
    for (Index j = 0; j < cols_out; ++j) {
      out.at(r * cols_out + j) = av.at(r * cols_in + idx[static_cast<size_t>(j)]);
    }
  }
  return g->emit(Op::SelectCols, std::move(out), a.id, -1, g->node(a).requires_grad, -1, -1,
                 std::make_shared<const std::vector<Index>>(std::move(idx)));
}

Value logsumexp(Value a, Index axis) {
  Graph* g = graph_of(a);
  const Tensor& av = g->value(a);
  const AxisSplit s = split_axis(av.shape(), axis, "logsumexp");
  Tensor out(drop_axis(av.shape(), axis));
  for (Index o = 0; o < s.outer; ++o) {
    for (Index i = 0; i < s.inner; ++i) {
      double m = -std::numeric_limits<double>::infinity();
      for (Index r = 0; r < s.red; ++r) m = std::max(m, av.at((o * s.red + r) * s.inner + i));
      double acc = 0.0;
      for (Index r = 0; r < s.red; ++r) acc += std::exp(av.at((o * s.red + r) * s.inner + i) - m);
      out.at(o * s.inner + i) = m + std::log(acc);
    }
  }
  return g->emit(Op::LogSumExp, std::move(out), a.id, -1, g->node(a).requires_grad, axis);
}

namespace {

Value reduce(Op op, Value a, Index axis) {
  Graph* g = graph_of(a);
  const Tensor& av = g->value(a);
  Tensor out;
  if (axis < 0) {
    if (av.numel() == 0) throw DomainError("reduce over empty tensor");
    const double total = av.arr().sum();
    out = Tensor::scalar(op == Op::Mean ? total / static_cast<double>(av.numel()) : total);
  } else {
    const AxisSplit s = split_axis(av.shape(), axis, "reduce");
    out = Tensor(drop_axis(av.shape(), axis));
    for (Index o = 0; o < s.outer; ++o) {
      for (Index i = 0; i < s.inner; ++i) {
        double acc = 0.0;
        for (Index r = 0; r < s.red; ++r) acc += av.at((o * s.red + r) * s.inner + i);
        out.at(o * s.inner + i) = op == Op::Mean ? acc / static_cast<double>(s.red) : acc;
      }
    }
  }
  return g->emit(op, std::move(out), a.id, -1, g->node(a).requires_grad, axis);
}

}  // namespace

Value sum(Value a, Index axis) { return reduce(Op::Sum, a, axis); }
Value sum_all(Value a) { return reduce(Op::Sum, a, -1); }
Value mean(Value a, Index axis) { return reduce(Op::Mean, a, axis); }
Value mean_all(Value a) { return reduce(Op::Mean, a, -1); }

Value operator+(Value a, double b) { return add(a, graph_of(a)->constant(b)); }
Value operator+(double a, Value b) { return add(graph_of(b)->constant(a), b); }
Value operator-(Value a, double b) { return sub(a, graph_of(a)->constant(b)); }
Value operator-(double a, Value b) { return sub(graph_of(b)->constant(a), b); }
Value operator*(Value a, double b) { return mul(a, graph_of(a)->constant(b)); }
Value operator*(double a, Value b) { return mul(graph_of(b)->constant(a), b); }

}  // namespace bnaf
