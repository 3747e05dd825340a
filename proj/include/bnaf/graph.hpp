#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "bnaf/tensor.hpp"

namespace bnaf {

enum class Op : uint8_t {
  Leaf,
  Add,
  Sub,
  Mul,
  Neg,
  Exp,
  Log,
  Tanh,
  Softplus,
  Sigmoid,
  Sqrt,
  Sin,
  LogAddExp,
  MatMul,
  Transpose,
  Reshape,
  TileRows,
  TileCols,
  RepeatColsGrouped,
  SelectCols,
  LogSumExp,
  Sum,
  Mean,
};

class Graph;

/// Handle to a node in a Graph. Cheap to copy; only meaningful together with
/// the graph that produced it.
struct Value {
  Graph* graph = nullptr;
  int id = -1;
  bool valid() const { return graph != nullptr && id >= 0; }
};

/// Dynamic tape: one node per executed operation, values computed eagerly at
/// node creation, node ids topologically ordered by construction. A graph is
/// built, differentiated, and discarded per forward pass; it is not reused
/// and not shared across threads.
class Graph {
 public:
  struct Node {
    Op op = Op::Leaf;
    int in0 = -1;
    int in1 = -1;
    Tensor value;
    bool requires_grad = false;
    Index p0 = -1;  // axis / tile count / block rows a
    Index p1 = -1;  // block cols b
    std::shared_ptr<const std::vector<Index>> indices;  // SelectCols
  };

  Value leaf(Tensor v) { return emit(Op::Leaf, std::move(v), -1, -1, true); }
  Value constant(Tensor v) { return emit(Op::Leaf, std::move(v), -1, -1, false); }
  Value constant(double v) { return constant(Tensor::scalar(v)); }

  Value emit(Op op, Tensor value, int in0, int in1, bool requires_grad, Index p0 = -1,
             Index p1 = -1, std::shared_ptr<const std::vector<Index>> indices = nullptr);

  const Tensor& value(Value v) const { return node(v).value; }
  const Node& node(Value v) const;
  size_t num_nodes() const { return nodes_.size(); }

  /// Reverse-mode sweep from a scalar root. After it returns, adjoint(root)
  /// is all-ones and adjoint(leaf) is the exact d(root)/d(leaf) for every
  /// grad-requiring leaf reachable from the root.
  void backward(Value root);

  /// Adjoint of a node after backward(); zeros if the node did not
  /// contribute to the root.
  Tensor adjoint(Value v) const;

 private:
  void check(Value v) const;
  Tensor& grad_buffer(int id);
  void backward_node(int id);

  std::vector<Node> nodes_;
  std::vector<Tensor> adjoints_;
  std::vector<uint8_t> has_adjoint_;
};

// Elementwise; binary ops require equal shapes, except that either side may
// be a one-element tensor, which is broadcast.
Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);
Value neg(Value a);
Value exp(Value a);
Value log(Value a);
Value tanh(Value a);
Value softplus(Value a);
Value sigmoid(Value a);
Value sqrt(Value a);
Value sin(Value a);
Value logaddexp(Value a, Value b);

Value matmul(Value a, Value b);
Value transpose(Value a);
Value reshape(Value a, Shape shape);

/// Stack n flat copies of `a` vertically: shapes (r x c) -> (n*r x c),
/// rank-1 (c) -> (n x c).
Value tile_rows(Value a, Index n);
/// Spread a one-column tensor across n columns: numel m -> (m x n).
Value tile_cols(Value a, Index n);
/// For input (N x G*b), repeat each contiguous group of b columns a times:
/// out[n, (g*a+r)*b + c] = in[n, g*b + c], giving (N x G*a*b).
Value repeat_cols_grouped(Value a, Index block_rows, Index block_cols);
/// Column gather: out[:, j] = in[:, idx[j]]. Covers permutations and slices.
Value select_cols(Value a, std::vector<Index> idx);

Value logsumexp(Value a, Index axis);
Value sum(Value a, Index axis);
Value sum_all(Value a);
Value mean(Value a, Index axis);
Value mean_all(Value a);

inline Value operator+(Value a, Value b) { return add(a, b); }
inline Value operator-(Value a, Value b) { return sub(a, b); }
inline Value operator*(Value a, Value b) { return mul(a, b); }
inline Value operator-(Value a) { return neg(a); }
Value operator+(Value a, double b);
Value operator+(double a, Value b);
Value operator-(Value a, double b);
Value operator-(double a, Value b);
Value operator*(Value a, double b);
Value operator*(double a, Value b);

}  // namespace bnaf
