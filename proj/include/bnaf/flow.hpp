#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bnaf/graph.hpp"
#include "bnaf/masks.hpp"
#include "bnaf/rng.hpp"

namespace bnaf {

/// One masked affine layer: free weights, per-row log-scale for weight
/// normalization, bias, and the block masks fixing its sparsity pattern.
struct BnafLayerParams {
  Tensor w_hat;  // (a*d x b*d)
  Tensor s;      // (a*d)
  Tensor bias;   // (a*d)
  BlockMasks masks;
};

/// A single flow: (k*d x d) . tanh . [(k*d x k*d) . tanh]^(L-1) . (d x k*d),
/// wrapped in a gated residual connection y = alpha*f(x) + (1-alpha)*x with
/// alpha = sigmoid(gate_raw).
struct BnafFlow {
  std::vector<BnafLayerParams> layers;
  Tensor gate_raw = Tensor::scalar(0.0);
};

/// Composition of flows over the same d, with a fixed coordinate permutation
/// applied between consecutive flows (its log-det contribution is zero).
struct FlowStack {
  Index d = 0;
  Index k = 0;
  Index n_hidden = 0;  // hidden tanh layers per flow
  std::vector<BnafFlow> flows;
  std::vector<Index> permutation;  // out[:, j] = in[:, permutation[j]]
};

struct ParamRef {
  std::string name;
  Tensor* tensor;
};
struct ConstParamRef {
  std::string name;
  const Tensor* tensor;
};

/// Trainable tensors in a fixed, documented order: per flow, each layer's
/// w_hat, s, bias, then the flow's gate. This order is the checkpoint
/// manifest order.
std::vector<ParamRef> named_params(FlowStack& stack);
std::vector<ConstParamRef> named_params(const FlowStack& stack);

// Graph-attached views of the parameters, one leaf per tensor.
struct BoundLayer {
  Value w_hat, s, bias;
  const BlockMasks* masks;
};
struct BoundFlow {
  std::vector<BoundLayer> layers;
  Value gate_raw;
};
struct BoundStack {
  std::vector<BoundFlow> flows;
  const FlowStack* stack = nullptr;
  std::vector<Value> param_leaves;  // aligned with named_params order
};
BoundStack bind_stack(Graph& g, const FlowStack& stack);

struct EffectiveWeight {
  Value weight;    // (a*d x b*d): row r is exp(s_r) * v_r / ||v_r||
  Value log_diag;  // (a*d x b): exact logs of the diagonal-block entries
};
EffectiveWeight effective_weight(Graph& g, const BoundLayer& layer);
/// Convenience on plain tensors (throwaway graph): returns {W, log_diag}.
std::pair<Tensor, Tensor> effective_weight(const BnafLayerParams& layer);

/// C = log(exp(A) * exp(B)), entrywise via log-sum-exp.
Value log_mat_mul(Value a_log, Value b_log);
Tensor log_mat_mul(const Tensor& a_log, const Tensor& b_log);

struct FlowOutput {
  Value y;                          // (batch x d)
  Value log_det;                    // (batch)
  std::vector<Value> flow_log_diag;  // per flow, (batch x d) log-Jacobian diagonals
};

FlowOutput flow_forward(Graph& g, const BoundFlow& flow, Value x);
FlowOutput stack_forward(Graph& g, const BoundStack& stack, Value x);

/// Plain-tensor evaluation through a throwaway graph.
struct StackEval {
  Tensor y;
  Tensor log_det;
  std::vector<Tensor> flow_log_diag;
};
StackEval stack_eval(const FlowStack& stack, const Tensor& x);

long count_params(Index d, Index k, Index hidden_layers, Index n_flows);

/// Stack with masks and zero parameters.
FlowStack make_stack(Index d, Index k, Index hidden_layers, Index n_flows);
/// w_hat entries ~ N(0,1), s = log(u) with u ~ U(0,1], biases 0, gates 0.
void init_params(FlowStack& stack, Rng& rng);
FlowStack init_stack(Index d, Index k, Index hidden_layers, Index n_flows, Rng& rng);

struct InverseOptions {
  double bracket = 1e3;
  int max_iter = 200;
};

/// Inverts the stack one flow at a time in reverse order; each flow is
/// inverted coordinate-wise by bisection on the monotone map x_i -> y_i.
/// The result satisfies ||stack_forward(x).y - y||_inf < tol.
Tensor flow_inverse(const FlowStack& stack, const Tensor& y, double tol,
                    const InverseOptions& opt = {});

}  // namespace bnaf
