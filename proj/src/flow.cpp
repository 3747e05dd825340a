#include "bnaf/flow.hpp"

#include <cmath>

namespace bnaf {

namespace {

// log(d tanh(h)/dh) = log(1 - tanh(h)^2), stable for large |h|.
Value log_tanh_deriv(Value h) { return (std::log(2.0) - h - softplus(h * -2.0)) * 2.0; }

// Constant (b*d x b) matrix with R[j*b + c, c] = 1; (m ~ m_d-masked) * R
// compacts the d diagonal blocks of an (a*d x b*d) matrix into (a*d x b).
Tensor diag_compaction(const BlockMasks& mk) {
  Tensor r({mk.b * mk.d, mk.b});
  for (Index j = 0; j < mk.d; ++j) {
    for (Index c = 0; c < mk.b; ++c) r.at(j * mk.b + c, c) = 1.0;
  }
  return r;
}

void validate_stack_config(Index d, Index k, Index hidden_layers, Index n_flows) {
  if (d < 1 || k < 1 || hidden_layers < 1 || n_flows < 1) {
    throw ConfigError("flow config must be positive: d=" + std::to_string(d) +
                      " k=" + std::to_string(k) + " layers=" + std::to_string(hidden_layers) +
                      " flows=" + std::to_string(n_flows));
  }
}

}  // namespace

std::vector<ParamRef> named_params(FlowStack& stack) {
  std::vector<ParamRef> out;
  for (size_t fi = 0; fi < stack.flows.size(); ++fi) {
    BnafFlow& f = stack.flows[fi];
    const std::string p = "flow" + std::to_string(fi) + ".";
    for (size_t li = 0; li < f.layers.size(); ++li) {
      const std::string lp = p + "layer" + std::to_string(li) + ".";
      out.push_back({lp + "w_hat", &f.layers[li].w_hat});
      out.push_back({lp + "s", &f.layers[li].s});
      out.push_back({lp + "bias", &f.layers[li].bias});
    }
    out.push_back({p + "gate_raw", &f.gate_raw});
  }
  return out;
}

std::vector<ConstParamRef> named_params(const FlowStack& stack) {
  std::vector<ConstParamRef> out;
  for (const ParamRef& r : named_params(const_cast<FlowStack&>(stack))) {
    out.push_back({r.name, r.tensor});
  }
  return out;
}

BoundStack bind_stack(Graph& g, const FlowStack& stack) {
  if (stack.flows.empty()) throw ContractError("bind_stack: stack has no flows");
  BoundStack bs;
  bs.stack = &stack;
  for (const BnafFlow& f : stack.flows) {
    BoundFlow bf;
    for (const BnafLayerParams& l : f.layers) {
      BoundLayer bl;
      bl.w_hat = g.leaf(l.w_hat);
      bl.s = g.leaf(l.s);
      bl.bias = g.leaf(l.bias);
      bl.masks = &l.masks;
      bs.param_leaves.push_back(bl.w_hat);
      bs.param_leaves.push_back(bl.s);
      bs.param_leaves.push_back(bl.bias);
      bf.layers.push_back(bl);
    }
    bf.gate_raw = g.leaf(f.gate_raw);
    bs.param_leaves.push_back(bf.gate_raw);
    bs.flows.push_back(std::move(bf));
  }
  return bs;
}

EffectiveWeight effective_weight(Graph& g, const BoundLayer& layer) {
  const BlockMasks& mk = *layer.masks;
  Value md = g.constant(mk.m_d);
  Value mo = g.constant(mk.m_o);
  Value v = exp(layer.w_hat) * md + layer.w_hat * mo;
  Value norm = sqrt(sum(v * v, 1));  // (a*d), strictly positive: diag blocks are exp(.)
  const Tensor& nv = g.value(norm);
  for (Index r = 0; r < nv.numel(); ++r) {
    if (!(nv.at(r) > 0.0)) {
      throw DomainError("effective_weight: weight row " + std::to_string(r) +
                        " is entirely zero and cannot be normalized");
    }
  }
  Value row_log_scale = layer.s - log(norm);  // (a*d)
  Value w = v * tile_cols(exp(row_log_scale), mk.cols());
  Value w_diag = matmul(layer.w_hat * md, g.constant(diag_compaction(mk)));  // (a*d x b)
  Value log_diag = w_diag + tile_cols(row_log_scale, mk.b);
  return {w, log_diag};
}

std::pair<Tensor, Tensor> effective_weight(const BnafLayerParams& layer) {
  Graph g;
  BoundLayer bl{g.leaf(layer.w_hat), g.leaf(layer.s), g.leaf(layer.bias), &layer.masks};
  EffectiveWeight ew = effective_weight(g, bl);
  return {g.value(ew.weight), g.value(ew.log_diag)};
}

Value log_mat_mul(Value a_log, Value b_log) {
  Graph* g = a_log.graph;
  const Tensor& av = g->value(a_log);
  const Tensor& bv = g->value(b_log);
  if (av.rank() != 2 || bv.rank() != 2 || av.extent(1) != bv.extent(0)) {
    throw DimensionError("log_mat_mul: shapes " + shape_str(av.shape()) + " and " +
                         shape_str(bv.shape()) + " are incompatible");
  }
  const Index m = av.extent(0), n = av.extent(1), p = bv.extent(1);
  Value a_rep = reshape(repeat_cols_grouped(a_log, p, n), {m * p, n});
  Value b_rep = tile_rows(transpose(b_log), m);  // row (i*p + j) holds column j of B
  return reshape(logsumexp(a_rep + b_rep, 1), {m, p});
}

Tensor log_mat_mul(const Tensor& a_log, const Tensor& b_log) {
  Graph g;
  return g.value(log_mat_mul(g.constant(a_log), g.constant(b_log)));
}

FlowOutput flow_forward(Graph& g, const BoundFlow& flow, Value x) {
  if (flow.layers.empty()) throw ContractError("flow_forward: flow has no layers");
  const Tensor& xv = g.value(x);
  const Index d = flow.layers.front().masks->d;
  if (xv.rank() != 2 || xv.extent(1) != d) {
    throw DimensionError("flow_forward: input " + shape_str(xv.shape()) +
                         " does not match d=" + std::to_string(d));
  }
  const Index batch = xv.extent(0);

  Value h = x;
  // Per-example, per-coordinate log of the running diagonal Jacobian block,
  // stored as (batch x d*b) with block i in columns [i*b, (i+1)*b).
  Value acc = g.constant(Tensor::zeros({batch, d}));
  for (size_t li = 0; li < flow.layers.size(); ++li) {
    const BlockMasks& mk = *flow.layers[li].masks;
    EffectiveWeight ew = effective_weight(g, flow.layers[li]);
    h = matmul(h, transpose(ew.weight)) + tile_rows(flow.layers[li].bias, batch);
    if (!g.value(h).all_finite()) {
      throw NumericalError("flow_forward: non-finite activation at layer " + std::to_string(li));
    }
    // acc <- log_diag (a x b per block) log-multiplied onto acc (b x 1 per block)
    Value t = repeat_cols_grouped(acc, mk.a, mk.b);
    t = t + tile_rows(reshape(ew.log_diag, {1, mk.a * mk.d * mk.b}), batch);
    acc = reshape(logsumexp(reshape(t, {batch * mk.d * mk.a, mk.b}), 1), {batch, mk.d * mk.a});
    if (li + 1 < flow.layers.size()) {
      acc = acc + log_tanh_deriv(h);
      h = tanh(h);
    }
  }

  Value log_alpha = neg(softplus(neg(flow.gate_raw)));
  Value log_1m_alpha = neg(softplus(flow.gate_raw));
  Value alpha = sigmoid(flow.gate_raw);
  Value y = alpha * h + (1.0 - alpha) * x;
  Value diag = logaddexp(acc + log_alpha, log_1m_alpha);
  FlowOutput out;
  out.y = y;
  out.log_det = sum(diag, 1);
  out.flow_log_diag = {diag};
  return out;
}

FlowOutput stack_forward(Graph& g, const BoundStack& stack, Value x) {
  if (stack.flows.empty()) throw ContractError("stack_forward: empty stack");
  const FlowStack& st = *stack.stack;
  FlowOutput out;
  Value cur = x;
  for (size_t fi = 0; fi < stack.flows.size(); ++fi) {
    if (fi > 0 && !st.permutation.empty()) {
      cur = select_cols(cur, st.permutation);
    }
    FlowOutput fo = flow_forward(g, stack.flows[fi], cur);
    out.flow_log_diag.push_back(fo.flow_log_diag.front());
    out.log_det = fi == 0 ? fo.log_det : add(out.log_det, fo.log_det);
    cur = fo.y;
  }
  out.y = cur;
  return out;
}

StackEval stack_eval(const FlowStack& stack, const Tensor& x) {
  Graph g;
  BoundStack bs = bind_stack(g, stack);
  FlowOutput fo = stack_forward(g, bs, g.constant(x));
  StackEval ev;
  ev.y = g.value(fo.y);
  ev.log_det = g.value(fo.log_det);
  for (Value v : fo.flow_log_diag) ev.flow_log_diag.push_back(g.value(v));
  return ev;
}

long count_params(Index d, Index k, Index hidden_layers, Index n_flows) {
  validate_stack_config(d, k, hidden_layers, n_flows);
  auto layer_params = [d](Index a, Index b) {
    return static_cast<long>(d * (d + 1) / 2 * a * b + 2 * a * d);  // blocks + s + bias
  };
  long per_flow = layer_params(k, 1) + (hidden_layers - 1) * layer_params(k, k) +
                  layer_params(1, k) + 1;  // + gate
  return per_flow * n_flows;
}

FlowStack make_stack(Index d, Index k, Index hidden_layers, Index n_flows) {
  validate_stack_config(d, k, hidden_layers, n_flows);
  FlowStack st;
  st.d = d;
  st.k = k;
  st.n_hidden = hidden_layers;
  st.permutation.resize(static_cast<size_t>(d));
  for (Index j = 0; j < d; ++j) st.permutation[static_cast<size_t>(j)] = d - 1 - j;
  for (Index fi = 0; fi < n_flows; ++fi) {
    BnafFlow f;
    auto add_layer = [&](Index a, Index b) {
      BnafLayerParams p;
      p.masks = build_masks(d, a, b);
      p.w_hat = Tensor::zeros({a * d, b * d});
      p.s = Tensor::zeros({a * d});
      p.bias = Tensor::zeros({a * d});
      f.layers.push_back(std::move(p));
    };
    add_layer(k, 1);
    for (Index l = 1; l < hidden_layers; ++l) add_layer(k, k);
    add_layer(1, k);
    f.gate_raw = Tensor::scalar(0.0);
    st.flows.push_back(std::move(f));
  }
  return st;
}

void init_params(FlowStack& stack, Rng& rng) {
  for (BnafFlow& f : stack.flows) {
    for (BnafLayerParams& l : f.layers) {
      rng.fill_normal(l.w_hat);
      for (Index i = 0; i < l.s.numel(); ++i) l.s.at(i) = std::log(rng.uniform_pos());
      l.bias = Tensor::zeros(l.bias.shape());
    }
    f.gate_raw = Tensor::scalar(0.0);
  }
}

FlowStack init_stack(Index d, Index k, Index hidden_layers, Index n_flows, Rng& rng) {
  FlowStack st = make_stack(d, k, hidden_layers, n_flows);
  init_params(st, rng);
  return st;
}

}  // namespace bnaf
