#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "bnaf/flow.hpp"
#include "bnaf/graph.hpp"
#include "bnaf/rng.hpp"

namespace bnaf_test {

using namespace bnaf;

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline Tensor random_tensor(Rng& rng, Shape shape, double lo = -2.0, double hi = 2.0) {
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.numel(); ++i) t.at(i) = lo + (hi - lo) * rng.uniform01();
  return t;
}

using ScalarFn = std::function<double(const std::vector<Tensor>&)>;

/// Central finite differences of a scalar function w.r.t. inputs[which].
inline Tensor fd_grad(const ScalarFn& f, std::vector<Tensor> inputs, size_t which,
                      double eps = 1e-5) {
  Tensor g(inputs[which].shape());
  for (Index i = 0; i < g.numel(); ++i) {
    const double orig = inputs[which].at(i);
    inputs[which].at(i) = orig + eps;
    const double fp = f(inputs);
    inputs[which].at(i) = orig - eps;
    const double fm = f(inputs);
    inputs[which].at(i) = orig;
    g.at(i) = (fp - fm) / (2.0 * eps);
  }
  return g;
}

/// Finite-difference Jacobian J[i][j] = dy_i/dx_j of the stack at one point.
inline Tensor fd_jacobian(const FlowStack& st, const Tensor& x_row, double eps = 1e-5) {
  const Index d = x_row.extent(1);
  Tensor jac({d, d});
  for (Index j = 0; j < d; ++j) {
    Tensor xp = x_row, xm = x_row;
    xp.at(0, j) += eps;
    xm.at(0, j) -= eps;
    const Tensor yp = stack_eval(st, xp).y;
    const Tensor ym = stack_eval(st, xm).y;
    for (Index i = 0; i < d; ++i) jac.at(i, j) = (yp.at(0, i) - ym.at(0, i)) / (2.0 * eps);
  }
  return jac;
}

/// One differentiable-op test case: builds an output Value from leaf Values.
struct OpCase {
  std::function<Value(Graph&, const std::vector<Value>&)> build;
  std::vector<Shape> input_shapes;
  double lo = -2.0;
  double hi = 2.0;
};

/// Reverse-mode gradients against central finite differences on random
/// inputs; the output is contracted with fixed random weights so adjoints
/// are non-uniform. Returns the worst relative error seen.
inline double max_grad_error(const OpCase& oc, Rng& rng, int trials, double eps = 1e-5) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<Tensor> inputs;
    for (const Shape& s : oc.input_shapes) inputs.push_back(random_tensor(rng, s, oc.lo, oc.hi));

    Tensor weights;
    {
      Graph g;
      std::vector<Value> leaves;
      for (const Tensor& in : inputs) leaves.push_back(g.leaf(in));
      Value out = oc.build(g, leaves);
      weights = random_tensor(rng, g.value(out).shape(), -1.0, 1.0);
    }

    Graph g;
    std::vector<Value> leaves;
    for (const Tensor& in : inputs) leaves.push_back(g.leaf(in));
    Value out = oc.build(g, leaves);
    Value loss = sum_all(mul(out, g.constant(weights)));
    g.backward(loss);

    ScalarFn f = [&](const std::vector<Tensor>& ins) {
      Graph g2;
      std::vector<Value> lv;
      for (const Tensor& in : ins) lv.push_back(g2.leaf(in));
      return g2.value(sum_all(mul(oc.build(g2, lv), g2.constant(weights)))).scalar_value();
    };

    for (size_t which = 0; which < inputs.size(); ++which) {
      const Tensor ad = g.adjoint(leaves[which]);
      const Tensor fd = fd_grad(f, inputs, which, eps);
      for (Index i = 0; i < ad.numel(); ++i) {
        worst = std::max(worst, rel_err(ad.at(i), fd.at(i)));
      }
    }
  }
  return worst;
}

}  // namespace bnaf_test
