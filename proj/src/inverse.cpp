#include <cmath>

#include "bnaf/flow.hpp"

namespace bnaf {

namespace {

// Effective weights and gate of one flow, frozen for repeated evaluation
// during the bisection search. No tape: inversion needs values only.
struct FrozenFlow {
  std::vector<Tensor> weights;  // effective (a*d x b*d)
  std::vector<const Tensor*> biases;
  double alpha = 0.5;
};

FrozenFlow freeze(const BnafFlow& flow) {
  FrozenFlow ff;
  for (const BnafLayerParams& l : flow.layers) {
    ff.weights.push_back(effective_weight(l).first);
    ff.biases.push_back(&l.bias);
  }
  double raw = flow.gate_raw.scalar_value();
  ff.alpha = raw >= 0.0 ? 1.0 / (1.0 + std::exp(-raw)) : std::exp(raw) / (1.0 + std::exp(raw));
  return ff;
}

// y = alpha * core(x) + (1 - alpha) * x for a single row x (1 x d).
Eigen::RowVectorXd frozen_forward(const FrozenFlow& ff, const Eigen::RowVectorXd& x) {
  Eigen::RowVectorXd h = x;
  for (size_t li = 0; li < ff.weights.size(); ++li) {
    const Tensor& w = ff.weights[li];
    Eigen::RowVectorXd z = h * w.mat().transpose();
    z += Eigen::Map<const Eigen::RowVectorXd>(ff.biases[li]->data(), ff.biases[li]->numel());
    if (li + 1 < ff.weights.size()) z = z.array().tanh();
    h = std::move(z);
  }
  return ff.alpha * h + (1.0 - ff.alpha) * x;
}

// Recovers x with frozen_forward(x) = y, one coordinate at a time. Each
// y_i depends only on x_<=i and is strictly increasing in x_i, so the step
// is a one-dimensional bisection; unknown later coordinates stay at zero.
Eigen::RowVectorXd invert_flow(const FrozenFlow& ff, const Eigen::RowVectorXd& y,
                               const InverseOptions& opt, Index row_index) {
  const Index d = y.size();
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(d);
  for (Index i = 0; i < d; ++i) {
    const double target = y[i];
    auto eval = [&](double t) {
      x[i] = t;
      return frozen_forward(ff, x)[i];
    };
    double lo = -opt.bracket, hi = opt.bracket;
    if (!(eval(lo) < target && target < eval(hi))) {
      throw ConvergenceError("flow_inverse: bracket [-" + std::to_string(opt.bracket) + ", " +
                             std::to_string(opt.bracket) + "] does not contain coordinate " +
                             std::to_string(i) + " of row " + std::to_string(row_index));
    }
    int it = 0;
    double mid = 0.0;
    while (it++ < opt.max_iter) {
      mid = 0.5 * (lo + hi);
      const double fm = eval(mid);
      if (fm == target) {
        lo = hi = mid;
        break;
      }
      (fm < target ? lo : hi) = mid;
      if (hi - lo < 1e-13 * std::max(1.0, std::abs(mid))) break;
    }
    x[i] = 0.5 * (lo + hi);
  }
  return x;
}

}  // namespace

Tensor flow_inverse(const FlowStack& stack, const Tensor& y, double tol,
                    const InverseOptions& opt) {
  if (!(tol > 0.0)) throw ConfigError("flow_inverse: tol must be positive");
  if (stack.flows.empty()) throw ContractError("flow_inverse: empty stack");
  if (y.rank() != 2 || y.extent(1) != stack.d) {
    throw DimensionError("flow_inverse: input " + shape_str(y.shape()) +
                         " does not match d=" + std::to_string(stack.d));
  }
  const Index n = y.extent(0), d = stack.d;
  std::vector<FrozenFlow> frozen;
  for (const BnafFlow& f : stack.flows) frozen.push_back(freeze(f));

  Tensor x_out({n, d});
  for (Index r = 0; r < n; ++r) {
    Eigen::RowVectorXd w(d);
    for (Index j = 0; j < d; ++j) w[j] = y.at(r, j);
    for (size_t fi = frozen.size(); fi-- > 0;) {
      if (fi + 1 < frozen.size()) {
        // undo the permutation the forward pass applied after flow fi
        Eigen::RowVectorXd unperm(d);
        for (Index j = 0; j < d; ++j) unperm[stack.permutation[static_cast<size_t>(j)]] = w[j];
        w = std::move(unperm);
      }
      w = invert_flow(frozen[fi], w, opt, r);
    }
    for (Index j = 0; j < d; ++j) x_out.at(r, j) = w[j];
  }

  if (n > 0) {
    const StackEval check = stack_eval(stack, x_out);
    std::string bad;
    for (Index r = 0; r < n; ++r) {
      double err = 0.0;
      for (Index j = 0; j < d; ++j) err = std::max(err, std::abs(check.y.at(r, j) - y.at(r, j)));
      if (!(err < tol)) bad += (bad.empty() ? "" : ", ") + std::to_string(r);
    }
    if (!bad.empty()) {
      throw ConvergenceError("flow_inverse: rows [" + bad + "] did not reach tol=" +
                             std::to_string(tol));
    }
  }
  return x_out;
}

}  // namespace bnaf
