#pragma once

#include "bnaf/flow.hpp"
#include "bnaf/targets.hpp"

namespace bnaf {

struct LossValue {
  Value loss;                 // scalar, attached to the graph
  double mean_log_det = 0.0;  // diagnostics
  double mean_base_log_prob = 0.0;
};

/// Negative mean log-likelihood of data under the flow-transformed base:
/// -mean[ log N(f(x)) + log_det ].
LossValue nll_loss(Graph& g, const BoundStack& stack, Value x_batch);

/// Reverse-KL objective against an unnormalized target, up to the target's
/// (constant) log-normalizer: mean[ log N(x) - log_det + U(f(x)) ].
LossValue density_matching_loss(Graph& g, const BoundStack& stack, Value base_batch,
                                const EnergyFn& target);
LossValue density_matching_loss(Graph& g, const BoundStack& stack, Value base_batch,
                                EnergyKind target);

}  // namespace bnaf
