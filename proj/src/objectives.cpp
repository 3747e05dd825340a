#include "bnaf/objectives.hpp"

namespace bnaf {

namespace {

void check_rows_finite(const Tensor& per_row, const char* what) {
  const Index bad = per_row.first_non_finite();
  if (bad >= 0) {
    throw NumericalError(std::string(what) + ": non-finite contribution at batch index " +
                         std::to_string(bad));
  }
}

}  // namespace

LossValue nll_loss(Graph& g, const BoundStack& stack, Value x_batch) {
  FlowOutput out = stack_forward(g, stack, x_batch);
  Value base_lp = normal_log_prob(out.y);
  Value per_row = base_lp + out.log_det;
  check_rows_finite(g.value(per_row), "nll_loss");
  LossValue lv;
  lv.loss = neg(mean(per_row, 0));
  lv.mean_log_det = g.value(out.log_det).arr().mean();
  lv.mean_base_log_prob = g.value(base_lp).arr().mean();
  return lv;
}

LossValue density_matching_loss(Graph& g, const BoundStack& stack, Value base_batch,
                                const EnergyFn& target) {
  FlowOutput out = stack_forward(g, stack, base_batch);
  Value base_lp = normal_log_prob(base_batch);
  Value per_row = base_lp - out.log_det + target(g, out.y);
  check_rows_finite(g.value(per_row), "density_matching_loss");
  LossValue lv;
  lv.loss = mean(per_row, 0);
  lv.mean_log_det = g.value(out.log_det).arr().mean();
  lv.mean_base_log_prob = g.value(base_lp).arr().mean();
  return lv;
}

LossValue density_matching_loss(Graph& g, const BoundStack& stack, Value base_batch,
                                EnergyKind target) {
  return density_matching_loss(g, stack, base_batch, energy_fn(target));
}

}  // namespace bnaf
