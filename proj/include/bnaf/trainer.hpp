#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bnaf/flow.hpp"
#include "bnaf/objectives.hpp"
#include "bnaf/rng.hpp"

namespace bnaf {

enum class Objective { Mle, Match };

std::optional<Objective> parse_objective(std::string_view name);
std::string objective_name(Objective o);

struct TrainConfig {
  Objective objective = Objective::Mle;
  std::string target;  // toy dataset name (mle) or energy name (match)
  Index d = 2;
  Index k = 10;          // hidden width multiplier, H = k*d units
  Index hidden_layers = 2;
  Index n_flows = 1;
  Index batch_size = 200;
  long max_iterations = 5000;
  double initial_lr = 1e-2;
  double decay_rate = 0.5;
  long patience = 2000;  // iterations without improvement before lr decays
  double polyak = 0.998;  // 0 disables averaging
  uint64_t seed = 0;
  long eval_interval = 100;
  std::string checkpoint_path;  // empty: keep in memory only
  std::string metrics_path;     // empty: no CSV
};

void validate(const TrainConfig& config);

struct AdamState {
  std::vector<Tensor> m, v;  // aligned with named_params order
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const FlowStack& stack);

/// One Adam update over every trainable tensor. Throws NumericalError naming
/// the parameter if a gradient is not finite.
void adam_step(const std::vector<ParamRef>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr);

struct PatienceState {
  double best_metric = std::numeric_limits<double>::infinity();
  long since_improvement = 0;
};

/// Applies one evaluation outcome: improvement resets the counter, a counter
/// reaching `patience` decays the lr and resets. Returns the new lr.
double lr_schedule(PatienceState& state, double metric, double lr, double decay_rate,
                   long patience, long delta_iters);

/// avg <- phi*avg + (1-phi)*params, elementwise.
void polyak_update(std::vector<Tensor>& avg, const std::vector<ConstParamRef>& params, double phi);

struct MetricsRow {
  long iteration = 0;
  double loss = 0.0;
  double lr = 0.0;
  std::optional<double> eval_metric;
};

inline constexpr Index kLossWindow = 500;    // smoothing window for the match metric
inline constexpr Index kHeldOutSize = 2000;  // held-out set size for the mle metric

/// Everything that evolves during training; checkpointing this struct makes
/// resumption bit-exact.
struct TrainerState {
  FlowStack stack;
  AdamState adam;
  std::vector<Tensor> polyak_params;  // empty when polyak == 0
  Rng data_rng{0};
  long iteration = 0;
  double lr = 0.0;
  PatienceState patience;
  std::vector<double> loss_window;  // ring buffer, kLossWindow entries
  long window_count = 0;
  long window_pos = 0;
};

struct Checkpoint {
  int format_version = 1;
  TrainConfig config;
  TrainerState state;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<MetricsRow> history;
};

/// Fresh run: init parameters from the seed, then optimize to
/// config.max_iterations. Writes metrics/checkpoint files when paths are set.
TrainResult train(const TrainConfig& config);

/// Continue a loaded checkpoint to its config's max_iterations.
TrainResult train_from(Checkpoint checkpoint);

/// Copy of `proto` with parameter tensors replaced (named_params order).
FlowStack stack_with_params(const FlowStack& proto, const std::vector<Tensor>& params);

/// Parameters used for evaluation: the Polyak average when enabled, raw otherwise.
FlowStack eval_stack(const Checkpoint& checkpoint);

}  // namespace bnaf
