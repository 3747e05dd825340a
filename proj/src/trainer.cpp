#include "bnaf/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

#include "bnaf/checkpoint.hpp"

namespace bnaf {

namespace {

constexpr uint64_t kSaltInit = 0xb1a5ed01;
constexpr uint64_t kSaltData = 0xb1a5ed02;
constexpr uint64_t kSaltHeldOut = 0xb1a5ed03;

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ToyKind toy_kind_of(const TrainConfig& cfg) {
  auto kind = parse_toy(cfg.target);
  if (!kind) throw ConfigError("unknown dataset kind '" + cfg.target + "'");
  return *kind;
}

EnergyKind energy_kind_of(const TrainConfig& cfg) {
  auto kind = parse_energy(cfg.target);
  if (!kind) throw ConfigError("unknown energy kind '" + cfg.target + "'");
  return *kind;
}

double window_mean(const TrainerState& st) {
  const long n = st.window_count;
  double acc = 0.0;
  for (long i = 0; i < n; ++i) acc += st.loss_window[static_cast<size_t>(i)];
  return n > 0 ? acc / static_cast<double>(n) : std::numeric_limits<double>::infinity();
}

double held_out_nll(const TrainerState& st, const TrainConfig& cfg, const Tensor& held_out) {
  const FlowStack model = cfg.polyak > 0.0 ? stack_with_params(st.stack, st.polyak_params)
                                           : st.stack;
  Graph g;
  BoundStack bs = bind_stack(g, model);
  LossValue lv = nll_loss(g, bs, g.constant(held_out));
  return g.value(lv.loss).scalar_value();
}

std::vector<Tensor> copy_params(const FlowStack& stack) {
  std::vector<Tensor> out;
  for (const ConstParamRef& p : named_params(stack)) out.push_back(*p.tensor);
  return out;
}

}  // namespace

std::optional<Objective> parse_objective(std::string_view name) {
  if (name == "mle") return Objective::Mle;
  if (name == "match") return Objective::Match;
  return std::nullopt;
}

std::string objective_name(Objective o) {
  return o == Objective::Mle ? "mle" : "match";
}

void validate(const TrainConfig& cfg) {
  if (cfg.d < 1 || cfg.k < 1 || cfg.hidden_layers < 1 || cfg.n_flows < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be positive");
  if (cfg.max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
  if (!(cfg.initial_lr > 0.0)) throw ConfigError("initial_lr must be positive");
  if (!(cfg.decay_rate > 0.0 && cfg.decay_rate <= 1.0)) {
    throw ConfigError("decay_rate must be in (0, 1]");
  }
  if (cfg.patience < 1) throw ConfigError("patience must be positive");
  if (!(cfg.polyak >= 0.0 && cfg.polyak < 1.0)) throw ConfigError("polyak must be in [0, 1)");
  if (cfg.eval_interval < 1) throw ConfigError("eval_interval must be positive");
  if (cfg.objective == Objective::Mle) {
    if (cfg.d != 2) throw ConfigError("toy datasets are 2-dimensional; d must be 2");
    if (!parse_toy(cfg.target)) {
      std::string names;
      for (const auto& n : toy_names()) names += (names.empty() ? "" : ", ") + n;
      throw ConfigError("unknown dataset kind '" + cfg.target + "'; valid kinds: " + names);
    }
  } else {
    if (cfg.d != 2) throw ConfigError("energy targets are 2-dimensional; d must be 2");
    if (!parse_energy(cfg.target)) {
      std::string names;
      for (const auto& n : energy_names()) names += (names.empty() ? "" : ", ") + n;
      throw ConfigError("unknown energy kind '" + cfg.target + "'; valid kinds: " + names);
    }
  }
}

AdamState make_adam_state(const FlowStack& stack) {
  AdamState st;
  for (const ConstParamRef& p : named_params(stack)) {
    st.m.push_back(Tensor::zeros(p.tensor->shape()));
    st.v.push_back(Tensor::zeros(p.tensor->shape()));
  }
  return st;
}

void adam_step(const std::vector<ParamRef>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ContractError("adam_step: mismatched parameter/gradient/state counts");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (!grads[i].all_finite()) {
      throw NumericalError("adam_step: non-finite gradient for parameter " + params[i].name);
    }
    if (!params[i].tensor->same_shape(grads[i])) {
      throw DimensionError("adam_step: gradient shape mismatch for " + params[i].name);
    }
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    const Tensor& g = grads[i];
    m.arr() = state.beta1 * m.arr() + (1.0 - state.beta1) * g.arr();
    v.arr() = state.beta2 * v.arr() + (1.0 - state.beta2) * g.arr().square();
    params[i].tensor->arr() -= lr * (m.arr() / bc1) / ((v.arr() / bc2).sqrt() + state.epsilon);
  }
}

double lr_schedule(PatienceState& state, double metric, double lr, double decay_rate,
                   long patience, long delta_iters) {
  if (metric < state.best_metric) {
    state.best_metric = metric;
    state.since_improvement = 0;
    return lr;
  }
  state.since_improvement += delta_iters;
  if (state.since_improvement >= patience) {
    state.since_improvement = 0;
    return lr * decay_rate;
  }
  return lr;
}

void polyak_update(std::vector<Tensor>& avg, const std::vector<ConstParamRef>& params,
                   double phi) {
  if (avg.size() != params.size()) throw ContractError("polyak_update: size mismatch");
  for (size_t i = 0; i < avg.size(); ++i) {
    avg[i].arr() = phi * avg[i].arr() + (1.0 - phi) * params[i].tensor->arr();
  }
}

FlowStack stack_with_params(const FlowStack& proto, const std::vector<Tensor>& params) {
  FlowStack out = proto;
  auto refs = named_params(out);
  if (refs.size() != params.size()) throw ContractError("stack_with_params: size mismatch");
  for (size_t i = 0; i < refs.size(); ++i) {
    if (!refs[i].tensor->same_shape(params[i])) {
      throw DimensionError("stack_with_params: shape mismatch for " + refs[i].name);
    }
    *refs[i].tensor = params[i];
  }
  return out;
}

FlowStack eval_stack(const Checkpoint& ck) {
  if (ck.config.polyak > 0.0 && !ck.state.polyak_params.empty()) {
    return stack_with_params(ck.state.stack, ck.state.polyak_params);
  }
  return ck.state.stack;
}

namespace {

TrainResult run_loop(Checkpoint ck) {
  TrainResult result;
  result.checkpoint = std::move(ck);
  const TrainConfig& cfg = result.checkpoint.config;
  validate(cfg);
  const bool mle = cfg.objective == Objective::Mle;
  const ToyKind toy = mle ? toy_kind_of(cfg) : ToyKind::EightGaussians;
  const EnergyKind target = mle ? EnergyKind::U1 : energy_kind_of(cfg);

  Tensor held_out;
  if (mle) {
    Rng held_rng = Rng::derive(cfg.seed, kSaltHeldOut);
    held_out = toy_sample(toy, held_rng, kHeldOutSize);
  }

  std::ofstream metrics;
  if (!cfg.metrics_path.empty()) {
    metrics.open(cfg.metrics_path, std::ios::trunc);
    if (!metrics) throw IoError("cannot open metrics file " + cfg.metrics_path);
    metrics << "iter,loss,lr,eval_metric\n";
  }

  TrainerState& st = result.checkpoint.state;
  auto params = named_params(st.stack);
  auto cparams = named_params(std::as_const(st.stack));

  auto save = [&]() {
    if (!cfg.checkpoint_path.empty()) save_checkpoint(result.checkpoint, cfg.checkpoint_path);
  };

  for (long iter = st.iteration + 1; iter <= cfg.max_iterations; ++iter) {
    const Tensor batch = mle ? toy_sample(toy, st.data_rng, cfg.batch_size)
                             : normal_sample(st.data_rng, cfg.batch_size, cfg.d);
    Graph g;
    BoundStack bs = bind_stack(g, st.stack);
    LossValue lv = mle ? nll_loss(g, bs, g.constant(batch))
                       : density_matching_loss(g, bs, g.constant(batch), target);
    const double loss = g.value(lv.loss).scalar_value();
    g.backward(lv.loss);
    std::vector<Tensor> grads;
    grads.reserve(bs.param_leaves.size());
    for (Value leaf : bs.param_leaves) grads.push_back(g.adjoint(leaf));

    adam_step(params, grads, st.adam, st.lr);
    if (cfg.polyak > 0.0) polyak_update(st.polyak_params, cparams, cfg.polyak);

    st.loss_window[static_cast<size_t>(st.window_pos)] = loss;
    st.window_pos = (st.window_pos + 1) % kLossWindow;
    st.window_count = std::min<long>(st.window_count + 1, kLossWindow);
    st.iteration = iter;

    MetricsRow row{iter, loss, st.lr, std::nullopt};
    if (iter % cfg.eval_interval == 0) {
      const double metric = mle ? held_out_nll(st, cfg, held_out) : window_mean(st);
      row.eval_metric = metric;
      st.lr = lr_schedule(st.patience, metric, st.lr, cfg.decay_rate, cfg.patience,
                          cfg.eval_interval);
      save();
    }
    result.history.push_back(row);
    if (metrics.is_open()) {
      metrics << row.iteration << ',' << format_float(row.loss) << ',' << format_float(row.lr)
              << ',' << (row.eval_metric ? format_float(*row.eval_metric) : "") << '\n';
    }
  }

  save();
  if (metrics.is_open() && !metrics.flush()) {
    throw IoError("failed writing metrics file " + cfg.metrics_path);
  }
  return result;
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
  validate(cfg);
  Checkpoint ck;
  ck.config = cfg;
  TrainerState& st = ck.state;
  Rng init_rng = Rng::derive(cfg.seed, kSaltInit);
  st.stack = init_stack(cfg.d, cfg.k, cfg.hidden_layers, cfg.n_flows, init_rng);
  st.adam = make_adam_state(st.stack);
  if (cfg.polyak > 0.0) st.polyak_params = copy_params(st.stack);
  st.data_rng = Rng::derive(cfg.seed, kSaltData);
  st.iteration = 0;
  st.lr = cfg.initial_lr;
  st.loss_window.assign(static_cast<size_t>(kLossWindow), 0.0);
  return run_loop(std::move(ck));
}

TrainResult train_from(Checkpoint checkpoint) { return run_loop(std::move(checkpoint)); }

}  // namespace bnaf
