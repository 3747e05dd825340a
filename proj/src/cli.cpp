#include "bnaf/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bnaf/checkpoint.hpp"
#include "bnaf/density.hpp"
#include "bnaf/io_util.hpp"

namespace bnaf {

namespace {

namespace fs = std::filesystem;

constexpr uint64_t kSaltSample = 0xb1a5ed04;

struct TrainFlags {
  Index k = 10;
  Index layers = 2;
  Index flows = 1;
  long iters = 5000;
  double lr = 1e-2;
  Index batch = 200;
  uint64_t seed = 0;
  double decay = 0.5;
  long patience = 2000;
  double polyak = 0.998;
  long eval_interval = 100;
  std::string out;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--k", f.k, "hidden width multiplier (H = k*d units)")->capture_default_str();
  cmd->add_option("--layers", f.layers, "hidden tanh layers per flow")->capture_default_str();
  cmd->add_option("--flows", f.flows, "number of stacked flows")->capture_default_str();
  cmd->add_option("--iters", f.iters, "training iterations")->capture_default_str();
  cmd->add_option("--lr", f.lr, "initial learning rate")->capture_default_str();
  cmd->add_option("--batch", f.batch, "batch size")->capture_default_str();
  cmd->add_option("--seed", f.seed, "rng seed (sole entropy source)")->capture_default_str();
  cmd->add_option("--decay", f.decay, "lr decay factor on patience expiry")->capture_default_str();
  cmd->add_option("--patience", f.patience, "iterations without improvement before decay")
      ->capture_default_str();
  cmd->add_option("--polyak", f.polyak, "parameter averaging factor (0 disables)")
      ->capture_default_str();
  cmd->add_option("--eval-interval", f.eval_interval, "iterations between evaluations")
      ->capture_default_str();
  cmd->add_option("--out", f.out, "output directory")->required();
}

TrainConfig to_config(const TrainFlags& f, Objective objective, const std::string& target) {
  TrainConfig cfg;
  cfg.objective = objective;
  cfg.target = target;
  cfg.d = 2;
  cfg.k = f.k;
  cfg.hidden_layers = f.layers;
  cfg.n_flows = f.flows;
  cfg.batch_size = f.batch;
  cfg.max_iterations = f.iters;
  cfg.initial_lr = f.lr;
  cfg.decay_rate = f.decay;
  cfg.patience = f.patience;
  cfg.polyak = f.polyak;
  cfg.seed = f.seed;
  cfg.eval_interval = f.eval_interval;
  cfg.checkpoint_path = (fs::path(f.out) / "checkpoint.bnaf").string();
  cfg.metrics_path = (fs::path(f.out) / "metrics.csv").string();
  return cfg;
}

void prepare_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    throw IoError("cannot create output directory " + out);
  }
}

void write_samples_csv(const std::string& path, const Tensor& samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open sample file " + path);
  out << "x1,x2\n";
  for (Index r = 0; r < samples.extent(0); ++r) {
    out << format_g17(samples.at(r, 0)) << ',' << format_g17(samples.at(r, 1)) << '\n';
  }
  if (!out.flush()) throw IoError("failed writing sample file " + path);
}

// Rows of comma-separated floats; a non-numeric first line is a header.
Tensor read_rows_csv(const std::string& path, Index cols) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file " + path);
  std::vector<double> values;
  std::string line;
  bool first = true;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    bool numeric = true;
    while (std::getline(ss, field, ',')) {
      try {
        size_t pos = 0;
        row.push_back(std::stod(field, &pos));
        if (pos != field.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw IoError("input file " + path + ": non-numeric row '" + line + "'");
    }
    first = false;
    if (static_cast<Index>(row.size()) != cols) {
      throw IoError("input file " + path + ": expected " + std::to_string(cols) +
                    " columns, got " + std::to_string(row.size()));
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  return Tensor({rows, cols}, std::move(values));
}

int cmd_fit_density(const TrainFlags& flags, const std::string& data_kind, Index grid_res) {
  TrainConfig cfg = to_config(flags, Objective::Mle, data_kind);
  validate(cfg);
  prepare_out_dir(flags.out);
  TrainResult result = train(cfg);
  const FlowStack model = eval_stack(result.checkpoint);
  GridSpec spec;
  spec.res = grid_res;
  const Tensor ld = grid_log_density(model, Objective::Mle, spec);
  write_grid_csv((fs::path(flags.out) / "density_grid.csv").string(), spec, ld);
  return 0;
}

int cmd_match_energy(const TrainFlags& flags, const std::string& target, Index grid_res,
                     Index n_samples, double tol) {
  TrainConfig cfg = to_config(flags, Objective::Match, target);
  validate(cfg);
  prepare_out_dir(flags.out);
  TrainResult result = train(cfg);
  const FlowStack model = eval_stack(result.checkpoint);

  Rng sample_rng = Rng::derive(cfg.seed, kSaltSample);
  const Tensor base = normal_sample(sample_rng, n_samples, cfg.d);
  const StackEval ev = stack_eval(model, base);
  write_samples_csv((fs::path(flags.out) / "samples.csv").string(), ev.y);

  GridSpec spec;
  spec.res = grid_res;
  const Tensor ld = grid_log_density(model, Objective::Match, spec, tol);
  write_grid_csv((fs::path(flags.out) / "density_grid.csv").string(), spec, ld);
  return 0;
}

int cmd_eval_grid(const std::string& checkpoint, const GridSpec& spec, double tol,
                  const std::string& out) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const FlowStack model = eval_stack(ck);
  const Tensor ld = grid_log_density(model, ck.config.objective, spec, tol);
  write_grid_csv(out, spec, ld);
  return 0;
}

int cmd_invert(const std::string& checkpoint, const std::string& in_path, double tol,
               const std::string& out_path) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const FlowStack model = eval_stack(ck);
  const Tensor y = read_rows_csv(in_path, model.d);

  Tensor x({y.extent(0), model.d});
  double max_err = 0.0;
  if (y.extent(0) > 0) {
    x = flow_inverse(model, y, tol);
    const StackEval ev = stack_eval(model, x);
    for (Index r = 0; r < y.extent(0); ++r) {
      for (Index j = 0; j < model.d; ++j) {
        max_err = std::max(max_err, std::abs(ev.y.at(r, j) - y.at(r, j)));
      }
    }
  }

  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw IoError("cannot open output file " + out_path);
  for (Index j = 0; j < model.d; ++j) out << (j ? "," : "") << "x" << (j + 1);
  out << '\n';
  for (Index r = 0; r < x.extent(0); ++r) {
    for (Index j = 0; j < model.d; ++j) out << (j ? "," : "") << format_g17(x.at(r, j));
    out << '\n';
  }
  if (!out.flush()) throw IoError("failed writing output file " + out_path);
  std::cout << "max round-trip error: " << format_g17(max_err) << "\n";
  return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  CLI::App app{"Block neural autoregressive flows: density estimation and matching in 2-D"};
  app.require_subcommand(1);

  TrainFlags fit_flags;
  std::string data_kind;
  Index fit_grid_res = 200;
  auto* fit = app.add_subcommand("fit-density", "fit a density to a toy dataset by max likelihood");
  fit->add_option("--data", data_kind, "dataset: eight_gaussians, two_spirals, checkerboard")
      ->required();
  add_train_flags(fit, fit_flags);
  fit->add_option("--grid-res", fit_grid_res, "resolution of the emitted density grid")
      ->capture_default_str();

  TrainFlags match_flags;
  std::string energy_target;
  Index match_grid_res = 80;
  Index match_samples = 10000;
  double match_tol = 1e-8;
  auto* match = app.add_subcommand("match-energy", "match an energy target by reverse KL");
  match->add_option("--target", energy_target, "energy: u1, u2, u3, u4")->required();
  add_train_flags(match, match_flags);
  match->add_option("--grid-res", match_grid_res, "resolution of the emitted density grid")
      ->capture_default_str();
  match->add_option("--samples", match_samples, "rows in the emitted sample file")
      ->capture_default_str();
  match->add_option("--tol", match_tol, "inversion tolerance for the density grid")
      ->capture_default_str();

  std::string eg_checkpoint, eg_out = "grid.csv";
  GridSpec eg_spec;
  double eg_tol = 1e-8;
  auto* eval_grid = app.add_subcommand("eval-grid", "evaluate model log-density on a lattice");
  eval_grid->add_option("--checkpoint", eg_checkpoint, "checkpoint file")->required();
  eval_grid->add_option("--xmin", eg_spec.xmin)->capture_default_str();
  eval_grid->add_option("--xmax", eg_spec.xmax)->capture_default_str();
  eval_grid->add_option("--ymin", eg_spec.ymin)->capture_default_str();
  eval_grid->add_option("--ymax", eg_spec.ymax)->capture_default_str();
  eval_grid->add_option("--res", eg_spec.res, "points per axis")->capture_default_str();
  eval_grid->add_option("--tol", eg_tol, "inversion tolerance (match models)")
      ->capture_default_str();
  eval_grid->add_option("--out", eg_out, "output CSV path")->capture_default_str();

  std::string inv_checkpoint, inv_in, inv_out = "inverted.csv";
  double inv_tol = 1e-8;
  auto* invert = app.add_subcommand("invert", "map sample-space rows back through the flow");
  invert->add_option("--checkpoint", inv_checkpoint, "checkpoint file")->required();
  invert->add_option("--in", inv_in, "CSV of rows to invert")->required();
  invert->add_option("--tol", inv_tol, "round-trip tolerance")->capture_default_str();
  invert->add_option("--out", inv_out, "output CSV path")->capture_default_str();

  Index cp_d = 0, cp_k = 0, cp_layers = 0, cp_flows = 0;
  auto* count = app.add_subcommand("count-params", "count trainable scalars for a configuration");
  count->add_option("--d", cp_d, "input dimensionality")->required();
  count->add_option("--k", cp_k, "hidden width multiplier")->required();
  count->add_option("--layers", cp_layers, "hidden tanh layers per flow")->required();
  count->add_option("--flows", cp_flows, "number of stacked flows")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (fit->parsed()) return cmd_fit_density(fit_flags, data_kind, fit_grid_res);
    if (match->parsed()) {
      return cmd_match_energy(match_flags, energy_target, match_grid_res, match_samples,
                              match_tol);
    }
    if (eval_grid->parsed()) return cmd_eval_grid(eg_checkpoint, eg_spec, eg_tol, eg_out);
    if (invert->parsed()) return cmd_invert(inv_checkpoint, inv_in, inv_tol, inv_out);
    if (count->parsed()) {
      std::cout << count_params(cp_d, cp_k, cp_layers, cp_flows) << "\n";
      return 0;
    }
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bnaf
