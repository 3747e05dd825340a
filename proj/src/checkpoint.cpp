#include "bnaf/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <utility>

#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written as native little-endian float64");

namespace bnaf {

namespace {

using nlohmann::json;

constexpr char kMagic[9] = "BNAFCKPT";
constexpr uint8_t kVersion = 1;

struct ManifestEntry {
  std::string name;
  Shape shape;
  const Tensor* tensor = nullptr;  // save side
  Tensor* target = nullptr;        // load side
};

// The manifest is fully determined by the config plus the fixed trainer
// extras; both save and load derive it from the same code path.
std::vector<ManifestEntry> build_manifest(TrainerState& st, bool with_polyak) {
  std::vector<ManifestEntry> entries;
  auto add = [&](const std::string& name, Tensor* t) {
    entries.push_back({name, t->shape(), t, t});
  };
  auto params = named_params(st.stack);
  for (auto& p : params) add(p.name, p.tensor);
  for (size_t i = 0; i < params.size(); ++i) add("adam.m." + params[i].name, &st.adam.m[i]);
  for (size_t i = 0; i < params.size(); ++i) add("adam.v." + params[i].name, &st.adam.v[i]);
  if (with_polyak) {
    for (size_t i = 0; i < params.size(); ++i) {
      add("polyak." + params[i].name, &st.polyak_params[i]);
    }
  }
  return entries;
}

json config_to_json(const TrainConfig& cfg) {
  return json{{"objective", objective_name(cfg.objective)},
              {"target", cfg.target},
              {"d", cfg.d},
              {"k", cfg.k},
              {"hidden_layers", cfg.hidden_layers},
              {"n_flows", cfg.n_flows},
              {"batch_size", cfg.batch_size},
              {"max_iterations", cfg.max_iterations},
              {"initial_lr", cfg.initial_lr},
              {"decay_rate", cfg.decay_rate},
              {"patience", cfg.patience},
              {"polyak", cfg.polyak},
              {"seed", cfg.seed},
              {"eval_interval", cfg.eval_interval},
              {"checkpoint_path", cfg.checkpoint_path},
              {"metrics_path", cfg.metrics_path}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig cfg;
  const auto obj = parse_objective(j.at("objective").get<std::string>());
  if (!obj) throw IoError("checkpoint header: unknown objective");
  cfg.objective = *obj;
  cfg.target = j.at("target").get<std::string>();
  cfg.d = j.at("d").get<Index>();
  cfg.k = j.at("k").get<Index>();
  cfg.hidden_layers = j.at("hidden_layers").get<Index>();
  cfg.n_flows = j.at("n_flows").get<Index>();
  cfg.batch_size = j.at("batch_size").get<Index>();
  cfg.max_iterations = j.at("max_iterations").get<long>();
  cfg.initial_lr = j.at("initial_lr").get<double>();
  cfg.decay_rate = j.at("decay_rate").get<double>();
  cfg.patience = j.at("patience").get<long>();
  cfg.polyak = j.at("polyak").get<double>();
  cfg.seed = j.at("seed").get<uint64_t>();
  cfg.eval_interval = j.at("eval_interval").get<long>();
  cfg.checkpoint_path = j.at("checkpoint_path").get<std::string>();
  cfg.metrics_path = j.at("metrics_path").get<std::string>();
  return cfg;
}

std::string hex_u64(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

uint64_t parse_hex_u64(const std::string& s) {
  if (s.rfind("0x", 0) != 0) throw IoError("checkpoint header: malformed rng word " + s);
  return std::stoull(s.substr(2), nullptr, 16);
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  auto& st = const_cast<TrainerState&>(ck.state);
  const bool with_polyak = ck.config.polyak > 0.0 && !st.polyak_params.empty();
  auto manifest = build_manifest(st, with_polyak);

  json header;
  header["format_version"] = ck.format_version;
  header["config"] = config_to_json(ck.config);
  header["iteration"] = st.iteration;
  header["adam_t"] = st.adam.t;
  json rng = json::array();
  for (uint64_t w : st.data_rng.state()) rng.push_back(hex_u64(w));
  header["rng_state"] = rng;
  header["trainer"] = json{{"window_count", st.window_count}, {"window_pos", st.window_pos}};
  json man = json::array();
  for (const auto& e : manifest) {
    man.push_back(json{{"name", e.name}, {"shape", e.shape}});
  }
  man.push_back(json{{"name", "trainer.scalars"}, {"shape", Shape{4}}});
  man.push_back(json{{"name", "trainer.loss_window"},
                     {"shape", Shape{static_cast<Index>(st.loss_window.size())}}});
  header["manifest"] = man;

  const std::string header_str = header.dump();
  if (header_str.size() > 0xffffffffull) throw IoError("checkpoint header too large");

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open checkpoint file " + tmp);
    out.write(kMagic, 8);
    out.put(static_cast<char>(kVersion));
    const uint32_t len = static_cast<uint32_t>(header_str.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& e : manifest) {
      out.write(reinterpret_cast<const char*>(e.tensor->data()),
                static_cast<std::streamsize>(e.tensor->numel() * sizeof(double)));
    }
    const double scalars[4] = {st.lr, st.patience.best_metric,
                               static_cast<double>(st.patience.since_improvement),
                               static_cast<double>(st.adam.t)};
    out.write(reinterpret_cast<const char*>(scalars), sizeof(scalars));
    out.write(reinterpret_cast<const char*>(st.loss_window.data()),
              static_cast<std::streamsize>(st.loss_window.size() * sizeof(double)));
    if (!out.flush()) throw IoError("failed writing checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint file " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw IoError("checkpoint " + path + ": bad magic (not a BNAFCKPT file)");
  }
  const int version = in.get();
  if (version != kVersion) {
    throw IoError("checkpoint " + path + ": unsupported format version " +
                  std::to_string(version));
  }
  uint32_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof(len))) {
    throw IoError("checkpoint " + path + ": truncated header length");
  }
  std::string header_str(len, '\0');
  if (!in.read(header_str.data(), len)) {
    throw IoError("checkpoint " + path + ": truncated header");
  }

  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::exception& e) {
    throw IoError("checkpoint " + path + ": malformed header JSON (" + e.what() + ")");
  }

  Checkpoint ck;
  try {
    ck.format_version = header.at("format_version").get<int>();
    ck.config = config_from_json(header.at("config"));
    validate(ck.config);
    TrainerState& st = ck.state;
    st.stack = make_stack(ck.config.d, ck.config.k, ck.config.hidden_layers, ck.config.n_flows);
    st.adam = make_adam_state(st.stack);
    const bool with_polyak = ck.config.polyak > 0.0;
    if (with_polyak) {
      for (const ConstParamRef& p : named_params(std::as_const(st.stack))) {
        st.polyak_params.push_back(Tensor::zeros(p.tensor->shape()));
      }
    }
    st.iteration = header.at("iteration").get<long>();
    st.adam.t = header.at("adam_t").get<long>();
    std::array<uint64_t, 4> rng_state{};
    const auto& rng_words = header.at("rng_state");
    if (rng_words.size() != 4) throw IoError("checkpoint header: rng_state must have 4 words");
    for (size_t i = 0; i < 4; ++i) rng_state[i] = parse_hex_u64(rng_words[i].get<std::string>());
    st.data_rng.set_state(rng_state);
    st.window_count = header.at("trainer").at("window_count").get<long>();
    st.window_pos = header.at("trainer").at("window_pos").get<long>();

    auto manifest = build_manifest(st, with_polyak);
    const auto& man = header.at("manifest");
    if (man.size() != manifest.size() + 2) {
      throw IoError("checkpoint header: manifest has " + std::to_string(man.size()) +
                    " entries, expected " + std::to_string(manifest.size() + 2));
    }
    for (size_t i = 0; i < manifest.size(); ++i) {
      const std::string name = man[i].at("name").get<std::string>();
      const Shape shape = man[i].at("shape").get<Shape>();
      if (name != manifest[i].name || shape != manifest[i].shape) {
        throw IoError("checkpoint header: manifest entry " + std::to_string(i) + " is '" + name +
                      "' " + shape_str(shape) + ", expected '" + manifest[i].name + "' " +
                      shape_str(manifest[i].shape));
      }
    }
    const Shape window_shape = man[manifest.size() + 1].at("shape").get<Shape>();
    if (window_shape.size() != 1 || window_shape[0] != kLossWindow) {
      throw IoError("checkpoint header: unexpected loss window shape");
    }

    for (auto& e : manifest) {
      if (!in.read(reinterpret_cast<char*>(e.target->data()),
                   static_cast<std::streamsize>(e.target->numel() * sizeof(double)))) {
        throw IoError("checkpoint " + path + ": truncated payload at " + e.name);
      }
    }
    double scalars[4];
    if (!in.read(reinterpret_cast<char*>(scalars), sizeof(scalars))) {
      throw IoError("checkpoint " + path + ": truncated trainer scalars");
    }
    st.lr = scalars[0];
    st.patience.best_metric = scalars[1];
    st.patience.since_improvement = static_cast<long>(scalars[2]);
    st.adam.t = static_cast<long>(scalars[3]);
    st.loss_window.assign(static_cast<size_t>(kLossWindow), 0.0);
    if (!in.read(reinterpret_cast<char*>(st.loss_window.data()),
                 static_cast<std::streamsize>(st.loss_window.size() * sizeof(double)))) {
      throw IoError("checkpoint " + path + ": truncated loss window");
    }
  } catch (const json::exception& e) {
    throw IoError("checkpoint " + path + ": malformed header field (" + std::string(e.what()) +
                  ")");
  }
  return ck;
}

}  // namespace bnaf
