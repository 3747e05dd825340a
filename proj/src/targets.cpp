#include "bnaf/targets.hpp"

#include <cmath>

namespace bnaf {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
}

Value normal_log_prob(Value x) {
  Graph* g = x.graph;
  const Tensor& xv = g->value(x);
  if (xv.rank() != 2) {
    throw DimensionError("normal_log_prob expects (batch x d), got " + shape_str(xv.shape()));
  }
  const double c = -0.5 * static_cast<double>(xv.extent(1)) * kLog2Pi;
  return sum(x * x, 1) * -0.5 + c;
}

Tensor normal_log_prob(const Tensor& x) {
  Graph g;
  return g.value(normal_log_prob(g.constant(x)));
}

Tensor normal_sample(Rng& rng, Index batch, Index d) {
  Tensor t({batch, d});
  rng.fill_normal(t);
  return t;
}

std::optional<ToyKind> parse_toy(std::string_view name) {
  if (name == "eight_gaussians") return ToyKind::EightGaussians;
  if (name == "two_spirals") return ToyKind::TwoSpirals;
  if (name == "checkerboard") return ToyKind::Checkerboard;
  return std::nullopt;
}

std::string toy_name(ToyKind kind) {
  switch (kind) {
    case ToyKind::EightGaussians: return "eight_gaussians";
    case ToyKind::TwoSpirals: return "two_spirals";
    case ToyKind::Checkerboard: return "checkerboard";
  }
  throw ConfigError("unknown toy kind");
}

const std::vector<std::string>& toy_names() {
  static const std::vector<std::string> names{"eight_gaussians", "two_spirals", "checkerboard"};
  return names;
}

Tensor toy_sample(ToyKind kind, Rng& rng, Index batch) {
  Tensor out({batch, 2});
  switch (kind) {
    case ToyKind::EightGaussians: {
      for (Index r = 0; r < batch; ++r) {
        const double angle = 2.0 * M_PI * static_cast<double>(rng.below(8)) / 8.0;
        out.at(r, 0) = 2.0 * std::cos(angle) + 0.2 * rng.normal();
        out.at(r, 1) = 2.0 * std::sin(angle) + 0.2 * rng.normal();
      }
      break;
    }
    case ToyKind::TwoSpirals: {
      for (Index r = 0; r < batch; ++r) {
        const double t = rng.uniform01();
        const double arm = rng.uniform01() < 0.5 ? 1.0 : -1.0;
        const double theta = t * 1.5 * M_PI;
        out.at(r, 0) = arm * t * std::cos(theta) + 0.05 * rng.normal();
        out.at(r, 1) = arm * t * std::sin(theta) + 0.05 * rng.normal();
      }
      break;
    }
    case ToyKind::Checkerboard: {
      // 32 unit cells (i, j) on [-4,4)^2 with i+j even, enumerated row-major.
      for (Index r = 0; r < batch; ++r) {
        const uint64_t cell = rng.below(32);
        const Index ci = static_cast<Index>(cell) / 4;        // 0..7 -> i = ci - 4
        const Index cj2 = static_cast<Index>(cell) % 4;       // 4 even-parity cells per row
        const Index i = ci - 4;
        const Index j = -4 + 2 * cj2 + ((i % 2 + 2) % 2);     // (i + j) even
        out.at(r, 0) = static_cast<double>(i) + rng.uniform01();
        out.at(r, 1) = static_cast<double>(j) + rng.uniform01();
      }
      break;
    }
  }
  return out;
}

std::optional<EnergyKind> parse_energy(std::string_view name) {
  if (name == "u1") return EnergyKind::U1;
  if (name == "u2") return EnergyKind::U2;
  if (name == "u3") return EnergyKind::U3;
  if (name == "u4") return EnergyKind::U4;
  return std::nullopt;
}

std::string energy_name(EnergyKind kind) {
  switch (kind) {
    case EnergyKind::U1: return "u1";
    case EnergyKind::U2: return "u2";
    case EnergyKind::U3: return "u3";
    case EnergyKind::U4: return "u4";
  }
  throw ConfigError("unknown energy kind");
}

const std::vector<std::string>& energy_names() {
  static const std::vector<std::string> names{"u1", "u2", "u3", "u4"};
  return names;
}

Value energy(EnergyKind kind, Value z) {
  Graph* g = z.graph;
  const Tensor& zv = g->value(z);
  if (zv.rank() != 2 || zv.extent(1) != 2) {
    throw DimensionError("energy expects (batch x 2), got " + shape_str(zv.shape()));
  }
  const Index batch = zv.extent(0);
  Value z1 = select_cols(z, {0});
  Value z2 = select_cols(z, {1});
  auto sq = [](Value v) { return v * v; };

  Value u;
  switch (kind) {
    case EnergyKind::U1: {
      Value r = sqrt(z1 * z1 + z2 * z2);
      Value ring = sq((r - 2.0) * (1.0 / 0.4)) * 0.5;
      Value e1 = sq((z1 - 2.0) * (1.0 / 0.6)) * -0.5;
      Value e2 = sq((z1 + 2.0) * (1.0 / 0.6)) * -0.5;
      u = ring - logaddexp(e1, e2);
      break;
    }
    case EnergyKind::U2: {
      Value w1 = sin(z1 * (2.0 * M_PI / 4.0));
      u = sq((z2 - w1) * (1.0 / 0.4)) * 0.5;
      break;
    }
    case EnergyKind::U3: {
      Value w1 = sin(z1 * (2.0 * M_PI / 4.0));
      Value w2 = 3.0 * exp(sq((z1 - 1.0) * (1.0 / 0.6)) * -0.5);
      Value e1 = sq((z2 - w1) * (1.0 / 0.35)) * -0.5;
      Value e2 = sq((z2 - w1 + w2) * (1.0 / 0.35)) * -0.5;
      u = neg(logaddexp(e1, e2));
      break;
    }
    case EnergyKind::U4: {
      Value w1 = sin(z1 * (2.0 * M_PI / 4.0));
      Value w3 = 3.0 * sigmoid((z1 - 1.0) * (1.0 / 0.3));
      Value e1 = sq((z2 - w1) * (1.0 / 0.4)) * -0.5;
      Value e2 = sq((z2 - w1 + w3) * (1.0 / 0.35)) * -0.5;
      u = neg(logaddexp(e1, e2));
      break;
    }
  }
  return reshape(u, {batch});
}

Tensor energy(EnergyKind kind, const Tensor& z) {
  Graph g;
  return g.value(energy(kind, g.constant(z)));
}

EnergyFn energy_fn(EnergyKind kind) {
  return [kind](Graph&, Value y) { return energy(kind, y); };
}

}  // namespace bnaf
