#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bnaf/graph.hpp"
#include "bnaf/rng.hpp"

namespace bnaf {

// --- standard normal base distribution ---

/// log N(x; 0, I) per row: -(d/2) log(2 pi) - ||x||^2 / 2, shape (batch).
Value normal_log_prob(Value x);
Tensor normal_log_prob(const Tensor& x);
Tensor normal_sample(Rng& rng, Index batch, Index d);

// --- toy 2-D datasets ---

enum class ToyKind { EightGaussians, TwoSpirals, Checkerboard };

std::optional<ToyKind> parse_toy(std::string_view name);
std::string toy_name(ToyKind kind);
const std::vector<std::string>& toy_names();

Tensor toy_sample(ToyKind kind, Rng& rng, Index batch);

// --- 2-D energy targets, log p~(z) = -U(z) ---

enum class EnergyKind { U1, U2, U3, U4 };

std::optional<EnergyKind> parse_energy(std::string_view name);
std::string energy_name(EnergyKind kind);
const std::vector<std::string>& energy_names();

/// U(z) per row for z of shape (batch x 2); differentiable through the graph.
Value energy(EnergyKind kind, Value z);
Tensor energy(EnergyKind kind, const Tensor& z);

/// Generic energy evaluator: (graph, y) -> per-row energies, shape (batch).
using EnergyFn = std::function<Value(Graph&, Value)>;
EnergyFn energy_fn(EnergyKind kind);

}  // namespace bnaf
