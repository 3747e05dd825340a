#pragma once

#include <string>

#include "bnaf/trainer.hpp"

namespace bnaf {

/// File layout: 8-byte magic "BNAFCKPT", one version byte, u32 little-endian
/// header length, JSON header (config echo, iteration, rng state, tensor
/// manifest), then raw little-endian float64 payloads in manifest order.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace bnaf
