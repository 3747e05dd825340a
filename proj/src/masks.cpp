#include "bnaf/masks.hpp"

namespace bnaf {

BlockMasks build_masks(Index d, Index a, Index b) {
  if (d < 1 || a < 1 || b < 1) {
    throw ConfigError("build_masks: dimensions must be positive, got d=" + std::to_string(d) +
                      " a=" + std::to_string(a) + " b=" + std::to_string(b));
  }
  BlockMasks m;
  m.d = d;
  m.a = a;
  m.b = b;
  m.m_d = Tensor::zeros({a * d, b * d});
  m.m_o = Tensor::zeros({a * d, b * d});
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j <= i; ++j) {
      Tensor& dst = (i == j) ? m.m_d : m.m_o;
      for (Index r = 0; r < a; ++r) {
        for (Index c = 0; c < b; ++c) dst.at(i * a + r, j * b + c) = 1.0;
      }
    }
  }
  return m;
}

}  // namespace bnaf
