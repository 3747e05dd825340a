#pragma once

#include "bnaf/tensor.hpp"

namespace bnaf {

/// Binary masks selecting the diagonal blocks (m_d) and the strictly-lower
/// blocks (m_o) of an (a*d x b*d) block-triangular weight matrix. Their
/// supports are disjoint and their union is the lower block triangle.
struct BlockMasks {
  Index d = 0;  // number of coordinates (block rows/cols)
  Index a = 0;  // rows per block
  Index b = 0;  // cols per block
  Tensor m_d;   // ones exactly on blocks B_ii
  Tensor m_o;   // ones exactly on blocks B_ij, i > j

  Index rows() const { return a * d; }
  Index cols() const { return b * d; }
};

BlockMasks build_masks(Index d, Index a, Index b);

}  // namespace bnaf
