#pragma once

#include <string>

namespace bnaf {

/// %.17g rendering: round-trips any finite float64 exactly.
std::string format_g17(double v);

}  // namespace bnaf
