#include "bnaf/density.hpp"

#include <cmath>
#include <fstream>

#include "bnaf/io_util.hpp"

namespace bnaf {

namespace {

constexpr Index kChunk = 4096;

void validate_spec(const GridSpec& spec) {
  if (spec.res < 2) throw ConfigError("grid res must be >= 2");
  if (!(spec.xmax > spec.xmin) || !(spec.ymax > spec.ymin)) {
    throw ConfigError("grid bounds must satisfy xmin < xmax and ymin < ymax");
  }
}

double axis_point(double lo, double hi, Index res, Index i) {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(res - 1);
}

}  // namespace

Tensor grid_points(const GridSpec& spec) {
  validate_spec(spec);
  Tensor pts({spec.res * spec.res, 2});
  for (Index ix = 0; ix < spec.res; ++ix) {
    const double x = axis_point(spec.xmin, spec.xmax, spec.res, ix);
    for (Index iy = 0; iy < spec.res; ++iy) {
      pts.at(ix * spec.res + iy, 0) = x;
      pts.at(ix * spec.res + iy, 1) = axis_point(spec.ymin, spec.ymax, spec.res, iy);
    }
  }
  return pts;
}

Tensor grid_log_density(const FlowStack& stack, Objective objective, const GridSpec& spec,
                        double tol) {
  if (stack.d != 2) throw ConfigError("grid evaluation requires a 2-dimensional model");
  const Tensor pts = grid_points(spec);
  const Index n = pts.extent(0);
  Tensor out({n});
  for (Index start = 0; start < n; start += kChunk) {
    const Index len = std::min<Index>(kChunk, n - start);
    Tensor chunk({len, 2});
    for (Index r = 0; r < len; ++r) {
      chunk.at(r, 0) = pts.at(start + r, 0);
      chunk.at(r, 1) = pts.at(start + r, 1);
    }
    Tensor per_row;
    if (objective == Objective::Mle) {
      const StackEval ev = stack_eval(stack, chunk);
      const Tensor lp = normal_log_prob(ev.y);
      per_row = Tensor({len});
      per_row.arr() = lp.arr() + ev.log_det.arr();
    } else {
      const Tensor x_hat = flow_inverse(stack, chunk, tol);
      const StackEval ev = stack_eval(stack, x_hat);
      const Tensor lp = normal_log_prob(x_hat);
      per_row = Tensor({len});
      per_row.arr() = lp.arr() - ev.log_det.arr();
    }
    for (Index r = 0; r < len; ++r) out.at(start + r) = per_row.at(r);
  }
  return out;
}

double trapezoid_mass(const Tensor& log_density, const GridSpec& spec) {
  validate_spec(spec);
  if (log_density.numel() != spec.res * spec.res) {
    throw DimensionError("trapezoid_mass: grid size mismatch");
  }
  const double hx = (spec.xmax - spec.xmin) / static_cast<double>(spec.res - 1);
  const double hy = (spec.ymax - spec.ymin) / static_cast<double>(spec.res - 1);
  double mass = 0.0;
  for (Index ix = 0; ix < spec.res; ++ix) {
    const double wx = (ix == 0 || ix == spec.res - 1) ? 0.5 * hx : hx;
    for (Index iy = 0; iy < spec.res; ++iy) {
      const double wy = (iy == 0 || iy == spec.res - 1) ? 0.5 * hy : hy;
      mass += wx * wy * std::exp(log_density.at(ix * spec.res + iy));
    }
  }
  return mass;
}

void write_grid_csv(const std::string& path, const GridSpec& spec, const Tensor& log_density) {
  validate_spec(spec);
  if (log_density.numel() != spec.res * spec.res) {
    throw DimensionError("write_grid_csv: grid size mismatch");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open grid file " + path);
  out << "x,y,log_density\n";
  for (Index ix = 0; ix < spec.res; ++ix) {
    const double x = axis_point(spec.xmin, spec.xmax, spec.res, ix);
    for (Index iy = 0; iy < spec.res; ++iy) {
      const double y = axis_point(spec.ymin, spec.ymax, spec.res, iy);
      out << format_g17(x) << ',' << format_g17(y) << ','
          << format_g17(log_density.at(ix * spec.res + iy)) << '\n';
    }
  }
  if (!out.flush()) throw IoError("failed writing grid file " + path);
}

}  // namespace bnaf
