#pragma once

#include <string>

#include "bnaf/trainer.hpp"

namespace bnaf {

struct GridSpec {
  double xmin = -4.0, xmax = 4.0;
  double ymin = -4.0, ymax = 4.0;
  Index res = 200;  // points per axis, endpoints included
};

/// Lattice points in x-outer, y-inner order, shape (res*res x 2).
Tensor grid_points(const GridSpec& spec);

/// Model log-density at each lattice point, shape (res*res).
/// Mle models evaluate log N(f(p)) + log_det(p) at the point directly;
/// match models treat the point as a sample-space value and evaluate
/// log N(f^{-1}(p)) - log_det(f^{-1}(p)) via numerical inversion.
Tensor grid_log_density(const FlowStack& stack, Objective objective, const GridSpec& spec,
                        double tol = 1e-8);

/// Trapezoid integral of exp(log_density) over the grid box.
double trapezoid_mass(const Tensor& log_density, const GridSpec& spec);

/// CSV with header x,y,log_density and one row per lattice point.
void write_grid_csv(const std::string& path, const GridSpec& spec, const Tensor& log_density);

}  // namespace bnaf
