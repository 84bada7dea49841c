#pragma once

// Brute-force reference computations. Nothing here shares code paths with the
// solvers it is used to check: no refinement, no closed forms, no fast paths.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spcl/sampled_function.hpp"

namespace spcl::oracle {

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 201;
};

struct GridSpec {
  std::vector<Axis> axes;

  static GridSpec unit_cube(std::size_t dims, std::size_t count);
  std::size_t dimension() const { return axes.size(); }
};

struct GridMinimum {
  double value = 0.0;
  std::vector<double> argmin;
  double error_bound = 0.0;  // grid step times the largest observed slope
  std::size_t feasible_points = 0;
};

using Objective = std::function<double(std::span<const double>)>;
using Membership = std::function<bool(std::span<const double>)>;

/// Exhaustive scan over the tensor grid (n <= 3). Points rejected by
/// `feasible` (when given) or where the objective is not finite are skipped.
/// Ties go to the lexicographically lowest grid index. Throws EmptyFeasible.
GridMinimum grid_constrained_inf(const Objective& objective, const GridSpec& grid,
                                 const Membership& feasible = nullptr);

struct Derivative {
  double value = 0.0;
  bool one_sided = false;
};

/// Central difference (fn(x+h) - fn(x-h)) / 2h. When one side is not finite
/// it falls back to the one-sided difference and flags it.
Derivative finite_diff(const std::function<double(double)>& fn, double x, double h);

/// A closed proper concave function on `grid`: the running integral of a
/// random non-increasing slope sequence on a random sub-interval of the grid
/// range, -inf elsewhere. Deterministic per seed.
SampledFunction random_concave(std::uint64_t seed, const std::vector<double>& grid);

}  // namespace spcl::oracle
