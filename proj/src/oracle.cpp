#include "spcl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "spcl/error.hpp"

namespace spcl::oracle {

GridSpec GridSpec::unit_cube(std::size_t dims, std::size_t count) {
  GridSpec spec;
  spec.axes.assign(dims, Axis{0.0, 1.0, count});
  return spec;
}

namespace {

double axis_point(const Axis& a, std::size_t i) {
  if (i + 1 == a.count) return a.hi;
  return a.lo + (a.hi - a.lo) * static_cast<double>(i) / static_cast<double>(a.count - 1);
}

}  // namespace

GridMinimum grid_constrained_inf(const Objective& objective, const GridSpec& grid, const Membership& feasible) {
  const std::size_t n = grid.dimension();
  if (n == 0 || n > 3) throw Error(ErrorCode::kBadParam, "grid oracle supports 1 to 3 dimensions");
  for (const Axis& a : grid.axes) {
    if (!(a.lo < a.hi) || a.count < 3) throw Error(ErrorCode::kBadGrid, "grid axis needs lo < hi and count >= 3");
  }

  std::vector<std::size_t> idx(n, 0);
  std::vector<double> point(n);
  std::vector<std::size_t> best_idx;
  GridMinimum result;
  result.value = kPosInf;

  auto eval = [&](const std::vector<std::size_t>& at, double& out) {
    for (std::size_t d = 0; d < n; ++d) point[d] = axis_point(grid.axes[d], at[d]);
    if (feasible && !feasible(point)) return false;
    out = objective(point);
    return std::isfinite(out);
  };

  auto advance = [&](std::vector<std::size_t>& at) {
    for (std::size_t d = n; d-- > 0;) {
      if (++at[d] < grid.axes[d].count) return true;
      at[d] = 0;
    }
    return false;
  };

  while (true) {
    double f = 0.0;
    if (eval(idx, f)) {
      ++result.feasible_points;
      if (f < result.value) {
        result.value = f;
        best_idx = idx;
      }
    }
    if (!advance(idx)) break;
  }
  if (result.feasible_points == 0) throw Error(ErrorCode::kEmptyFeasible, "no feasible grid point");

  result.argmin.resize(n);
  for (std::size_t d = 0; d < n; ++d) result.argmin[d] = axis_point(grid.axes[d], best_idx[d]);

  // largest change to a feasible neighbour of the minimizer, summed over axes
  for (std::size_t d = 0; d < n; ++d) {
    double worst = 0.0;
    for (int dir : {-1, 1}) {
      std::vector<std::size_t> nb = best_idx;
      if (dir < 0 && nb[d] == 0) continue;
      if (dir > 0 && nb[d] + 1 >= grid.axes[d].count) continue;
      nb[d] = dir < 0 ? nb[d] - 1 : nb[d] + 1;
      double f = 0.0;
      if (eval(nb, f)) worst = std::max(worst, std::abs(f - result.value));
    }
    result.error_bound += worst;
  }
  return result;
}

Derivative finite_diff(const std::function<double(double)>& fn, double x, double h) {
  const double f_plus = fn(x + h);
  const double f_minus = fn(x - h);
  const bool plus_ok = std::isfinite(f_plus);
  const bool minus_ok = std::isfinite(f_minus);
  if (plus_ok && minus_ok) return {(f_plus - f_minus) / (2.0 * h), false};
  const double f0 = fn(x);
  if (!std::isfinite(f0)) throw Error(ErrorCode::kOutsideDomain, "finite_diff: function not finite at x");
  if (plus_ok) return {(f_plus - f0) / h, true};
  if (minus_ok) return {(f0 - f_minus) / h, true};
  throw Error(ErrorCode::kOutsideDomain, "finite_diff: no finite neighbour");
}

SampledFunction random_concave(std::uint64_t seed, const std::vector<double>& grid) {
  if (grid.size() < 8) throw Error(ErrorCode::kBadGrid, "random_concave needs at least 8 grid points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = grid.size();

  // sub-interval covering at least 30% of the grid
  const std::size_t min_len = std::max<std::size_t>(4, (3 * n) / 10);
  const std::size_t len = min_len + static_cast<std::size_t>(unit(rng) * static_cast<double>(n - min_len));
  const std::size_t first = static_cast<std::size_t>(unit(rng) * static_cast<double>(n - len + 1));
  const std::size_t last = std::min(n - 1, first + len - 1);

  const std::size_t cells = last - first;
  std::vector<double> slopes(cells);
  double slope = -2.0 + 6.0 * unit(rng);
  const double smooth_total = 3.0 * unit(rng);
  const int kinks = static_cast<int>(unit(rng) * 4.0);
  std::vector<std::size_t> kink_at;
  for (int i = 0; i < kinks; ++i) kink_at.push_back(static_cast<std::size_t>(unit(rng) * static_cast<double>(cells)));
  for (std::size_t c = 0; c < cells; ++c) {
    slope -= 2.0 * smooth_total * unit(rng) / static_cast<double>(cells);
    for (std::size_t k : kink_at) {
      if (k == c) slope -= 2.0 * unit(rng);
    }
    slope = std::max(slope, -4.0);
    slopes[c] = slope;
  }

  std::vector<double> values(n, kNegInf);
  values[first] = -1.0 + 2.0 * unit(rng);
  for (std::size_t c = 0; c < cells; ++c) {
    values[first + c + 1] = values[first + c] + slopes[c] * (grid[first + c + 1] - grid[first + c]);
  }
  return SampledFunction(grid, std::move(values));
}

}  // namespace spcl::oracle
