#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "spcl/error.hpp"
#include "spcl/regularizer.hpp"
#include "spcl/sampled_function.hpp"

namespace spcl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tabulated running integral of a weight function on a uniform l-grid. Each
// cell uses the trapezoid between the one-sided limits of w at its ends, so a
// jump sitting on a node is integrated exactly. The partial-cell integral is
// the trapezoid between the left node and the query point, which keeps
// F' == w to second order inside each cell.
struct WeightTable {
  SPRegularizer::Unary w;
  std::vector<double> l;
  std::vector<double> wl;  // right limits w(l_j+)
  std::vector<double> cumulative;
  double step = 0.0;

  double weight(double a) const {
    if (a < 0.0) return 1.0;
    return std::clamp(w(a), 0.0, 1.0);
  }

  double latent(double a) const {
    if (a <= 0.0) return a;
    const std::size_t last = l.size() - 1;
    std::size_t j = std::min(static_cast<std::size_t>(a / step), last);
    if (j < last && a < l[j]) --j;
    return cumulative[j] + (a - l[j]) * (wl[j] + weight(a)) * 0.5;
  }

  // Largest l in [0, l_max] with w(l) >= v: the maximal preimage.
  double inverse(double v) const {
    const double l_max = l.back();
    if (weight(l_max) >= v) return l_max;
    if (weight(0.0) < v) return 0.0;
    double lo = 0.0;
    double hi = l_max;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      if (weight(mid) >= v) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

  double r_sp(double v) const {
    if (v < 0.0 || v > 1.0) return kInf;
    const double at = inverse(v);
    return -v * at + latent(at);
  }
};

// Piecewise-linear monotone map v -> l(v) = -(d/dv) r(v) through the cell
// midpoints, with extrapolated end values, and its inverse.
struct SlopeTable {
  SPRegularizer::Unary r;
  std::vector<double> v;  // increasing
  std::vector<double> l;  // non-increasing
  double offset = 0.0;

  // Set-valued inverses resolve to the smallest weight for a > 0 and to the
  // largest weight for a <= 0.
  double weight(double a) const {
    const std::size_t n = v.size();
    if (a > 0.0) {
      // first index with l <= a
      auto it = std::lower_bound(l.begin(), l.end(), a, [](double li, double x) { return li > x; });
      if (it == l.end()) return v.back();
      const std::size_t i = static_cast<std::size_t>(it - l.begin());
      if (l[i] == a || i == 0) return v[i];
      const double t = (l[i - 1] - a) / (l[i - 1] - l[i]);
      return v[i - 1] + t * (v[i] - v[i - 1]);
    }
    // last index with l >= a
    auto it = std::upper_bound(l.begin(), l.end(), a, [](double x, double li) { return li < x; });
    if (it == l.begin()) return v.front();
    const std::size_t i = static_cast<std::size_t>(it - l.begin()) - 1;
    if (l[i] == a || i + 1 == n) return v[i];
    const double t = (l[i] - a) / (l[i] - l[i + 1]);
    return v[i] + t * (v[i + 1] - v[i]);
  }

  double latent(double a) const {
    const double vw = weight(a);
    return vw * a + r(vw) - offset;
  }
};

double evaluate_r(const SPRegularizer::Unary& r, double v) {
  const double value = r(v);
  return std::isnan(value) ? kInf : value;
}

}  // namespace

SPRegularizer design_from_weight(const SPRegularizer::Unary& w, const WeightDesignOptions& options) {
  if (!(options.l_max > 0.0) || options.points < 3) {
    throw Error(ErrorCode::kBadParam, "design_from_weight needs l_max > 0 and at least 3 grid points");
  }
  auto table = std::make_shared<WeightTable>();
  table->w = w;
  table->l = uniform_grid(0.0, options.l_max, options.points);
  table->step = table->l[1] - table->l[0];
  table->wl.resize(table->l.size());
  for (std::size_t j = 0; j < table->l.size(); ++j) {
    const double value = w(table->l[j]);
    if (!std::isfinite(value) || value < -1e-12 || value > 1.0 + 1e-12) {
      throw Error(ErrorCode::kBadLimits, "weight function leaves [0, 1] at l = " + std::to_string(table->l[j]));
    }
    if (j > 0 && value > table->wl[j - 1] + 1e-12) {
      throw Error(ErrorCode::kNotMonotone, "weight function increases at l = " + std::to_string(table->l[j]));
    }
    table->wl[j] = std::clamp(value, 0.0, 1.0);
  }
  const double w0 = std::clamp(w(1e-9), 0.0, 1.0);
  if (std::abs(w0 - 1.0) > 1e-3) {
    throw Error(ErrorCode::kBadLimits, "weight function must tend to 1 as l -> 0+");
  }
  const double nudge = 1e-9 * table->step;
  std::vector<double> left(table->l.size());
  for (std::size_t j = 0; j < table->l.size(); ++j) {
    left[j] = table->weight(table->l[j] - (j == 0 ? 0.0 : nudge));
    table->wl[j] = table->weight(table->l[j] + nudge);
  }
  table->cumulative.assign(table->l.size(), 0.0);
  for (std::size_t j = 1; j < table->l.size(); ++j) {
    table->cumulative[j] = table->cumulative[j - 1] + 0.5 * table->step * (table->wl[j - 1] + left[j]);
  }

  double max_jump = 0.0;
  for (std::size_t j = 1; j < table->wl.size(); ++j) max_jump = std::max(max_jump, table->wl[j - 1] - table->wl[j]);
  const double tail = table->weight(table->l.back());

  SPRegularizer::BaseForms base;
  base.r_sp = [table](double v) { return table->r_sp(v); };
  base.weight = [table](double a) { return table->weight(a); };
  base.latent = [table](double a) { return table->latent(a); };
  base.r_min = table->r_sp(1.0);
  // a jump in w is a flat piece of r
  base.strictly_convex = max_jump <= 1e-2;
  SPRegularizer reg = SPRegularizer::from_base(options.name, RegularizerKind::kCustom, std::move(base));
  if (tail > 1e-3) {
    reg = reg.with_note("BadLimits (warning): w(l_max) = " + std::to_string(tail) +
                        " is not within 1e-3 of 0");
  }
  return reg;
}

SPRegularizer design_from_regularizer(const SPRegularizer::Unary& r, const RegularizerDesignOptions& options) {
  if (options.points < 4) throw Error(ErrorCode::kBadParam, "design_from_regularizer needs at least 4 grid points");
  for (double outside : {-0.25, -1e-6, 1.0 + 1e-6, 1.25}) {
    if (evaluate_r(r, outside) != kInf) {
      throw Error(ErrorCode::kBadDomain, "regularizer must be +inf outside [0, 1]");
    }
  }
  if (!std::isfinite(evaluate_r(r, 1e-9)) && !std::isfinite(evaluate_r(r, 0.0))) {
    throw Error(ErrorCode::kBadDomain, "0 must lie in the closure of the domain");
  }
  if (!std::isfinite(evaluate_r(r, 1.0)) && !std::isfinite(evaluate_r(r, 1.0 - 1e-9))) {
    throw Error(ErrorCode::kBadDomain, "1 must lie in the closure of the domain");
  }

  const std::vector<double> grid = uniform_grid(0.0, 1.0, options.points);
  std::vector<double> rv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) rv[i] = evaluate_r(r, grid[i]);
  auto first = std::find_if(rv.begin(), rv.end(), [](double x) { return std::isfinite(x); });
  auto last = std::find_if(rv.rbegin(), rv.rend(), [](double x) { return std::isfinite(x); });
  if (first == rv.end()) throw Error(ErrorCode::kBadDomain, "regularizer is +inf on the whole grid");
  const std::size_t b = static_cast<std::size_t>(first - rv.begin());
  const std::size_t e = rv.size() - 1 - static_cast<std::size_t>(last - rv.rbegin());
  if (e - b < 2) throw Error(ErrorCode::kBadDomain, "domain too small for the grid");
  for (std::size_t i = b; i <= e; ++i) {
    if (!std::isfinite(rv[i])) throw Error(ErrorCode::kBadDomain, "domain is not an interval");
  }
  for (std::size_t i = b + 1; i < e; ++i) {
    const double chord = 0.5 * (rv[i - 1] + rv[i + 1]);
    if (rv[i] > chord + 1e-9 * (1.0 + std::abs(rv[i]))) {
      throw Error(ErrorCode::kNotConvex, "midpoint convexity fails at v = " + std::to_string(grid[i]));
    }
  }

  auto table = std::make_shared<SlopeTable>();
  table->r = [r](double v) { return evaluate_r(r, v); };
  const double step = grid[1] - grid[0];
  std::vector<double> mid;
  std::vector<double> slope;
  for (std::size_t i = b; i < e; ++i) {
    mid.push_back(0.5 * (grid[i] + grid[i + 1]));
    slope.push_back(-(rv[i + 1] - rv[i]) / step);
  }
  // enforce monotonicity against rounding in nearly flat stretches
  for (std::size_t i = 1; i < slope.size(); ++i) slope[i] = std::min(slope[i], slope[i - 1]);

  const std::size_t m = slope.size();
  table->v.push_back(grid[b]);
  table->l.push_back(slope[0] + 0.5 * (slope[0] - slope[1]));
  for (std::size_t i = 0; i < m; ++i) {
    table->v.push_back(mid[i]);
    table->l.push_back(slope[i]);
  }
  table->v.push_back(grid[e]);
  table->l.push_back(slope[m - 1] - 0.5 * (slope[m - 2] - slope[m - 1]));

  table->offset = 0.0;
  const double v0 = table->weight(0.0);
  table->offset = table->r(v0);

  bool strict = true;
  for (std::size_t i = 1; i < table->l.size(); ++i) {
    if (table->l[i - 1] - table->l[i] <= 1e-12 * std::max(1.0, std::abs(table->l[i]))) strict = false;
  }

  SPRegularizer::BaseForms base;
  base.r_sp = [table](double v) { return table->r(v); };
  base.weight = [table](double a) { return table->weight(a); };
  base.latent = [table](double a) { return table->latent(a); };
  base.r_min = table->offset;
  base.strictly_convex = strict;
  return SPRegularizer::from_base(options.name, RegularizerKind::kCustom, std::move(base));
}

}  // namespace spcl
