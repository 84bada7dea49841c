#pragma once

#include <span>
#include <vector>

#include "spcl/sampled_function.hpp"

namespace spcl {

/// Closed interval [lower, upper] of (concave) subgradients; either end may be
/// infinite at a domain boundary.
struct SubgradientInterval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double s, double tol = 0.0) const { return s >= lower - tol && s <= upper + tol; }
};

/// The halfspace {v : <v, k> >= b}. Homogeneous when b == 0.
struct Halfspace {
  std::vector<double> k;
  double b = 0.0;

  Halfspace() = default;
  Halfspace(std::vector<double> direction, double offset);

  std::size_t dimension() const { return k.size(); }
  double evaluate(std::span<const double> v) const;  // <v, k> - b
  bool homogeneous() const { return b == 0.0; }
};

/// Concave conjugate g*(l) = min over finite samples v of (v*l - g(v)),
/// evaluated at every point of `out_grid` by a direct scan.
SampledFunction concave_conjugate(const SampledFunction& g, std::vector<double> out_grid);

/// Same result as concave_conjugate via the upper hull of the samples and a
/// single monotone sweep; O(N + M) after hull construction.
SampledFunction concave_conjugate_fast(const SampledFunction& g, std::vector<double> out_grid);

/// h(x) = max over x1 + x2 = x of f(x1) + g(x2). x1 runs over f's grid, and
/// g is evaluated at x - x1 by linear interpolation.
SampledFunction sup_convolution(const SampledFunction& f, const SampledFunction& g, std::vector<double> out_grid);

/// g** sampled on g's own grid. The intermediate conjugate is evaluated at the
/// secant slopes of g, so the closed concave hull is reproduced exactly at the
/// grid points; values outside g's domain stay at kNegInf.
SampledFunction biconjugate(const SampledFunction& g);

/// Superdifferential of a concave sampled function at x. Interior kinks give
/// the interval between the adjacent secant slopes, smooth interior points
/// collapse to a central difference, and domain endpoints open up to +-inf.
SubgradientInterval subdifferential(const SampledFunction& g, double x);

/// delta*(l | H) = inf over v in H of <v, l>: beta*b when l = beta*k with
/// beta >= 0, and -inf otherwise.
double support_function(const Halfspace& h, std::span<const double> l);

/// Conjugate of the separable concave function sum_i g_i(v_i) at l:
/// sum_i g_i*(l_i).
double separable_conjugate(std::span<const SampledFunction> gs, std::span<const double> l);

/// Scan value of g* at a single point.
double conjugate_at(const SampledFunction& g, double l);

/// Discrete concavity test: every interior sample lies on or above the chord
/// of its neighbours. Returns the worst violation (<= 0 if none).
double concavity_violation(const SampledFunction& g);

/// Largest decrease between consecutive finite samples (<= 0 if monotone
/// non-decreasing).
double monotonicity_violation(const SampledFunction& g);

}  // namespace spcl
