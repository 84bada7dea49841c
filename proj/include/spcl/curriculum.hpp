#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spcl/conjugate.hpp"
#include "spcl/regularizer.hpp"

namespace spcl {

enum class RegionKind { kFull, kHomogeneous, kAffine, kIntersection, kGroups };

/// A closed convex set of admissible weight vectors in [0,1]^n.
class CurriculumRegion {
 public:
  /// No constraint. Singular by definition; usable only with the
  /// nonsingularity check disabled.
  static CurriculumRegion full(std::size_t n);
  /// {v : <v, k> >= b}; homogeneous when b == 0.
  static CurriculumRegion halfspace(Halfspace h);
  static CurriculumRegion intersection(std::vector<Halfspace> hs);
  /// v_i >= v_j for every pair (i, j).
  static CurriculumRegion order(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
  /// Equal weights within each block. Throws BadPartition unless the blocks
  /// cover {0..n-1} disjointly.
  static CurriculumRegion groups(std::vector<std::vector<std::size_t>> partition);

  /// Accepts {"kind":"full"}, {"kind":"halfspace","k":[..],"b":..},
  /// {"kind":"intersection","halfspaces":[..]}, {"kind":"order","pairs":[[i,j],..]}
  /// and {"kind":"groups","partition":[[..],..]}. `n` is the sample count.
  static CurriculumRegion from_json(const nlohmann::json& j, std::size_t n);

  RegionKind kind() const { return kind_; }
  std::size_t dimension() const { return n_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  const std::vector<std::vector<std::size_t>>& partition() const { return partition_; }

  bool contains(std::span<const double> v, double tol = 1e-9) const;

  /// Throws SingularRegion unless the region meets the interior of the
  /// regularizer's domain and also cuts the domain. Uses a 101-point grid per
  /// axis for n <= 3. Group regions are not checked.
  void check_nonsingular(const SPRegularizer& reg, double lambda) const;

 private:
  RegionKind kind_ = RegionKind::kFull;
  std::size_t n_ = 0;
  std::vector<Halfspace> halfspaces_;
  std::vector<std::vector<std::size_t>> partition_;
};

void to_json(nlohmann::json& j, const CurriculumRegion& region);

/// Normalized objective sum_i (v_i l_i + r_sp(v_i, lambda)) - n * offset(lambda).
double curriculum_objective(const SPRegularizer& reg, double lambda, std::span<const double> v,
                            std::span<const double> l);

/// Unconstrained latent objective sum_i latent(lambda, l_i), extended to
/// negative arguments.
double separable_latent(const SPRegularizer& reg, double lambda, std::span<const double> l);

struct ActionResult {
  double value = 0.0;
  std::vector<double> minimizer;
};

struct NumericActionOptions {
  bool check_nonsingular = true;
  std::size_t coarse_points = 0;  // per axis; 0 picks 201 (n <= 2) or 41 (n == 3)
  std::size_t refine_rounds = 24;
};

/// Constrained infimum of the normalized objective over the region: dense
/// grid scan followed by local grid refinement around the best point. Group
/// regions are scanned in the per-group variables. For n > 3 the exact
/// constrained solver is used instead.
ActionResult curriculum_action_numeric(const SPRegularizer& reg, double lambda, const CurriculumRegion& region,
                                       std::span<const double> l, const NumericActionOptions& options = {});

struct RayResult {
  double value = 0.0;
  double t = 0.0;
};

/// sup over t >= 0 of sum_i latent(lambda, l_i - t k_i).
RayResult homogeneous_action_ray(const SPRegularizer& reg, double lambda, std::span<const double> k,
                                 std::span<const double> l);

/// Same search for an arbitrary concave function of the loss vector.
RayResult homogeneous_action_ray(const std::function<double(std::span<const double>)>& latent,
                                 std::span<const double> k, std::span<const double> l);

/// EXP with the single order constraint v_i >= v_j: identity branch when
/// l_i <= l_j, pooled mean when l_i >= l_j. Other coordinates are free.
/// Throws UnsupportedRegularizer for any other regularizer.
ActionResult homogeneous_closed_form(const SPRegularizer& reg, double lambda, std::size_t i, std::size_t j,
                                     std::span<const double> l);

enum class Side { kUnaffected, kPenalized };

/// Unaffected iff the unconstrained weights already satisfy <v, k> >= b.
Side critical_region_side(const SPRegularizer& reg, double lambda, const Halfspace& h, std::span<const double> l);

struct AffineResult {
  double value = 0.0;
  double beta = 0.0;      // largest root of sum_i k_i v(l_i - beta k_i) = b
  double residual = 0.0;  // |sum_i k_i v(l_i - beta k_i) - b| at the returned beta
  double bracket = 0.0;   // final bisection interval width
  Side side = Side::kUnaffected;
};

/// F(l - beta k) + beta b on the penalized side, F(l) otherwise. Requires a
/// strictly convex regularizer (UnsupportedRegularizer) and throws NoRoot
/// when no bracket for beta exists below 1e12.
AffineResult affine_action(const SPRegularizer& reg, double lambda, const Halfspace& h, std::span<const double> l);

/// sum over groups of s * latent(lambda, group_sum / s).
double group_latent(const SPRegularizer& reg, double lambda, const std::vector<std::vector<std::size_t>>& groups,
                    std::span<const double> l);

/// Exact minimizer of sum_i (v_i l_i + r_sp(v_i, lambda)) over the region:
/// elementwise weights without constraints, the group-mean weight for groups,
/// pool-adjacent-violators for disjoint order chains, a one-dimensional dual
/// search for a single halfspace, and dual coordinate ascent for several
/// halfspaces (strictly convex regularizers only). Losses may be any real.
/// Throws InfeasibleCurriculum, UnsupportedRegularizer.
std::vector<double> constrained_weights(const SPRegularizer& reg, double lambda, const CurriculumRegion& region,
                                        std::span<const double> l);

}  // namespace spcl
