#include "spcl/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spcl/error.hpp"
#include "spcl/sampled_function.hpp"

namespace spcl {

namespace {

constexpr double kMaxMultiplier = 1e12;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_dims(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": expected " + std::to_string(expected) + " entries, got " + std::to_string(got));
  }
}

void validate_partition(const std::vector<std::vector<std::size_t>>& groups, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorCode::kBadPartition, "empty group");
    for (std::size_t i : g) {
      if (i >= n) throw Error(ErrorCode::kBadPartition, "index " + std::to_string(i) + " out of range");
      if (seen[i]++) throw Error(ErrorCode::kBadPartition, "index " + std::to_string(i) + " appears twice");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw Error(ErrorCode::kBadPartition, "index " + std::to_string(i) + " is not covered");
  }
}

// Pairwise order v_i >= v_j encoded as k = c (e_i - e_j), c > 0, b = 0.
bool as_order_pair(const Halfspace& h, std::size_t& i, std::size_t& j) {
  if (h.b != 0.0) return false;
  std::size_t pos = h.k.size();
  std::size_t neg = h.k.size();
  for (std::size_t d = 0; d < h.k.size(); ++d) {
    if (h.k[d] == 0.0) continue;
    if (h.k[d] > 0.0 && pos == h.k.size()) {
      pos = d;
    } else if (h.k[d] < 0.0 && neg == h.k.size()) {
      neg = d;
    } else {
      return false;
    }
  }
  if (pos == h.k.size() || neg == h.k.size() || h.k[pos] != -h.k[neg]) return false;
  i = pos;
  j = neg;
  return true;
}

// Disjoint chains of order pairs, each listed from the largest weight down.
// Empty when the pairs do not form disjoint simple chains.
std::vector<std::vector<std::size_t>> order_chains(const std::vector<Halfspace>& hs, std::size_t n) {
  std::vector<std::size_t> next(n, n);
  std::vector<std::size_t> prev(n, n);
  for (const auto& h : hs) {
    std::size_t i = 0;
    std::size_t j = 0;
    if (!as_order_pair(h, i, j)) return {};
    if (next[i] != n || prev[j] != n) {
      if (next[i] == j) continue;  // duplicate constraint
      return {};
    }
    next[i] = j;
    prev[j] = i;
  }
  std::vector<std::vector<std::size_t>> chains;
  std::size_t covered = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (prev[s] != n || next[s] == n) continue;
    std::vector<std::size_t> chain;
    for (std::size_t c = s; c != n; c = next[c]) {
      chain.push_back(c);
      if (chain.size() > n) return {};
    }
    covered += chain.size() - 1;
    chains.push_back(std::move(chain));
  }
  // a cycle leaves edges not reachable from any head
  std::size_t edges = 0;
  for (std::size_t s = 0; s < n; ++s) edges += next[s] != n;
  if (covered != edges) return {};
  return chains;
}

std::vector<double> unconstrained_weights(const SPRegularizer& reg, double lambda, std::span<const double> l) {
  std::vector<double> v(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) v[i] = reg.weight_ext(lambda, l[i]);
  return v;
}

// Weights minimizing the Lagrangian for multiplier `mu` on direction k.
void shifted_weights(const SPRegularizer& reg, double lambda, std::span<const double> a, std::span<const double> k,
                     double mu, std::vector<double>& v) {
  v.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = reg.weight_ext(lambda, a[i] - mu * k[i]);
}

// Smallest and largest multipliers bracketing k.v(mu) = b. Returns false when
// no multiplier below kMaxMultiplier reaches b.
struct DualRoot {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> v_lo;
  std::vector<double> v_hi;
};

bool dual_root(const SPRegularizer& reg, double lambda, std::span<const double> a, const Halfspace& h, DualRoot& out) {
  auto g = [&](double mu, std::vector<double>& v) {
    shifted_weights(reg, lambda, a, h.k, mu, v);
    return dot(h.k, v);
  };
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> v;
  while (g(hi, v) < h.b) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxMultiplier) return false;
  }
  while (hi - lo > 1e-14 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid, v) < h.b) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.lo = lo;
  out.hi = hi;
  shifted_weights(reg, lambda, a, h.k, lo, out.v_lo);
  shifted_weights(reg, lambda, a, h.k, hi, out.v_hi);
  return true;
}

std::vector<double> single_halfspace_weights(const SPRegularizer& reg, double lambda, const Halfspace& h,
                                             std::span<const double> l) {
  std::vector<double> v = unconstrained_weights(reg, lambda, l);
  if (dot(h.k, v) >= h.b) return v;
  double reachable = 0.0;
  for (double k : h.k) reachable += std::max(k, 0.0);
  if (h.b > reachable + 1e-12) {
    throw Error(ErrorCode::kInfeasibleCurriculum, "no weight vector in [0,1]^n satisfies the halfspace");
  }
  DualRoot root;
  if (!dual_root(reg, lambda, l, h, root)) {
    throw Error(ErrorCode::kInfeasibleCurriculum, "dual multiplier diverged");
  }
  // both endpoint weight vectors minimize the Lagrangian at the root (up to
  // the bracket width); blend them so that the constraint holds with equality
  const double g_lo = dot(h.k, root.v_lo);
  const double g_hi = dot(h.k, root.v_hi);
  const double theta = g_hi > g_lo ? std::clamp((g_hi - h.b) / (g_hi - g_lo), 0.0, 1.0) : 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::clamp(theta * root.v_lo[i] + (1.0 - theta) * root.v_hi[i], 0.0, 1.0);
  }
  return v;
}

std::vector<double> chain_weights(const SPRegularizer& reg, double lambda,
                                  const std::vector<std::vector<std::size_t>>& chains, std::span<const double> l) {
  std::vector<double> v = unconstrained_weights(reg, lambda, l);
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  for (const auto& chain : chains) {
    // weights must decrease along the chain, so pooled losses must increase
    std::vector<Block> blocks;
    for (std::size_t idx : chain) {
      blocks.push_back({l[idx], 1});
      while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
        Block top = blocks.back();
        blocks.pop_back();
        blocks.back().sum += top.sum;
        blocks.back().count += top.count;
      }
    }
    std::size_t pos = 0;
    for (const Block& b : blocks) {
      const double w = reg.weight_ext(lambda, b.mean());
      for (std::size_t c = 0; c < b.count; ++c) v[chain[pos++]] = w;
    }
  }
  return v;
}

std::vector<double> dual_ascent_weights(const SPRegularizer& reg, double lambda, const std::vector<Halfspace>& hs,
                                        std::span<const double> l) {
  if (!reg.strictly_convex()) {
    throw Error(ErrorCode::kUnsupportedRegularizer,
                reg.name() + " is not strictly convex; several halfspaces need a strictly convex regularizer");
  }
  const std::size_t n = l.size();
  std::vector<double> mu(hs.size(), 0.0);
  std::vector<double> shift(n, 0.0);  // sum_j mu_j k_j
  std::vector<double> a(n);
  std::vector<double> v(n);
  const double tol = 1e-11;
  for (int sweep = 0; sweep < 20000; ++sweep) {
    for (std::size_t j = 0; j < hs.size(); ++j) {
      const Halfspace& h = hs[j];
      for (std::size_t i = 0; i < n; ++i) a[i] = l[i] - (shift[i] - mu[j] * h.k[i]);
      double next = 0.0;
      shifted_weights(reg, lambda, a, h.k, 0.0, v);
      if (dot(h.k, v) < h.b) {
        DualRoot root;
        if (!dual_root(reg, lambda, a, h, root)) {
          throw Error(ErrorCode::kInfeasibleCurriculum, "dual multiplier diverged");
        }
        next = 0.5 * (root.lo + root.hi);
      }
      for (std::size_t i = 0; i < n; ++i) shift[i] += (next - mu[j]) * h.k[i];
      mu[j] = next;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = reg.weight_ext(lambda, l[i] - shift[i]);
    double violation = 0.0;
    double slack = 0.0;
    for (std::size_t j = 0; j < hs.size(); ++j) {
      const double gap = dot(hs[j].k, v) - hs[j].b;
      violation = std::max(violation, -gap);
      if (mu[j] > 0.0) slack = std::max(slack, std::abs(gap));
    }
    if (violation <= tol && slack <= 1e-9) return v;
  }
  for (const auto& h : hs) {
    if (dot(h.k, v) < h.b - 1e-9) {
      throw Error(ErrorCode::kInfeasibleCurriculum, "dual coordinate ascent did not reach a feasible point");
    }
  }
  return v;
}

}  // namespace

// ------------------------------------------------------------------ region

CurriculumRegion CurriculumRegion::full(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kBadParam, "region dimension must be positive");
  CurriculumRegion r;
  r.kind_ = RegionKind::kFull;
  r.n_ = n;
  return r;
}

CurriculumRegion CurriculumRegion::halfspace(Halfspace h) {
  CurriculumRegion r;
  r.kind_ = h.homogeneous() ? RegionKind::kHomogeneous : RegionKind::kAffine;
  r.n_ = h.dimension();
  r.halfspaces_.push_back(std::move(h));
  return r;
}

CurriculumRegion CurriculumRegion::intersection(std::vector<Halfspace> hs) {
  if (hs.empty()) throw Error(ErrorCode::kBadParam, "intersection needs at least one halfspace");
  if (hs.size() == 1) return halfspace(std::move(hs.front()));
  CurriculumRegion r;
  r.kind_ = RegionKind::kIntersection;
  r.n_ = hs.front().dimension();
  for (const auto& h : hs) check_dims(r.n_, h.dimension(), "halfspace direction");
  r.halfspaces_ = std::move(hs);
  return r;
}

CurriculumRegion CurriculumRegion::order(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<Halfspace> hs;
  for (auto [i, j] : pairs) {
    if (i >= n || j >= n || i == j) {
      throw Error(ErrorCode::kBadParam, "order pair (" + std::to_string(i) + ", " + std::to_string(j) + ") is invalid");
    }
    std::vector<double> k(n, 0.0);
    k[i] = 1.0;
    k[j] = -1.0;
    hs.emplace_back(std::move(k), 0.0);
  }
  return intersection(std::move(hs));
}

CurriculumRegion CurriculumRegion::groups(std::vector<std::vector<std::size_t>> partition) {
  std::size_t n = 0;
  for (const auto& g : partition) n += g.size();
  if (n == 0) throw Error(ErrorCode::kBadPartition, "partition is empty");
  validate_partition(partition, n);
  CurriculumRegion r;
  r.kind_ = RegionKind::kGroups;
  r.n_ = n;
  r.partition_ = std::move(partition);
  return r;
}

CurriculumRegion CurriculumRegion::from_json(const nlohmann::json& j, std::size_t n) {
  auto fail = [](const std::string& what) { return Error(ErrorCode::kParse, "region spec: " + what); };
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) throw fail("expected an object with a \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : j.items()) {
      if (key == "kind") continue;
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
        throw fail("unknown key \"" + key + "\" for kind \"" + kind + "\"");
      }
    }
  };
  auto read_halfspace = [&](const nlohmann::json& h) {
    if (!h.is_object() || !h.contains("k") || !h["k"].is_array()) throw fail("halfspace needs an array \"k\"");
    for (const auto& [key, value] : h.items()) {
      if (key != "k" && key != "b" && key != "kind") throw fail("unknown halfspace key \"" + key + "\"");
    }
    std::vector<double> k;
    for (const auto& x : h["k"]) {
      if (!x.is_number()) throw fail("\"k\" entries must be numbers");
      k.push_back(x.get<double>());
    }
    check_dims(n, k.size(), "halfspace direction");
    double b = 0.0;
    if (h.contains("b")) {
      if (!h["b"].is_number()) throw fail("\"b\" must be a number");
      b = h["b"].get<double>();
    }
    return Halfspace(std::move(k), b);
  };
  auto read_index = [&](const nlohmann::json& x) {
    if (!x.is_number_integer() || x.get<long long>() < 0) throw fail("indices must be non-negative integers");
    return static_cast<std::size_t>(x.get<long long>());
  };

  if (kind == "full") {
    allow({});
    return full(n);
  }
  if (kind == "halfspace") {
    allow({"k", "b"});
    return halfspace(read_halfspace(j));
  }
  if (kind == "intersection") {
    allow({"halfspaces"});
    if (!j.contains("halfspaces") || !j["halfspaces"].is_array()) throw fail("intersection needs \"halfspaces\"");
    std::vector<Halfspace> hs;
    for (const auto& h : j["halfspaces"]) hs.push_back(read_halfspace(h));
    return intersection(std::move(hs));
  }
  if (kind == "order") {
    allow({"pairs"});
    if (!j.contains("pairs") || !j["pairs"].is_array()) throw fail("order needs \"pairs\"");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& p : j["pairs"]) {
      if (!p.is_array() || p.size() != 2) throw fail("each pair must be [i, j]");
      pairs.emplace_back(read_index(p[0]), read_index(p[1]));
    }
    return order(n, pairs);
  }
  if (kind == "groups") {
    allow({"partition"});
    if (!j.contains("partition") || !j["partition"].is_array()) throw fail("groups needs \"partition\"");
    std::vector<std::vector<std::size_t>> partition;
    for (const auto& g : j["partition"]) {
      if (!g.is_array()) throw fail("each group must be an array of indices");
      std::vector<std::size_t> block;
      for (const auto& x : g) block.push_back(read_index(x));
      partition.push_back(std::move(block));
    }
    validate_partition(partition, n);
    return groups(std::move(partition));
  }
  throw fail("unknown kind \"" + kind + "\"");
}

void to_json(nlohmann::json& j, const CurriculumRegion& region) {
  switch (region.kind()) {
    case RegionKind::kFull:
      j = {{"kind", "full"}};
      return;
    case RegionKind::kGroups:
      j = {{"kind", "groups"}, {"partition", region.partition()}};
      return;
    case RegionKind::kHomogeneous:
    case RegionKind::kAffine:
      j = {{"kind", "halfspace"}, {"k", region.halfspaces()[0].k}, {"b", region.halfspaces()[0].b}};
      return;
    case RegionKind::kIntersection: {
      nlohmann::json hs = nlohmann::json::array();
      for (const auto& h : region.halfspaces()) hs.push_back({{"k", h.k}, {"b", h.b}});
      j = {{"kind", "intersection"}, {"halfspaces", hs}};
      return;
    }
  }
}

bool CurriculumRegion::contains(std::span<const double> v, double tol) const {
  check_dims(n_, v.size(), "weight vector");
  for (double x : v) {
    if (!(x >= -tol && x <= 1.0 + tol)) return false;
  }
  for (const auto& h : halfspaces_) {
    if (h.evaluate(v) < -tol) return false;
  }
  for (const auto& g : partition_) {
    for (std::size_t i : g) {
      if (std::abs(v[i] - v[g.front()]) > tol) return false;
    }
  }
  return true;
}

void CurriculumRegion::check_nonsingular(const SPRegularizer& reg, double lambda) const {
  if (kind_ == RegionKind::kGroups) return;
  if (kind_ == RegionKind::kFull) {
    throw Error(ErrorCode::kSingularRegion, "the unconstrained region contains the whole domain");
  }
  bool meets_interior = false;
  bool cuts_domain = false;
  if (n_ <= 3) {
    const std::size_t count = 101;
    const auto grid = uniform_grid(0.0, 1.0, count);
    std::vector<bool> finite(count);
    for (std::size_t i = 0; i < count; ++i) finite[i] = std::isfinite(reg.r_sp(grid[i], lambda));
    std::vector<std::size_t> idx(n_, 0);
    std::vector<double> v(n_);
    while (true) {
      bool in_domain = true;
      bool interior = true;
      for (std::size_t d = 0; d < n_; ++d) {
        v[d] = grid[idx[d]];
        in_domain = in_domain && finite[idx[d]];
        interior = interior && idx[d] > 0 && idx[d] + 1 < count;
      }
      if (in_domain) {
        bool strict = true;
        bool violated = false;
        for (const auto& h : halfspaces_) {
          const double gap = h.evaluate(v);
          strict = strict && gap > 1e-12;
          violated = violated || gap < -1e-12;
        }
        meets_interior = meets_interior || (interior && strict);
        cuts_domain = cuts_domain || violated;
      }
      if (meets_interior && cuts_domain) return;
      std::size_t d = n_;
      while (d-- > 0) {
        if (++idx[d] < count) break;
        idx[d] = 0;
      }
      if (d == static_cast<std::size_t>(-1)) break;
    }
  } else {
    // analytic bounds over the unit cube, plus a strict feasibility solve
    for (const auto& h : halfspaces_) {
      double lowest = 0.0;
      for (double k : h.k) lowest += std::min(k, 0.0);
      cuts_domain = cuts_domain || lowest < h.b - 1e-12;
    }
    std::vector<Halfspace> strict;
    for (const auto& h : halfspaces_) strict.emplace_back(h.k, h.b + 1e-6);
    try {
      const std::vector<double> center(n_, 0.5);
      const auto v = dual_ascent_weights(linear_regularizer(), 1.0, strict, center);
      meets_interior = std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0 && x < 1.0; });
      if (!meets_interior) {
        // the projection may touch the box; shrink it towards the center
        std::vector<double> shrunk(n_);
        for (std::size_t i = 0; i < n_; ++i) shrunk[i] = 0.999 * v[i] + 0.0005;
        meets_interior = std::all_of(strict.begin(), strict.end(),
                                     [&](const Halfspace& h) { return h.evaluate(shrunk) > 0.0; });
      }
    } catch (const Error&) {
      meets_interior = false;
    }
  }
  if (!meets_interior) {
    throw Error(ErrorCode::kSingularRegion, "the region does not meet the interior of the regularizer's domain");
  }
  if (!cuts_domain) {
    throw Error(ErrorCode::kSingularRegion, "the region contains the whole domain of the regularizer");
  }
}

// --------------------------------------------------------------- actions

double curriculum_objective(const SPRegularizer& reg, double lambda, std::span<const double> v,
                            std::span<const double> l) {
  check_dims(l.size(), v.size(), "weight vector");
  double total = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) total += v[i] * l[i] + reg.r_sp(v[i], lambda);
  return total - static_cast<double>(l.size()) * reg.offset(lambda);
}

double separable_latent(const SPRegularizer& reg, double lambda, std::span<const double> l) {
  double total = 0.0;
  for (double x : l) total += reg.latent_ext(lambda, x);
  return total;
}

ActionResult curriculum_action_numeric(const SPRegularizer& reg, double lambda, const CurriculumRegion& region,
                                       std::span<const double> l, const NumericActionOptions& options) {
  check_dims(region.dimension(), l.size(), "loss vector");
  if (options.check_nonsingular) region.check_nonsingular(reg, lambda);
  const std::size_t n = l.size();

  // reduced variables: one per group, or one per sample
  std::vector<std::vector<std::size_t>> blocks;
  if (region.kind() == RegionKind::kGroups) {
    blocks = region.partition();
  } else {
    for (std::size_t i = 0; i < n; ++i) blocks.push_back({i});
  }
  const std::size_t m = blocks.size();
  if (m > 3) {
    ActionResult result;
    result.minimizer = constrained_weights(reg, lambda, region, l);
    result.value = curriculum_objective(reg, lambda, result.minimizer, l);
    return result;
  }
  std::vector<double> block_loss(m, 0.0);
  std::vector<double> block_size(m, 0.0);
  for (std::size_t b = 0; b < m; ++b) {
    for (std::size_t i : blocks[b]) block_loss[b] += l[i];
    block_size[b] = static_cast<double>(blocks[b].size());
  }
  std::vector<double> full(n);
  auto expand = [&](std::span<const double> u) {
    for (std::size_t b = 0; b < m; ++b) {
      for (std::size_t i : blocks[b]) full[i] = u[b];
    }
    return std::span<const double>(full);
  };
  auto feasible = [&](std::span<const double> u) {
    if (region.kind() == RegionKind::kGroups || region.kind() == RegionKind::kFull) return true;
    const auto v = expand(u);
    for (const auto& h : region.halfspaces()) {
      if (h.evaluate(v) < 0.0) return false;
    }
    return true;
  };

  const std::size_t count = options.coarse_points ? options.coarse_points : (m <= 2 ? 201 : 41);
  const auto grid = uniform_grid(0.0, 1.0, count);
  std::vector<double> r_grid(count);
  for (std::size_t i = 0; i < count; ++i) r_grid[i] = reg.r_sp(grid[i], lambda);

  double best = kPosInf;
  std::vector<double> best_u(m);
  std::vector<std::size_t> idx(m, 0);
  std::vector<double> u(m);
  while (true) {
    double obj = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
      u[b] = grid[idx[b]];
      obj += u[b] * block_loss[b] + block_size[b] * r_grid[idx[b]];
    }
    if (obj < best && feasible(u)) {
      best = obj;
      best_u = u;
    }
    std::size_t d = m;
    while (d-- > 0) {
      if (++idx[d] < count) break;
      idx[d] = 0;
    }
    if (d == static_cast<std::size_t>(-1)) break;
  }
  if (!std::isfinite(best)) throw Error(ErrorCode::kEmptyFeasible, "no feasible grid point in the region");

  auto objective = [&](std::span<const double> x) {
    double obj = 0.0;
    for (std::size_t b = 0; b < m; ++b) obj += x[b] * block_loss[b] + block_size[b] * reg.r_sp(x[b], lambda);
    return obj;
  };
  // local refinement: 9 points per axis spanning two coarse cells, halving each round
  double step = (grid[1] - grid[0]) / 2.0;
  std::vector<int> off(m, -4);
  for (std::size_t round = 0; round < options.refine_rounds; ++round) {
    const std::vector<double> center = best_u;
    std::fill(off.begin(), off.end(), -4);
    while (true) {
      bool inside = true;
      for (std::size_t b = 0; b < m; ++b) {
        u[b] = center[b] + off[b] * step;
        if (u[b] < 0.0 || u[b] > 1.0) inside = false;
      }
      if (inside && feasible(u)) {
        const double obj = objective(u);
        if (obj < best) {
          best = obj;
          best_u = u;
        }
      }
      std::size_t d = m;
      while (d-- > 0) {
        if (++off[d] <= 4) break;
        off[d] = -4;
      }
      if (d == static_cast<std::size_t>(-1)) break;
    }
    step *= 0.5;
  }
  ActionResult result;
  expand(best_u);
  result.minimizer = full;
  result.value = best - static_cast<double>(n) * reg.offset(lambda);
  return result;
}

RayResult homogeneous_action_ray(const std::function<double(std::span<const double>)>& latent,
                                 std::span<const double> k, std::span<const double> l) {
  check_dims(l.size(), k.size(), "direction");
  std::vector<double> point(l.size());
  auto phi = [&](double t) {
    for (std::size_t i = 0; i < l.size(); ++i) point[i] = l[i] - t * k[i];
    return latent(point);
  };
  double top = 1.0;
  while (top < 1e6 && phi(top) > phi(0.5 * top)) top *= 2.0;

  const std::size_t samples = 64;
  RayResult best{phi(0.0), 0.0};
  std::size_t best_i = 0;
  for (std::size_t i = 1; i <= samples; ++i) {
    const double t = top * static_cast<double>(i) / samples;
    const double value = phi(t);
    if (value > best.value) {
      best = {value, t};
      best_i = i;
    }
  }
  double a = top * static_cast<double>(best_i == 0 ? 0 : best_i - 1) / samples;
  double b = top * static_cast<double>(std::min(best_i + 1, samples)) / samples;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = phi(c);
  double fd = phi(d);
  while (b - a > 1e-12 * std::max(1.0, b)) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = phi(d);
    }
  }
  const double t = 0.5 * (a + b);
  const double value = phi(t);
  if (value > best.value) best = {value, t};
  return best;
}

RayResult homogeneous_action_ray(const SPRegularizer& reg, double lambda, std::span<const double> k,
                                 std::span<const double> l) {
  return homogeneous_action_ray([&](std::span<const double> x) { return separable_latent(reg, lambda, x); }, k, l);
}

ActionResult homogeneous_closed_form(const SPRegularizer& reg, double lambda, std::size_t i, std::size_t j,
                                     std::span<const double> l) {
  if (reg.kind() != RegularizerKind::kExp) {
    throw Error(ErrorCode::kUnsupportedRegularizer, "the pairwise closed form exists for EXP only, not " + reg.name());
  }
  if (i >= l.size() || j >= l.size() || i == j) throw Error(ErrorCode::kBadParam, "invalid order pair");
  ActionResult result;
  result.minimizer = unconstrained_weights(reg, lambda, l);
  std::vector<double> effective(l.begin(), l.end());
  if (l[i] > l[j]) {
    const double pooled = 0.5 * (l[i] + l[j]);
    effective[i] = effective[j] = pooled;
    result.minimizer[i] = result.minimizer[j] = reg.weight_ext(lambda, pooled);
  }
  result.value = separable_latent(reg, lambda, effective);
  return result;
}

Side critical_region_side(const SPRegularizer& reg, double lambda, const Halfspace& h, std::span<const double> l) {
  check_dims(h.dimension(), l.size(), "loss vector");
  const auto v = unconstrained_weights(reg, lambda, l);
  return h.evaluate(v) >= -1e-12 ? Side::kUnaffected : Side::kPenalized;
}

AffineResult affine_action(const SPRegularizer& reg, double lambda, const Halfspace& h, std::span<const double> l) {
  check_dims(h.dimension(), l.size(), "loss vector");
  if (!reg.strictly_convex()) {
    throw Error(ErrorCode::kUnsupportedRegularizer, reg.name() + " is not strictly convex");
  }
  AffineResult result;
  result.side = critical_region_side(reg, lambda, h, l);
  if (result.side == Side::kUnaffected) {
    result.value = separable_latent(reg, lambda, l);
    return result;
  }
  std::vector<double> v;
  auto g = [&](double beta) {
    shifted_weights(reg, lambda, l, h.k, beta, v);
    return dot(h.k, v) - h.b;
  };
  // largest beta with g(beta) <= 0: bracket, then bisect
  double lo = 0.0;
  double hi = 1.0;
  while (g(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxMultiplier) {
      throw Error(ErrorCode::kNoRoot, "no sign change of the directional derivative below beta = 1e12");
    }
  }
  while (hi - lo > 1e-15 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  result.beta = lo;
  result.bracket = hi - lo;
  result.residual = std::max(std::abs(g(lo)), std::abs(g(hi)));
  std::vector<double> shifted(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) shifted[i] = l[i] - result.beta * h.k[i];
  result.value = separable_latent(reg, lambda, shifted) + result.beta * h.b;
  return result;
}

double group_latent(const SPRegularizer& reg, double lambda, const std::vector<std::vector<std::size_t>>& groups,
                    std::span<const double> l) {
  validate_partition(groups, l.size());
  double total = 0.0;
  for (const auto& g : groups) {
    double sum = 0.0;
    for (std::size_t i : g) sum += l[i];
    const double s = static_cast<double>(g.size());
    total += s * reg.latent(lambda, sum / s);
  }
  return total;
}

std::vector<double> constrained_weights(const SPRegularizer& reg, double lambda, const CurriculumRegion& region,
                                        std::span<const double> l) {
  check_dims(region.dimension(), l.size(), "loss vector");
  switch (region.kind()) {
    case RegionKind::kFull:
      return unconstrained_weights(reg, lambda, l);
    case RegionKind::kGroups: {
      std::vector<double> v(l.size());
      for (const auto& g : region.partition()) {
        double sum = 0.0;
        for (std::size_t i : g) sum += l[i];
        const double w = reg.weight_ext(lambda, sum / static_cast<double>(g.size()));
        for (std::size_t i : g) v[i] = w;
      }
      return v;
    }
    default:
      break;
  }
  const auto& hs = region.halfspaces();
  const auto chains = order_chains(hs, l.size());
  if (!chains.empty()) return chain_weights(reg, lambda, chains, l);
  if (hs.size() == 1) return single_halfspace_weights(reg, lambda, hs.front(), l);
  return dual_ascent_weights(reg, lambda, hs, l);
}

}  // namespace spcl
