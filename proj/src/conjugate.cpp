#include "spcl/conjugate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spcl/error.hpp"

namespace spcl {

namespace {

void check_out_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw Error(ErrorCode::kBadGrid, "output grid needs at least two points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::kBadGrid, "output grid not strictly increasing");
  }
}

struct Point {
  double x;
  double y;
};

// Upper hull of the finite samples, left to right.
std::vector<Point> upper_hull(const SampledFunction& g) {
  std::vector<Point> hull;
  for (std::size_t i = g.domain_begin(); i <= g.domain_end(); ++i) {
    const Point p{g.x(i), g.value(i)};
    while (hull.size() >= 2) {
      const Point& a = hull[hull.size() - 2];
      const Point& b = hull.back();
      // drop b when it lies on or below the chord a -> p
      const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }
  return hull;
}

}  // namespace

Halfspace::Halfspace(std::vector<double> direction, double offset) : k(std::move(direction)), b(offset) {
  if (k.empty() || std::all_of(k.begin(), k.end(), [](double x) { return x == 0.0; })) {
    throw Error(ErrorCode::kBadParam, "halfspace direction must have a nonzero entry");
  }
  if (!std::all_of(k.begin(), k.end(), [](double x) { return std::isfinite(x); }) || !std::isfinite(b)) {
    throw Error(ErrorCode::kBadParam, "halfspace entries must be finite");
  }
}

double Halfspace::evaluate(std::span<const double> v) const {
  if (v.size() != k.size()) throw Error(ErrorCode::kDimensionMismatch, "halfspace and point differ in dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) s += v[i] * k[i];
  return s - b;
}

double conjugate_at(const SampledFunction& g, double l) {
  double best = kPosInf;
  for (std::size_t i = g.domain_begin(); i <= g.domain_end(); ++i) {
    best = std::min(best, g.x(i) * l - g.value(i));
  }
  return best;
}

SampledFunction concave_conjugate(const SampledFunction& g, std::vector<double> out_grid) {
  check_out_grid(out_grid);
  std::vector<double> values(out_grid.size());
  for (std::size_t j = 0; j < out_grid.size(); ++j) values[j] = conjugate_at(g, out_grid[j]);
  return SampledFunction(std::move(out_grid), std::move(values));
}

SampledFunction concave_conjugate_fast(const SampledFunction& g, std::vector<double> out_grid) {
  check_out_grid(out_grid);
  const std::vector<Point> hull = upper_hull(g);
  std::vector<double> values(out_grid.size());
  // The minimizing vertex moves left as l increases.
  std::size_t p = hull.size() - 1;
  for (std::size_t j = 0; j < out_grid.size(); ++j) {
    const double l = out_grid[j];
    while (p > 0 && hull[p - 1].x * l - hull[p - 1].y <= hull[p].x * l - hull[p].y) --p;
    values[j] = hull[p].x * l - hull[p].y;
  }
  return SampledFunction(std::move(out_grid), std::move(values));
}

SampledFunction sup_convolution(const SampledFunction& f, const SampledFunction& g, std::vector<double> out_grid) {
  check_out_grid(out_grid);
  std::vector<double> values(out_grid.size(), kNegInf);
  for (std::size_t j = 0; j < out_grid.size(); ++j) {
    const double x = out_grid[j];
    double best = kNegInf;
    for (std::size_t i = f.domain_begin(); i <= f.domain_end(); ++i) {
      const double gv = g(x - f.x(i));
      if (gv != kNegInf) best = std::max(best, f.value(i) + gv);
    }
    for (std::size_t i = g.domain_begin(); i <= g.domain_end(); ++i) {
      const double fv = f(x - g.x(i));
      if (fv != kNegInf) best = std::max(best, fv + g.value(i));
    }
    values[j] = best;
  }
  if (std::none_of(values.begin(), values.end(), is_finite_value)) {
    throw Error(ErrorCode::kEmptyOverlap, "no feasible split for any output point");
  }
  return SampledFunction(std::move(out_grid), std::move(values));
}

SampledFunction biconjugate(const SampledFunction& g) {
  const std::vector<Point> hull = upper_hull(g);
  std::vector<double> slopes;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    slopes.push_back((hull[i].y - hull[i - 1].y) / (hull[i].x - hull[i - 1].x));
  }
  if (slopes.empty()) slopes.push_back(0.0);
  std::sort(slopes.begin(), slopes.end());
  slopes.erase(std::unique(slopes.begin(), slopes.end()), slopes.end());
  // margin slopes bound the first conjugate's grid; they only ever tighten g**
  slopes.insert(slopes.begin(), slopes.front() - 1.0);
  slopes.push_back(slopes.back() + 1.0);

  const SampledFunction conj = concave_conjugate(g, slopes);
  std::vector<double> values(g.size(), kNegInf);
  for (std::size_t i = g.domain_begin(); i <= g.domain_end(); ++i) values[i] = conjugate_at(conj, g.x(i));
  return SampledFunction(std::vector<double>(g.grid().begin(), g.grid().end()), std::move(values));
}

SubgradientInterval subdifferential(const SampledFunction& g, double x) {
  const double lo = g.domain_lo();
  const double hi = g.domain_hi();
  const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (!std::isfinite(x) || x < lo - slack || x > hi + slack) {
    throw Error(ErrorCode::kOutsideDomain, "point outside the closure of the effective domain");
  }
  const std::size_t b = g.domain_begin();
  const std::size_t e = g.domain_end();
  if (b == e) return {kNegInf, kPosInf};

  auto secant = [&](std::size_t i) { return (g.value(i + 1) - g.value(i)) / (g.x(i + 1) - g.x(i)); };

  // locate x: either on a grid point or strictly inside a cell
  std::size_t cell = std::clamp(g.cell_of(x), b, e - 1);
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  std::size_t node = g.size();
  if (std::abs(x - g.x(cell)) <= tol) {
    node = cell;
  } else if (std::abs(x - g.x(cell + 1)) <= tol) {
    node = cell + 1;
  }
  if (node == g.size()) {
    const double s = secant(cell);
    return {s, s};
  }
  if (node == b) return {secant(b), kPosInf};
  if (node == e) return {kNegInf, secant(e - 1)};

  const double left = secant(node - 1);
  const double right = secant(node);
  auto jump = [&](std::size_t i) { return secant(i - 1) - secant(i); };
  const double here = left - right;
  double neighbours = 0.0;
  if (node - 1 > b) neighbours = std::max(neighbours, std::abs(jump(node - 1)));
  if (node + 1 < e) neighbours = std::max(neighbours, std::abs(jump(node + 1)));
  const double scale = std::max({1.0, std::abs(left), std::abs(right)});
  const bool kink = here > 1e-12 * scale && here > 4.0 * neighbours;
  if (kink) return {right, left};
  const double central = (g.value(node + 1) - g.value(node - 1)) / (g.x(node + 1) - g.x(node - 1));
  return {central, central};
}

double support_function(const Halfspace& h, std::span<const double> l) {
  if (l.size() != h.k.size()) throw Error(ErrorCode::kDimensionMismatch, "support function dimension mismatch");
  double kk = 0.0;
  double lk = 0.0;
  double ll = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    kk += h.k[i] * h.k[i];
    lk += l[i] * h.k[i];
    ll += l[i] * l[i];
  }
  const double l_norm = std::sqrt(ll);
  if (l_norm == 0.0) return 0.0;
  const double beta = lk / kk;
  double resid2 = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    const double r = l[i] - beta * h.k[i];
    resid2 += r * r;
  }
  const double rel_tol = 1e-9;
  if (std::sqrt(resid2) > rel_tol * l_norm) return kNegInf;
  if (beta < -rel_tol * l_norm / std::sqrt(kk)) return kNegInf;
  return std::max(beta, 0.0) * h.b;
}

double separable_conjugate(std::span<const SampledFunction> gs, std::span<const double> l) {
  if (gs.size() != l.size()) throw Error(ErrorCode::kDimensionMismatch, "need one function per coordinate");
  double total = 0.0;
  for (std::size_t i = 0; i < gs.size(); ++i) total += conjugate_at(gs[i], l[i]);
  return total;
}

double concavity_violation(const SampledFunction& g) {
  double worst = 0.0;
  for (std::size_t i = g.domain_begin() + 1; i + 1 <= g.domain_end(); ++i) {
    const double x0 = g.x(i - 1);
    const double x1 = g.x(i + 1);
    const double t = (g.x(i) - x0) / (x1 - x0);
    const double chord = g.value(i - 1) + t * (g.value(i + 1) - g.value(i - 1));
    worst = std::max(worst, chord - g.value(i));
  }
  return worst;
}

double monotonicity_violation(const SampledFunction& g) {
  double worst = 0.0;
  for (std::size_t i = g.domain_begin() + 1; i <= g.domain_end(); ++i) {
    worst = std::max(worst, g.value(i - 1) - g.value(i));
  }
  return worst;
}

}  // namespace spcl
