#include "spcl/sampled_function.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "spcl/csv.hpp"
#include "spcl/error.hpp"

namespace spcl {

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(lo < hi)) throw Error(ErrorCode::kBadGrid, "uniform grid needs n >= 2 and lo < hi");
  std::vector<double> g(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

std::vector<double> graded_unit_grid(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::kBadGrid, "graded grid needs n >= 2");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    g[i] = t * t;
  }
  return g;
}

SampledFunction::SampledFunction(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.size() < 2) throw Error(ErrorCode::kBadGrid, "grid needs at least two points");
  if (grid_.size() != values_.size()) throw Error(ErrorCode::kBadGrid, "grid and values differ in length");
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!std::isfinite(grid_[i])) throw Error(ErrorCode::kBadGrid, "grid contains a non-finite abscissa");
    if (i > 0 && !(grid_[i] > grid_[i - 1])) throw Error(ErrorCode::kBadGrid, "grid not strictly increasing");
    if (std::isnan(values_[i]) || values_[i] == kPosInf) {
      throw Error(ErrorCode::kBadGrid, "values must be finite or the -inf sentinel");
    }
  }
  auto first = std::find_if(values_.begin(), values_.end(), is_finite_value);
  if (first == values_.end()) throw Error(ErrorCode::kNonProper, "all values are -inf");
  auto last = std::find_if(values_.rbegin(), values_.rend(), is_finite_value);
  dom_begin_ = static_cast<std::size_t>(first - values_.begin());
  dom_end_ = values_.size() - 1 - static_cast<std::size_t>(last - values_.rbegin());
  for (std::size_t i = dom_begin_; i <= dom_end_; ++i) {
    if (!is_finite_value(values_[i])) throw Error(ErrorCode::kBadDomain, "effective domain is not an interval");
  }

  const double span = grid_.back() - grid_.front();
  step_ = span / static_cast<double>(grid_.size() - 1);
  uniform_ = true;
  for (std::size_t i = 1; i < grid_.size() && uniform_; ++i) {
    const double expected = grid_.front() + step_ * static_cast<double>(i);
    uniform_ = std::abs(grid_[i] - expected) <= 1e-12 * std::max(1.0, std::abs(span));
  }
}

SampledFunction SampledFunction::sample(const std::function<double(double)>& fn, std::vector<double> grid) {
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = fn(grid[i]);
    values[i] = (std::isnan(y) || y == kNegInf) ? kNegInf : y;
  }
  return SampledFunction(std::move(grid), std::move(values));
}

std::size_t SampledFunction::cell_of(double x) const {
  const std::size_t last_cell = grid_.size() - 2;
  if (x <= grid_.front()) return 0;
  if (x >= grid_.back()) return last_cell;
  std::size_t i;
  if (uniform_) {
    i = static_cast<std::size_t>((x - grid_.front()) / step_);
    if (i > last_cell) i = last_cell;
    // correct for rounding at cell boundaries
    while (i > 0 && x < grid_[i]) --i;
    while (i < last_cell && x >= grid_[i + 1]) ++i;
  } else {
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    if (i > last_cell) i = last_cell;
  }
  return i;
}

double SampledFunction::operator()(double x) const {
  const double lo = domain_lo();
  const double hi = domain_hi();
  const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (x < lo - slack || x > hi + slack) return kNegInf;
  if (dom_begin_ == dom_end_) return values_[dom_begin_];
  x = std::clamp(x, lo, hi);
  std::size_t i = std::clamp(cell_of(x), dom_begin_, dom_end_ - 1);
  const double x0 = grid_[i];
  const double x1 = grid_[i + 1];
  const double t = (x - x0) / (x1 - x0);
  if (t <= 0.0) return values_[i];
  if (t >= 1.0) return values_[i + 1];
  return values_[i] + t * (values_[i + 1] - values_[i]);
}

SampledFunction SampledFunction::operator+(const SampledFunction& other) const {
  if (other.grid_ != grid_) throw Error(ErrorCode::kBadGrid, "pointwise sum requires identical grids");
  std::vector<double> values(values_.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = (is_finite_value(values_[i]) && is_finite_value(other.values_[i])) ? values_[i] + other.values_[i]
                                                                                     : kNegInf;
  }
  if (std::none_of(values.begin(), values.end(), is_finite_value)) {
    throw Error(ErrorCode::kEmptyOverlap, "domains of the summands do not overlap");
  }
  return SampledFunction(grid_, std::move(values));
}

void write_csv(std::ostream& out, const SampledFunction& fn) {
  out << "x,value\n";
  for (std::size_t i = 0; i < fn.size(); ++i) csv::write_row(out, {fn.x(i), fn.value(i)});
}

SampledFunction read_sampled_csv(std::istream& in) {
  csv::Table table = csv::read_table(in);
  if (table.header.size() != 2 || table.header[0] != "x" || table.header[1] != "value") {
    throw Error(ErrorCode::kParse, "line 1: expected header 'x,value'");
  }
  std::vector<double> grid;
  std::vector<double> values;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double x = table.rows[r][0];
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(table.line_numbers[r]) + ": abscissa must be finite");
    }
    if (!grid.empty() && !(x > grid.back())) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(table.line_numbers[r]) + ": abscissae must be strictly increasing");
    }
    grid.push_back(x);
    values.push_back(table.rows[r][1]);
  }
  return SampledFunction(std::move(grid), std::move(values));
}

}  // namespace spcl
