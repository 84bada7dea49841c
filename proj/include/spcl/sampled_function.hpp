#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace spcl {

/// Sentinel for points outside the effective domain of a concave function.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

inline bool is_finite_value(double x) { return x > kNegInf && x < kPosInf; }

/// `n` equally spaced abscissae covering [lo, hi] (both endpoints included).
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

/// `n` abscissae on [0, 1] spaced quadratically, v_i = (i / (n-1))^2. Dense
/// near zero, where weights of heavily penalized samples live.
std::vector<double> graded_unit_grid(std::size_t n);

/// A real function of one variable sampled on an explicit, strictly increasing
/// grid. Values equal to kNegInf mark points outside the effective domain
/// (concave convention). The finite values must form one contiguous run.
///
/// Between grid points the function is the linear interpolant of its samples;
/// outside [domain_lo(), domain_hi()] it evaluates to kNegInf.
class SampledFunction {
 public:
  SampledFunction(std::vector<double> grid, std::vector<double> values);

  /// Samples `fn` on `grid`. NaN and -inf results are both mapped to kNegInf.
  static SampledFunction sample(const std::function<double(double)>& fn, std::vector<double> grid);

  std::span<const double> grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return grid_.size(); }
  double x(std::size_t i) const { return grid_[i]; }
  double value(std::size_t i) const { return values_[i]; }

  /// Index range [domain_begin, domain_end] (inclusive) of finite values.
  std::size_t domain_begin() const { return dom_begin_; }
  std::size_t domain_end() const { return dom_end_; }
  double domain_lo() const { return grid_[dom_begin_]; }
  double domain_hi() const { return grid_[dom_end_]; }
  bool in_domain(std::size_t i) const { return i >= dom_begin_ && i <= dom_end_; }

  bool is_uniform() const { return uniform_; }

  /// Linear interpolation; kNegInf outside the closed effective domain.
  double operator()(double x) const;

  /// Index of the grid cell [x_i, x_{i+1}] containing x, clamped to [0, size-2].
  std::size_t cell_of(double x) const;

  /// Pointwise sum on a shared grid. Domains must overlap.
  SampledFunction operator+(const SampledFunction& other) const;

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
  std::size_t dom_begin_ = 0;
  std::size_t dom_end_ = 0;
  bool uniform_ = false;
  double step_ = 0.0;
};

/// Writes `x,value` CSV; kNegInf is written as the literal `-inf`.
void write_csv(std::ostream& out, const SampledFunction& fn);

/// Reads the `x,value` CSV produced by write_csv. Throws Error(kParse) naming
/// the offending line.
SampledFunction read_sampled_csv(std::istream& in);

}  // namespace spcl
