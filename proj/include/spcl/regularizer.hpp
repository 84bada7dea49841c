#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace spcl {

enum class RegularizerKind { kHard, kLinear, kLog, kExp, kCustom };

/// A self-paced regularizer together with its weight function and latent
/// objective.
///
/// Convex convention for the regularizer: r_sp(v, lambda) is +inf outside the
/// domain, which always lies inside [0, 1]. The weight is the minimizer of
/// v*l + r_sp(v, lambda) over [0, 1] and the latent objective is the minimum
/// value, shifted so that latent(lambda, 0) == 0.
///
/// `weight` and `latent` accept l >= 0 only. The `_ext` variants evaluate the
/// same minimization for any real argument; constrained solvers need them
/// because their effective per-sample losses can turn negative.
///
/// Catalog entries (and both design pipelines) follow the age-parameter
/// scaling rule r_sp(v, lambda) = lambda * r(v), weight(lambda, l) = w(l /
/// lambda), latent(lambda, l) = lambda * F(l / lambda).
class SPRegularizer {
 public:
  using Unary = std::function<double(double)>;
  using Binary = std::function<double(double, double)>;

  struct BaseForms {
    Unary r_sp;    // r(v), +inf outside the domain
    Unary weight;  // w(a) for any real a
    Unary latent;  // F(a) for any real a, F(0) == 0
    double r_min = 0.0;  // min over v of r(v)
    bool strictly_convex = true;
  };

  /// Forms that depend on lambda arbitrarily (no scaling contract).
  struct ScaledForms {
    Binary r_sp;    // (v, lambda)
    Binary weight;  // (lambda, a)
    Binary latent;  // (lambda, a)
    Unary r_min;    // lambda -> min over v of r_sp(v, lambda)
    bool strictly_convex = true;
  };

  static SPRegularizer from_base(std::string name, RegularizerKind kind, BaseForms forms);
  static SPRegularizer general(std::string name, ScaledForms forms);

  const std::string& name() const { return state_->name; }
  RegularizerKind kind() const { return state_->kind; }
  bool follows_scaling() const { return state_->scaling; }
  bool strictly_convex() const { return state_->strictly_convex; }
  const std::vector<std::string>& notes() const { return state_->notes; }

  double r_sp(double v, double lambda) const;
  double weight(double lambda, double l) const;
  double latent(double lambda, double l) const;
  double weight_ext(double lambda, double a) const;
  double latent_ext(double lambda, double a) const;

  /// min over v of r_sp(v, lambda): the unnormalized conjugate at l = 0.
  double offset(double lambda) const;

  double r_sp_base(double v) const { return r_sp(v, 1.0); }
  double weight_base(double l) const { return weight(1.0, l); }
  double latent_base(double l) const { return latent(1.0, l); }

  /// Copy with an extra diagnostic note attached (used by the design pipelines).
  SPRegularizer with_note(std::string note) const;

 private:
  struct State {
    std::string name;
    RegularizerKind kind = RegularizerKind::kCustom;
    bool scaling = true;
    bool strictly_convex = true;
    ScaledForms forms;
    std::vector<std::string> notes;
  };
  explicit SPRegularizer(std::shared_ptr<const State> state) : state_(std::move(state)) {}

  std::shared_ptr<const State> state_;
};

/// HARD (r = -v), LINEAR (r = (1-v)^2/2), LOG (r = -log v), EXP (r = v log v - v + 1).
std::vector<SPRegularizer> catalog();

SPRegularizer hard_regularizer();
SPRegularizer linear_regularizer();
SPRegularizer log_regularizer();
SPRegularizer exp_regularizer();

/// Case-insensitive catalog lookup; throws Error(kBadParam) for unknown names.
SPRegularizer regularizer_by_name(const std::string& name);

// ---------------------------------------------------------------- design

struct WeightDesignOptions {
  double l_max = 8.0;
  std::size_t points = 2049;
  std::string name = "FROM_WEIGHT";
};

/// Builds a regularizer from a non-increasing weight function w with
/// w(0+) = 1 and w(inf) = 0: F is the running integral of w, l(v) its
/// generalized inverse, and r(v) = -v*l(v) + F(l(v)).
SPRegularizer design_from_weight(const SPRegularizer::Unary& w, const WeightDesignOptions& options = {});

struct RegularizerDesignOptions {
  std::size_t points = 2049;
  std::string name = "FROM_REGULARIZER";
};

/// Builds a regularizer from a convex r on a domain inside [0, 1] whose
/// closure contains 0 and 1: l(v) is the derivative of -r, the weight its
/// monotone inverse, and F(l) = v(l)*l + r(v(l)).
SPRegularizer design_from_regularizer(const SPRegularizer::Unary& r, const RegularizerDesignOptions& options = {});

// ------------------------------------------------------------ validation

struct ValidationCheck {
  std::string name;
  bool passed = true;
  double residual = 0.0;
  std::string location;
  bool warning = false;  // reported but not allowed to fail the verdict
};

struct ValidationReport {
  std::string regularizer;
  std::vector<ValidationCheck> checks;
  bool verdict = true;

  const ValidationCheck* find(const std::string& name) const;
};

struct ValidationOptions {
  std::size_t v_points = 2049;
  std::vector<double> lambdas = {0.25, 1.0, 4.0};
  double derivative_step = 1e-4;
  double derivative_tol = 1e-4;
  double conjugate_tol = 1e-4;
  double scaling_tol = 1e-10;
};

/// Runs the axiomatic and consistency checks. Failures are reported in the
/// returned report, never thrown.
ValidationReport validate_sp_regularizer(const SPRegularizer& reg, const ValidationOptions& options = {});

void to_json(nlohmann::json& j, const ValidationCheck& check);
void to_json(nlohmann::json& j, const ValidationReport& report);

}  // namespace spcl
