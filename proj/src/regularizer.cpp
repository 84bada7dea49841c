#include "spcl/regularizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "spcl/error.hpp"

namespace spcl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// LOG is evaluated with its argument clipped here instead of at log(0).
constexpr double kLogFloor = 1e-12;

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kBadParam, "age parameter lambda must be positive and finite");
  }
}

}  // namespace

SPRegularizer SPRegularizer::from_base(std::string name, RegularizerKind kind, BaseForms base) {
  auto state = std::make_shared<State>();
  state->name = std::move(name);
  state->kind = kind;
  state->scaling = true;
  state->strictly_convex = base.strictly_convex;
  auto r = std::move(base.r_sp);
  auto w = std::move(base.weight);
  auto f = std::move(base.latent);
  const double r_min = base.r_min;
  state->forms.r_sp = [r](double v, double lambda) {
    const double value = r(v);
    return value == kInf ? kInf : lambda * value;
  };
  state->forms.weight = [w](double lambda, double a) { return w(a / lambda); };
  state->forms.latent = [f](double lambda, double a) { return lambda * f(a / lambda); };
  state->forms.r_min = [r_min](double lambda) { return lambda * r_min; };
  state->forms.strictly_convex = base.strictly_convex;
  return SPRegularizer(std::move(state));
}

SPRegularizer SPRegularizer::general(std::string name, ScaledForms forms) {
  auto state = std::make_shared<State>();
  state->name = std::move(name);
  state->kind = RegularizerKind::kCustom;
  state->scaling = false;
  state->strictly_convex = forms.strictly_convex;
  state->forms = std::move(forms);
  return SPRegularizer(std::move(state));
}

SPRegularizer SPRegularizer::with_note(std::string note) const {
  auto state = std::make_shared<State>(*state_);
  state->notes.push_back(std::move(note));
  return SPRegularizer(std::move(state));
}

double SPRegularizer::r_sp(double v, double lambda) const {
  check_lambda(lambda);
  if (!in_unit_interval(v)) return kInf;
  return state_->forms.r_sp(v, lambda);
}

double SPRegularizer::weight(double lambda, double l) const {
  if (!(l >= 0.0)) throw Error(ErrorCode::kBadParam, "loss must be non-negative");
  return weight_ext(lambda, l);
}

double SPRegularizer::latent(double lambda, double l) const {
  if (!(l >= 0.0)) throw Error(ErrorCode::kBadParam, "loss must be non-negative");
  return latent_ext(lambda, l);
}

double SPRegularizer::weight_ext(double lambda, double a) const {
  check_lambda(lambda);
  return std::clamp(state_->forms.weight(lambda, a), 0.0, 1.0);
}

double SPRegularizer::latent_ext(double lambda, double a) const {
  check_lambda(lambda);
  return state_->forms.latent(lambda, a);
}

double SPRegularizer::offset(double lambda) const {
  check_lambda(lambda);
  return state_->forms.r_min(lambda);
}

// ---------------------------------------------------------------- catalog

SPRegularizer hard_regularizer() {
  SPRegularizer::BaseForms base;
  base.r_sp = [](double v) { return -v; };
  // ties at a == 1 go to zero weight
  base.weight = [](double a) { return a < 1.0 ? 1.0 : 0.0; };
  base.latent = [](double a) { return std::min(a, 1.0); };
  base.r_min = -1.0;
  base.strictly_convex = false;
  return SPRegularizer::from_base("HARD", RegularizerKind::kHard, std::move(base));
}

SPRegularizer linear_regularizer() {
  SPRegularizer::BaseForms base;
  base.r_sp = [](double v) { return 0.5 * (1.0 - v) * (1.0 - v); };
  base.weight = [](double a) { return std::clamp(1.0 - a, 0.0, 1.0); };
  base.latent = [](double a) {
    if (a <= 0.0) return a;
    if (a >= 1.0) return 0.5;
    return a - 0.5 * a * a;
  };
  base.r_min = 0.0;
  return SPRegularizer::from_base("LINEAR", RegularizerKind::kLinear, std::move(base));
}

SPRegularizer log_regularizer() {
  SPRegularizer::BaseForms base;
  base.r_sp = [](double v) { return -std::log(std::max(v, kLogFloor)); };
  base.weight = [](double a) { return a <= 1.0 ? 1.0 : 1.0 / a; };
  base.latent = [](double a) { return a <= 1.0 ? a : 1.0 + std::log(a); };
  base.r_min = 0.0;
  return SPRegularizer::from_base("LOG", RegularizerKind::kLog, std::move(base));
}

SPRegularizer exp_regularizer() {
  SPRegularizer::BaseForms base;
  base.r_sp = [](double v) { return v > 0.0 ? v * std::log(v) - v + 1.0 : 1.0; };
  base.weight = [](double a) { return a <= 0.0 ? 1.0 : std::exp(-a); };
  base.latent = [](double a) { return a <= 0.0 ? a : -std::expm1(-a); };
  base.r_min = 0.0;
  return SPRegularizer::from_base("EXP", RegularizerKind::kExp, std::move(base));
}

std::vector<SPRegularizer> catalog() {
  return {hard_regularizer(), linear_regularizer(), log_regularizer(), exp_regularizer()};
}

SPRegularizer regularizer_by_name(const std::string& name) {
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto& reg : catalog()) {
    if (reg.name() == upper) return reg;
  }
  throw Error(ErrorCode::kBadParam, "unknown regularizer '" + name + "' (expected hard, linear, log or exp)");
}

}  // namespace spcl
