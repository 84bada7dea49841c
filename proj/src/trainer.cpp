#include "spcl/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <random>

#include "spcl/csv.hpp"
#include "spcl/error.hpp"

namespace spcl {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_labels(const Dataset& data) {
  for (Eigen::Index i = 0; i < data.y.size(); ++i) {
    if (data.y[i] != 1.0 && data.y[i] != -1.0) {
      throw Error(ErrorCode::kBadLabels, "logistic loss needs targets in {-1, +1}; sample " + std::to_string(i) +
                                             " has " + csv::format_number(data.y[i]));
    }
  }
}

void check_weights(const std::vector<double>& v, const Dataset& data) {
  if (v.size() != data.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "weight vector length does not match the dataset");
  }
}

// sum_i v_i grad l_i(w)
Eigen::VectorXd weighted_loss_gradient(const Eigen::VectorXd& w, const Dataset& data, LossKind kind,
                                       const std::vector<double>& v) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  const Eigen::VectorXd score = data.X * w;
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    double coef = 0.0;
    if (kind == LossKind::kSquared) {
      coef = 2.0 * (score[i] - data.y[i]);
    } else {
      coef = -data.y[i] * sigmoid(-data.y[i] * score[i]);
    }
    g += (v[static_cast<std::size_t>(i)] * coef) * data.X.row(i).transpose();
  }
  return g;
}

double weighted_loss(const Eigen::VectorXd& w, const Dataset& data, LossKind kind, const std::vector<double>& v,
                     double alpha) {
  const auto l = loss_vector(w, data, kind);
  double total = alpha * w.squaredNorm();
  for (std::size_t i = 0; i < l.size(); ++i) total += v[i] * l[i];
  return total;
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  const auto d = ldlt.vectorD();
  const double scale = d.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(scale > 0.0) || d.minCoeff() <= 1e-13 * scale) {
    throw Error(ErrorCode::kSingularSystem, "weighted normal equations are singular; use alpha > 0");
  }
  Eigen::VectorXd x = ldlt.solve(b);
  if (!x.allFinite()) throw Error(ErrorCode::kSingularSystem, "weighted normal equations produced non-finite values");
  return x;
}

// Loss value above which the base weight is <= 1e-6.
double weight_threshold(const SPRegularizer& reg) {
  const double floor = 1e-6;
  if (reg.weight_base(0.0) <= floor) return 0.0;
  double hi = 1.0;
  while (reg.weight_base(hi) > floor) {
    hi *= 2.0;
    if (hi > 1e15) return hi;
  }
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (reg.weight_base(mid) > floor) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double just_above(double x) { return x + std::max(1e-9 * std::abs(x), 1e-12); }

// Midpoint between sorted[count - 1] and the next larger distinct value, so
// that at least `count` losses lie strictly below (exactly `count` without ties).
double split_above(const std::vector<double>& sorted, std::size_t count) {
  if (count == 0) return sorted.front() > 0.0 ? 0.5 * sorted.front() : just_above(sorted.front());
  if (count >= sorted.size()) return just_above(sorted.back());
  const double below = sorted[count - 1];
  auto next = std::upper_bound(sorted.begin(), sorted.end(), below);
  if (next == sorted.end()) return just_above(sorted.back());
  return 0.5 * (below + *next);
}

std::vector<double> sorted_copy(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::kBadParam, "schedule needs at least one loss");
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

}  // namespace

LossKind loss_kind_by_name(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "squared") return LossKind::kSquared;
  if (lower == "logistic") return LossKind::kLogistic;
  throw Error(ErrorCode::kBadParam, "unknown loss '" + name + "' (expected squared or logistic)");
}

std::string to_string(LossKind kind) { return kind == LossKind::kSquared ? "squared" : "logistic"; }

Dataset read_dataset_csv(std::istream& in) {
  const csv::Table table = csv::read_table(in);
  std::size_t group_col = table.header.size();
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == "group") group_col = c;
  }
  const std::size_t value_cols = table.header.size() - (group_col < table.header.size() ? 1 : 0);
  if (value_cols < 2) throw Error(ErrorCode::kParse, "dataset needs at least one feature column and a target column");
  if (table.rows.empty()) throw Error(ErrorCode::kParse, "dataset has no rows");
  Dataset data;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto d = static_cast<Eigen::Index>(value_cols - 1);
  data.X.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double x = row[c];
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::kParse,
                    "line " + std::to_string(table.line_numbers[static_cast<std::size_t>(i)]) + ": non-finite value");
      }
      if (c == group_col) {
        if (x != std::floor(x)) {
          throw Error(ErrorCode::kParse, "line " + std::to_string(table.line_numbers[static_cast<std::size_t>(i)]) +
                                             ": group label must be an integer");
        }
        data.groups.push_back(static_cast<long long>(x));
      } else if (col < d) {
        data.X(i, col++) = x;
      } else {
        data.y[i] = x;
      }
    }
  }
  return data;
}

std::vector<double> loss_vector(const Eigen::VectorXd& w, const Dataset& data, LossKind kind) {
  if (w.size() != data.X.cols()) throw Error(ErrorCode::kDimensionMismatch, "parameter length does not match features");
  if (kind == LossKind::kLogistic) check_labels(data);
  const Eigen::VectorXd score = data.X * w;
  std::vector<double> l(data.size());
  for (std::size_t i = 0; i < l.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (kind == LossKind::kSquared) {
      const double r = score[ii] - data.y[ii];
      l[i] = r * r;
    } else {
      l[i] = softplus(-data.y[ii] * score[ii]);
    }
  }
  return l;
}

Eigen::VectorXd w_step(const std::vector<double>& v, const Dataset& data, LossKind loss, double alpha) {
  check_weights(v, data);
  if (alpha < 0.0) throw Error(ErrorCode::kBadParam, "ridge coefficient must be non-negative");
  const Eigen::Index d = data.X.cols();
  const Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(v.size()));
  if (loss == LossKind::kSquared) {
    const Eigen::MatrixXd A = data.X.transpose() * vv.asDiagonal() * data.X + alpha * Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd b = data.X.transpose() * vv.asDiagonal() * data.y;
    return solve_spd(A, b);
  }
  check_labels(data);
  // damped Newton with step halving
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double f = weighted_loss(w, data, loss, v, alpha);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd g = weighted_loss_gradient(w, data, loss, v) + 2.0 * alpha * w;
    if (g.norm() <= 1e-8) break;
    Eigen::MatrixXd H = 2.0 * alpha * Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd score = data.X * w;
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
      const double p = sigmoid(score[i]);
      H += (vv[i] * p * (1.0 - p)) * data.X.row(i).transpose() * data.X.row(i);
    }
    const Eigen::VectorXd step = solve_spd(H, g);
    double t = 1.0;
    bool improved = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      const Eigen::VectorXd trial = w - t * step;
      const double ft = weighted_loss(trial, data, loss, v, alpha);
      if (ft <= f - 1e-4 * t * g.dot(step)) {
        w = trial;
        f = ft;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return w;
}

std::vector<double> v_step(const std::vector<double>& losses, double lambda, const SPRegularizer& reg,
                           const CurriculumRegion* curriculum) {
  for (double l : losses) {
    if (!(l >= 0.0)) throw Error(ErrorCode::kBadParam, "losses must be non-negative");
  }
  if (curriculum == nullptr) {
    std::vector<double> v(losses.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = reg.weight(lambda, losses[i]);
    return v;
  }
  return constrained_weights(reg, lambda, *curriculum, losses);
}

double kumar_initial_lambda(const SPRegularizer& reg, const std::vector<double>& losses) {
  const auto sorted = sorted_copy(losses);
  const std::size_t half = (sorted.size() + 1) / 2;
  const double split = split_above(sorted, half);
  const double threshold = weight_threshold(reg);
  if (!(threshold > 0.0)) throw Error(ErrorCode::kBadParam, reg.name() + " gives no positive weight at zero loss");
  return split / threshold;
}

double portion_lambda(const std::vector<double>& losses, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::kBadFractions, "fractions must lie in (0, 1]");
  const auto sorted = sorted_copy(losses);
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(sorted.size()) + 1e-12));
  return split_above(sorted, count);
}

void check_fractions(const std::vector<double>& fractions) {
  if (fractions.empty()) throw Error(ErrorCode::kBadFractions, "at least one fraction is required");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] <= 1.0)) {
      throw Error(ErrorCode::kBadFractions, "fractions must lie in (0, 1]");
    }
    if (i > 0 && !(fractions[i] > fractions[i - 1])) {
      throw Error(ErrorCode::kBadFractions, "fractions must be strictly increasing");
    }
  }
}

double latent_objective(const Eigen::VectorXd& w, const Dataset& data, const TrainConfig& config, double lambda) {
  const SPRegularizer reg = regularizer_by_name(config.regularizer);
  const auto l = loss_vector(w, data, config.loss);
  const CurriculumRegion* region = config.curriculum ? &*config.curriculum : nullptr;
  const auto v = v_step(l, lambda, reg, region);
  return curriculum_objective(reg, lambda, v, l) + config.alpha * w.squaredNorm();
}

Eigen::VectorXd latent_gradient(const Eigen::VectorXd& w, const Dataset& data, const TrainConfig& config,
                                double lambda) {
  const SPRegularizer reg = regularizer_by_name(config.regularizer);
  const auto l = loss_vector(w, data, config.loss);
  const CurriculumRegion* region = config.curriculum ? &*config.curriculum : nullptr;
  const auto v = v_step(l, lambda, reg, region);
  return weighted_loss_gradient(w, data, config.loss, v) + 2.0 * config.alpha * w;
}

TrainState spl_fit(const Dataset& data, const TrainConfig& config) {
  if (data.size() == 0 || data.features() == 0) throw Error(ErrorCode::kBadParam, "dataset is empty");
  if (!(config.objective_tol > 0.0) || !(config.step_tol > 0.0) || config.inner_max == 0) {
    throw Error(ErrorCode::kBadParam, "tolerances and the iteration cap must be positive");
  }
  const SPRegularizer reg = regularizer_by_name(config.regularizer);
  const CurriculumRegion* region = config.curriculum ? &*config.curriculum : nullptr;
  if (region && region->dimension() != data.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "curriculum dimension does not match the dataset size");
  }
  const auto& schedule = config.schedule;
  std::size_t stage_count = 0;
  switch (schedule.kind) {
    case ScheduleKind::kFixed:
      if (!(schedule.lambda > 0.0)) throw Error(ErrorCode::kBadParam, "lambda must be positive");
      stage_count = 1;
      break;
    case ScheduleKind::kKumar:
      if (!(schedule.growth > 1.0)) throw Error(ErrorCode::kBadParam, "growth factor must exceed 1");
      stage_count = std::max<std::size_t>(1, schedule.max_stages);
      break;
    case ScheduleKind::kPortion:
      check_fractions(schedule.fractions);
      stage_count = schedule.fractions.size();
      break;
  }

  TrainState state;
  state.w = w_step(std::vector<double>(data.size(), 1.0), data, config.loss, config.alpha);
  state.losses = loss_vector(state.w, data, config.loss);
  std::size_t iter = 0;
  double lambda = 0.0;
  for (std::size_t stage = 0; stage < stage_count; ++stage) {
    switch (schedule.kind) {
      case ScheduleKind::kFixed:
        lambda = schedule.lambda;
        break;
      case ScheduleKind::kKumar:
        lambda = stage == 0 ? kumar_initial_lambda(reg, state.losses) : lambda * schedule.growth;
        break;
      case ScheduleKind::kPortion:
        lambda = std::max(lambda, portion_lambda(state.losses, schedule.fractions[stage]));
        break;
    }
    if (stage == 0 && region) region->check_nonsingular(reg, lambda);

    StageSummary summary;
    summary.lambda = lambda;
    std::vector<double> v = v_step(state.losses, lambda, reg, region);
    double previous = curriculum_objective(reg, lambda, v, state.losses) + config.alpha * state.w.squaredNorm();
    for (std::size_t inner = 0; inner < config.inner_max; ++inner) {
      if (config.record_weights) state.weight_history.push_back(v);
      const Eigen::VectorXd w = w_step(v, data, config.loss, config.alpha);
      const auto losses = loss_vector(w, data, config.loss);
      TraceRow row;
      row.iter = ++iter;
      row.stage = stage;
      row.lambda = lambda;
      row.spl_objective = curriculum_objective(reg, lambda, v, losses) + config.alpha * w.squaredNorm();
      v = v_step(losses, lambda, reg, region);
      row.latent_objective = curriculum_objective(reg, lambda, v, losses) + config.alpha * w.squaredNorm();
      state.trace.push_back(row);
      const double moved = (w - state.w).norm();
      state.w = w;
      state.losses = losses;
      ++summary.iterations;
      const double decrease = previous - row.latent_objective;
      previous = row.latent_objective;
      if (decrease < config.objective_tol && moved <= config.step_tol * std::max(1.0, w.norm())) {
        summary.converged = true;
        break;
      }
    }
    state.v = v;
    state.lambda = lambda;
    summary.gradient_norm = (weighted_loss_gradient(state.w, data, config.loss, v) + 2.0 * config.alpha * state.w).norm();
    state.converged = state.converged && summary.converged;
    state.stages.push_back(summary);
    if (schedule.kind == ScheduleKind::kKumar &&
        std::all_of(v.begin(), v.end(), [&](double x) { return x >= config.full_weight; })) {
      break;
    }
  }
  return state;
}

DescentResult latent_descent_fit(const Dataset& data, const TrainConfig& config, double lambda,
                                 const Eigen::VectorXd& w0, double gradient_tol, std::size_t max_iterations) {
  if (w0.size() != data.X.cols()) throw Error(ErrorCode::kDimensionMismatch, "initial parameters have wrong length");
  DescentResult result;
  Eigen::VectorXd w = w0;
  double f = latent_objective(w, data, config, lambda);
  Eigen::VectorXd g = latent_gradient(w, data, config, lambda);
  double step = 1.0 / std::max(1.0, 2.0 * data.X.squaredNorm());
  Eigen::VectorXd w_prev;
  Eigen::VectorXd g_prev;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    result.iterations = it;
    if (g.norm() <= gradient_tol) {
      result.converged = true;
      break;
    }
    if (it > 0) {
      const Eigen::VectorXd s = w - w_prev;
      const Eigen::VectorXd y = g - g_prev;
      const double sy = s.dot(y);
      if (sy > 0.0) step = s.squaredNorm() / sy;
    }
    // backtrack on the latent objective (sufficient decrease)
    bool accepted = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      const Eigen::VectorXd trial = w - step * g;
      const double ft = latent_objective(trial, data, config, lambda);
      if (ft <= f - 1e-4 * step * g.squaredNorm()) {
        w_prev = w;
        g_prev = g;
        w = trial;
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    g = latent_gradient(w, data, config, lambda);
  }
  result.w = w;
  result.objective = f;
  result.gradient_norm = g.norm();
  result.converged = result.converged || result.gradient_norm <= gradient_tol;
  return result;
}

SyntheticData make_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.d == 0) throw Error(ErrorCode::kBadParam, "n and d must be positive");
  if (!(spec.outlier_fraction >= 0.0 && spec.outlier_fraction < 1.0)) {
    throw Error(ErrorCode::kBadParam, "outlier fraction must lie in [0, 1)");
  }
  if (!(spec.noise > 0.0) || !(spec.outlier_scale >= 0.0)) {
    throw Error(ErrorCode::kBadParam, "noise must be positive and the outlier scale non-negative");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SyntheticData out;
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto d = static_cast<Eigen::Index>(spec.d);
  out.w_true.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) out.w_true[j] = normal(rng);
  out.data.X.resize(n, d);
  out.data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out.data.X(i, j) = normal(rng);
  }
  for (Eigen::Index i = 0; i < n; ++i) out.data.y[i] = out.data.X.row(i).dot(out.w_true) + spec.noise * normal(rng);

  std::vector<std::size_t> order(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const auto count = static_cast<std::size_t>(std::floor(spec.outlier_fraction * static_cast<double>(spec.n)));
  out.outliers.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(out.outliers.begin(), out.outliers.end());
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i : out.outliers) {
    const double sign = coin(rng) ? 1.0 : -1.0;
    out.data.y[static_cast<Eigen::Index>(i)] += sign * spec.outlier_scale * spec.noise;
  }
  return out;
}

}  // namespace spcl
