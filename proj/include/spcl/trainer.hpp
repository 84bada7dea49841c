#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spcl/curriculum.hpp"
#include "spcl/regularizer.hpp"

namespace spcl {

enum class LossKind { kSquared, kLogistic };

LossKind loss_kind_by_name(const std::string& name);
std::string to_string(LossKind kind);

struct Dataset {
  Eigen::MatrixXd X;              // n x d
  Eigen::VectorXd y;              // n
  std::vector<long long> groups;  // empty, or one label per sample

  std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t features() const { return static_cast<std::size_t>(X.cols()); }
};

/// Feature columns, then the target column; an optional integer column named
/// `group` may appear anywhere. Throws Error(kParse) naming the line.
Dataset read_dataset_csv(std::istream& in);

/// Per-sample losses: (x_i.w - y_i)^2, or log(1 + exp(-y_i x_i.w)) with
/// y_i in {-1, +1} (BadLabels otherwise).
std::vector<double> loss_vector(const Eigen::VectorXd& w, const Dataset& data, LossKind kind);

enum class ScheduleKind { kFixed, kKumar, kPortion };

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::kKumar;
  double lambda = 1.0;              // kFixed only
  double growth = 1.3;              // kKumar multiplier
  std::vector<double> fractions;    // kPortion stages
  std::size_t max_stages = 30;      // kKumar cap
};

struct TrainConfig {
  std::string regularizer = "hard";
  LossKind loss = LossKind::kSquared;
  double alpha = 1e-3;  // ridge coefficient of R_F(w) = alpha |w|^2
  ScheduleConfig schedule;
  std::optional<CurriculumRegion> curriculum;
  std::size_t inner_max = 2000;
  double objective_tol = 1e-9;
  double step_tol = 1e-10;
  double full_weight = 0.99;  // schedule stops once every weight reaches this
  bool record_weights = false;
};

struct TraceRow {
  std::size_t iter = 0;
  std::size_t stage = 0;
  double lambda = 0.0;
  double spl_objective = 0.0;     // E(w_k, v_{k-1})
  double latent_objective = 0.0;  // min over v of E(w_k, v)
};

struct StageSummary {
  double lambda = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;  // |grad G| at the stage's final w
};

struct TrainState {
  Eigen::VectorXd w;
  std::vector<double> v;
  double lambda = 0.0;
  std::vector<double> losses;
  std::vector<TraceRow> trace;
  std::vector<StageSummary> stages;
  std::vector<std::vector<double>> weight_history;  // v after every v-step, if recorded
  bool converged = true;  // false if any stage hit the inner iteration cap
};

/// Minimizer over w of sum_i v_i l_i(w) + alpha |w|^2. Throws SingularSystem.
Eigen::VectorXd w_step(const std::vector<double>& v, const Dataset& data, LossKind loss, double alpha);

/// Optimal weights for fixed losses, honoring the curriculum when given.
std::vector<double> v_step(const std::vector<double>& losses, double lambda, const SPRegularizer& reg,
                           const CurriculumRegion* curriculum = nullptr);

/// Initial age: ceil(n/2) losses fall below lambda * t*, where t* is where
/// the base weight drops to 1e-6. Ties move to the next distinct loss.
double kumar_initial_lambda(const SPRegularizer& reg, const std::vector<double>& losses);

/// Midpoint between the order statistics around floor(fraction * n); ties
/// move to the next distinct loss, fraction 1 lands just above the maximum.
double portion_lambda(const std::vector<double>& losses, double fraction);

/// Throws BadFractions unless strictly increasing within (0, 1].
void check_fractions(const std::vector<double>& fractions);

/// Latent objective sum_i F_lambda(l_i(w)) + alpha |w|^2 (curriculum-aware).
double latent_objective(const Eigen::VectorXd& w, const Dataset& data, const TrainConfig& config, double lambda);

/// sum_i v_i grad l_i(w) + 2 alpha w with v the optimal weights at w.
Eigen::VectorXd latent_gradient(const Eigen::VectorXd& w, const Dataset& data, const TrainConfig& config,
                                double lambda);

TrainState spl_fit(const Dataset& data, const TrainConfig& config);

struct DescentResult {
  Eigen::VectorXd w;
  double objective = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Gradient descent on the latent objective at a fixed lambda, with
/// Barzilai-Borwein steps safeguarded by backtracking.
DescentResult latent_descent_fit(const Dataset& data, const TrainConfig& config, double lambda,
                                 const Eigen::VectorXd& w0, double gradient_tol = 1e-8,
                                 std::size_t max_iterations = 20000);

struct SyntheticSpec {
  std::size_t n = 100;
  std::size_t d = 5;
  double outlier_fraction = 0.2;
  double noise = 1.0;           // sigma
  double outlier_scale = 50.0;  // outlier shift in units of sigma
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dataset data;
  Eigen::VectorXd w_true;
  std::vector<std::size_t> outliers;
};

/// Gaussian design, Gaussian true parameters and noise; the outlier targets
/// are shifted by +-outlier_scale * sigma.
SyntheticData make_synthetic(const SyntheticSpec& spec);

}  // namespace spcl
