#include <cmath>
#include <sstream>
#include <vector>

#include "spcl/curriculum.hpp"
#include "spcl/trainer.hpp"
#include "test_helpers.hpp"

using namespace spcl;
using doctest::Approx;

namespace {

Dataset make(std::vector<std::vector<double>> rows, std::vector<double> y) {
  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  d.y.resize(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    d.y[static_cast<Eigen::Index>(i)] = y[i];
  }
  return d;
}

// Clean line y = 2x + 1 plus a single gross outlier at the end.
Dataset line_with_outlier() {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 12; ++i) {
    const double x = -1.0 + 2.0 * i / 11.0;
    rows.push_back({x, 1.0});
    y.push_back(2.0 * x + 1.0 + 0.05 * std::sin(3.0 * i));
  }
  rows.push_back({0.2, 1.0});
  y.push_back(40.0);
  return make(rows, y);
}

}  // namespace

TEST_CASE("loss vector") {
  const auto d = make({{1.0}, {2.0}}, {1.0, -2.0});
  CHECK(loss_vector(Eigen::VectorXd::Zero(1), d, LossKind::kSquared) == std::vector<double>{1.0, 4.0});
  const auto logistic = make({{1.0}, {2.0}}, {1.0, -1.0});
  for (double l : loss_vector(Eigen::VectorXd::Zero(1), logistic, LossKind::kLogistic)) CHECK(l == Approx(std::log(2.0)));
  const auto one = make({{1.0, 1.0}}, {3.0});
  CHECK(loss_vector(Eigen::VectorXd::Ones(2), one, LossKind::kSquared)[0] == Approx(1.0));
  CHECK_ERROR_CODE(loss_vector(Eigen::VectorXd::Zero(1), d, LossKind::kLogistic), ErrorCode::kBadLabels);
}

TEST_CASE("w-step") {
  const auto d = make({{1.0}, {1.0}}, {0.0, 2.0});
  CHECK(w_step({1.0, 0.25}, d, LossKind::kSquared, 0.0)[0] == Approx(0.4));

  const auto full = line_with_outlier();
  std::vector<double> v(13, 1.0);
  v.back() = 0.0;
  const auto dropped = w_step(v, full, LossKind::kSquared, 1e-3);
  Dataset clean = full;
  clean.X.conservativeResize(12, 2);
  clean.y.conservativeResize(12);
  const auto removed = w_step(std::vector<double>(12, 1.0), clean, LossKind::kSquared, 1e-3);
  CHECK((dropped - removed).norm() <= 1e-12);

  CHECK_ERROR_CODE(w_step({0.0, 0.0}, d, LossKind::kSquared, 0.0), ErrorCode::kSingularSystem);
}

TEST_CASE("v-step") {
  const auto e = exp_regularizer();
  const auto order = CurriculumRegion::order(2, {{0, 1}});
  const auto v = v_step({2.0, 1.0}, 1.0, e, &order);
  CHECK(v[0] == Approx(std::exp(-1.5)));
  CHECK(v[1] == Approx(std::exp(-1.5)));
  CHECK(v_step({0.5, 3.0}, 1.0, hard_regularizer()) == std::vector<double>{1.0, 0.0});
  const auto groups = CurriculumRegion::groups({{0, 1}});
  const auto g = v_step({1.0, 1.0}, 1.0, e, &groups);
  CHECK(g[0] == Approx(std::exp(-1.0)));
  CHECK(g[1] == Approx(std::exp(-1.0)));
}

TEST_CASE("schedules") {
  const auto hard = hard_regularizer();
  const double lambda = kumar_initial_lambda(hard, {1.0, 2.0, 3.0, 4.0});
  CHECK(lambda > 2.0);
  CHECK(lambda < 3.0);
  CHECK(v_step({1.0, 2.0, 3.0, 4.0}, 2.5, hard) == std::vector<double>{1.0, 1.0, 0.0, 0.0});
  const double tied = kumar_initial_lambda(hard, {2.0, 2.0, 2.0});
  CHECK(tied > 2.0);
  CHECK(v_step({2.0, 2.0, 2.0}, tied, hard) == std::vector<double>{1.0, 1.0, 1.0});

  CHECK(portion_lambda({1.0, 2.0, 3.0, 4.0}, 0.5) == Approx(2.5));
  const double all = portion_lambda({1.0, 2.0, 3.0, 4.0}, 1.0);
  CHECK(all > 4.0);
  CHECK(portion_lambda({1.0, 2.0, 2.0, 4.0}, 0.5) == Approx(3.0));

  check_fractions({0.3, 0.6, 1.0});
  CHECK_ERROR_CODE(check_fractions({0.6, 0.3}), ErrorCode::kBadFractions);
  CHECK_ERROR_CODE(check_fractions({0.0, 0.5}), ErrorCode::kBadFractions);
  CHECK_ERROR_CODE(check_fractions({0.5, 1.2}), ErrorCode::kBadFractions);
}

TEST_CASE("kumar ages grow geometrically") {
  TrainConfig config;
  config.schedule.growth = 1.3;
  config.schedule.max_stages = 4;
  config.full_weight = 2.0;  // never stop early
  const auto state = spl_fit(line_with_outlier(), config);
  REQUIRE(state.stages.size() == 4);
  for (std::size_t s = 1; s < 4; ++s) {
    CHECK(state.stages[s].lambda == Approx(1.3 * state.stages[s - 1].lambda));
  }
}

TEST_CASE("fit with all weights equals ridge") {
  const auto d = make({{0.0, 1.0}, {1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}}, {1.0, 2.9, 5.2, 7.0});
  TrainConfig config;
  config.schedule.kind = ScheduleKind::kFixed;
  config.schedule.lambda = 1e6;
  const auto state = spl_fit(d, config);
  for (double v : state.v) CHECK(v == 1.0);
  CHECK((state.w - w_step(std::vector<double>(4, 1.0), d, LossKind::kSquared, config.alpha)).norm() <= 1e-12);
}

TEST_CASE("a gross outlier is screened out") {
  const auto d = line_with_outlier();
  TrainConfig config;
  config.schedule.kind = ScheduleKind::kFixed;
  config.schedule.lambda = 1.0;
  const auto state = spl_fit(d, config);
  CHECK(state.v.back() == 0.0);
  std::vector<double> v(13, 1.0);
  v.back() = 0.0;
  CHECK((state.w - w_step(v, d, LossKind::kSquared, config.alpha)).norm() <= 1e-10);

  // forcing the outlier ahead of a clean sample keeps a pooled positive weight
  TrainConfig ordered = config;
  ordered.regularizer = "exp";
  ordered.schedule.lambda = 200.0;
  ordered.curriculum = CurriculumRegion::order(13, {{12, 0}});
  TrainConfig free = ordered;
  free.curriculum.reset();
  const auto constrained = spl_fit(d, ordered);
  const auto unconstrained = spl_fit(d, free);
  CHECK(constrained.v[12] > 0.0);
  CHECK(constrained.v[12] == Approx(constrained.v[0]));
  CHECK((constrained.w - unconstrained.w).norm() > 1e-3);
  CHECK(constrained.v == v_step(constrained.losses, constrained.lambda, exp_regularizer(), &*ordered.curriculum));
}

TEST_CASE("portion schedule stages") {
  TrainConfig config;
  config.schedule.kind = ScheduleKind::kPortion;
  config.schedule.fractions = {0.3, 0.6, 1.0};
  const auto state = spl_fit(line_with_outlier(), config);
  REQUIRE(state.stages.size() == 3);
  CHECK(state.stages[0].lambda <= state.stages[1].lambda);
  CHECK(state.stages[1].lambda <= state.stages[2].lambda);
}

TEST_CASE("latent gradient matches finite differences") {
  SyntheticSpec spec;
  spec.n = 30;
  spec.d = 3;
  spec.seed = 7;
  const auto syn = make_synthetic(spec);
  TrainConfig config;
  config.regularizer = "linear";
  Eigen::VectorXd w(3);
  w << 0.3, -0.2, 0.5;
  const auto g = latent_gradient(w, syn.data, config, 40.0);
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < 3; ++j) {
    Eigen::VectorXd up = w, down = w;
    up[j] += h;
    down[j] -= h;
    const double fd = (latent_objective(up, syn.data, config, 40.0) - latent_objective(down, syn.data, config, 40.0)) / (2 * h);
    CHECK(std::abs(fd - g[j]) <= 1e-5 * std::max(1.0, std::abs(g[j])));
  }
}

TEST_CASE("latent gradient vanishes on interpolating data") {
  const auto d = make({{0.0, 1.0}, {1.0, 1.0}, {2.0, 1.0}}, {1.0, 3.0, 5.0});
  TrainConfig config;
  config.alpha = 0.0;
  config.regularizer = "linear";
  Eigen::VectorXd w(2);
  w << 2.0, 1.0;
  CHECK(latent_gradient(w, d, config, 1.0).norm() <= 1e-12);
}

TEST_CASE("spl fixed point is stationary for the latent objective") {
  SyntheticSpec spec;
  spec.seed = 3;
  const auto syn = make_synthetic(spec);
  TrainConfig config;
  config.regularizer = "exp";
  config.schedule.max_stages = 15;
  const auto state = spl_fit(syn.data, config);
  CHECK(state.converged);
  CHECK(latent_gradient(state.w, syn.data, config, state.lambda).norm() <= 1e-6);
  const auto descent = latent_descent_fit(syn.data, config, state.lambda, state.w);
  CHECK(descent.converged);
  CHECK((descent.w - state.w).norm() <= 1e-6);
}

TEST_CASE("dataset csv") {
  std::stringstream in("x1,group,x2,y\n1,0,2,3\n4,1,5,6\n");
  const auto d = read_dataset_csv(in);
  CHECK(d.size() == 2);
  CHECK(d.features() == 2);
  CHECK(d.X(1, 1) == 5.0);
  CHECK(d.y[1] == 6.0);
  CHECK(d.groups == std::vector<long long>{0, 1});
  std::stringstream bad("x,y\n1,2\n3\n");
  try {
    read_dataset_csv(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("synthetic data is deterministic") {
  SyntheticSpec spec;
  spec.seed = 11;
  const auto a = make_synthetic(spec);
  const auto b = make_synthetic(spec);
  CHECK(a.data.X == b.data.X);
  CHECK(a.data.y == b.data.y);
  CHECK(a.outliers.size() == 20);
}
