#include <cmath>
#include <vector>

#include "spcl/curriculum.hpp"
#include "spcl/oracle.hpp"
#include "spcl/regularizer.hpp"
#include "test_helpers.hpp"

using namespace spcl;
using doctest::Approx;

namespace {

const CurriculumRegion kOrder = CurriculumRegion::order(2, {{0, 1}});
const double kPooled = 2.0 * (1.0 - std::exp(-1.5));

}  // namespace

TEST_CASE("numeric action with a pairwise order") {
  const auto reg = exp_regularizer();
  const std::vector<double> easy_first{1.0, 2.0};
  CHECK(curriculum_action_numeric(reg, 1.0, kOrder, easy_first).value ==
        Approx((1.0 - std::exp(-1.0)) + (1.0 - std::exp(-2.0))).epsilon(1e-9));
  const std::vector<double> hard_first{2.0, 1.0};
  const auto pooled = curriculum_action_numeric(reg, 1.0, kOrder, hard_first);
  CHECK(pooled.value == Approx(kPooled).epsilon(1e-9));
  CHECK(pooled.minimizer[0] == Approx(std::exp(-1.5)).epsilon(1e-6));
  CHECK(pooled.minimizer[1] == Approx(std::exp(-1.5)).epsilon(1e-6));
}

TEST_CASE("full region is singular but acts as the identity when unchecked") {
  const auto reg = linear_regularizer();
  const auto full = CurriculumRegion::full(2);
  const std::vector<double> l{0.3, 1.4};
  CHECK_ERROR_CODE(curriculum_action_numeric(reg, 1.0, full, l), ErrorCode::kSingularRegion);
  NumericActionOptions options;
  options.check_nonsingular = false;
  CHECK(curriculum_action_numeric(reg, 1.0, full, l, options).value ==
        Approx(separable_latent(reg, 1.0, l)).epsilon(1e-9));
}

TEST_CASE("nonsingularity") {
  const auto reg = exp_regularizer();
  kOrder.check_nonsingular(reg, 1.0);
  // v1 >= 1.5 leaves no weight inside the unit box
  const auto empty = CurriculumRegion::halfspace(Halfspace({1.0, 0.0}, 1.5));
  CHECK_ERROR_CODE(empty.check_nonsingular(reg, 1.0), ErrorCode::kSingularRegion);
  // v1 + v2 >= 0 contains the whole box
  const auto everything = CurriculumRegion::halfspace(Halfspace({1.0, 1.0}, 0.0));
  CHECK_ERROR_CODE(everything.check_nonsingular(reg, 1.0), ErrorCode::kSingularRegion);
  const auto chain = CurriculumRegion::order(5, {{0, 1}, {1, 2}, {3, 4}});
  chain.check_nonsingular(reg, 1.0);
}

TEST_CASE("ray search") {
  const auto reg = exp_regularizer();
  const std::vector<double> k{1.0, -1.0};
  const std::vector<double> hard_first{2.0, 1.0};
  const auto ray = homogeneous_action_ray(reg, 1.0, k, hard_first);
  CHECK(ray.value == Approx(kPooled).epsilon(1e-9));
  CHECK(ray.t == Approx(0.5).epsilon(1e-6));
  const std::vector<double> easy_first{1.0, 2.0};
  const auto origin = homogeneous_action_ray(reg, 1.0, k, easy_first);
  CHECK(origin.t == 0.0);
  CHECK(origin.value == Approx(separable_latent(reg, 1.0, easy_first)));
}

TEST_CASE("pairwise closed form") {
  const auto reg = exp_regularizer();
  const std::vector<double> a{2.0, 1.0}, b{1.0, 1.0}, c{0.5, 3.0};
  const auto ra = homogeneous_closed_form(reg, 1.0, 0, 1, a);
  CHECK(ra.minimizer[0] == Approx(0.2231).epsilon(1e-4));
  CHECK(ra.minimizer[1] == Approx(0.2231).epsilon(1e-4));
  const auto rb = homogeneous_closed_form(reg, 1.0, 0, 1, b);
  CHECK(rb.minimizer[0] == Approx(std::exp(-1.0)));
  CHECK(rb.minimizer[1] == Approx(std::exp(-1.0)));
  const auto rc = homogeneous_closed_form(reg, 1.0, 0, 1, c);
  CHECK(rc.minimizer[0] == Approx(0.6065).epsilon(1e-4));
  CHECK(rc.minimizer[1] == Approx(0.0498).epsilon(1e-3));
  CHECK_ERROR_CODE(homogeneous_closed_form(linear_regularizer(), 1.0, 0, 1, a), ErrorCode::kUnsupportedRegularizer);
}

TEST_CASE("affine action") {
  const auto reg = exp_regularizer();
  const std::vector<double> hard_first{2.0, 1.0};
  const auto homogeneous = affine_action(reg, 1.0, Halfspace({1.0, -1.0}, 0.0), hard_first);
  CHECK(homogeneous.value == Approx(kPooled).epsilon(1e-9));
  CHECK(homogeneous.beta == Approx(0.5).epsilon(1e-9));

  const std::vector<double> tie{1.0, 1.0};
  const auto boundary = affine_action(reg, 1.0, Halfspace({1.0, -1.0}, 0.0), tie);
  CHECK(boundary.beta == 0.0);
  CHECK(boundary.value == Approx(separable_latent(reg, 1.0, tie)));

  const auto worked = affine_action(reg, 1.0, Halfspace({1.0, 0.0}, 0.5), hard_first);
  const double beta0 = 2.0 - std::log(2.0);
  CHECK(worked.beta == Approx(beta0).epsilon(1e-12));
  CHECK(worked.residual <= 1e-10);
  CHECK(worked.value == Approx(0.5 + (1.0 - std::exp(-1.0)) + 0.5 * beta0).epsilon(1e-9));
  CHECK(worked.side == Side::kPenalized);

  CHECK_ERROR_CODE(affine_action(hard_regularizer(), 1.0, Halfspace({1.0, 0.0}, 0.5), hard_first),
                   ErrorCode::kUnsupportedRegularizer);
}

TEST_CASE("critical region side") {
  const auto reg = exp_regularizer();
  const Halfspace h({1.0, -1.0}, 0.0);
  const std::vector<double> a{1.0, 2.0}, b{2.0, 1.0}, c{0.7, 0.7};
  CHECK(critical_region_side(reg, 1.0, h, a) == Side::kUnaffected);
  CHECK(critical_region_side(reg, 1.0, h, b) == Side::kPenalized);
  CHECK(critical_region_side(reg, 1.0, h, c) == Side::kUnaffected);
}

TEST_CASE("group latent") {
  const auto e = exp_regularizer();
  const std::vector<double> ones{1.0, 1.0};
  CHECK(group_latent(e, 1.0, {{0, 1}}, ones) == Approx(2.0 * (1.0 - std::exp(-1.0))));
  const std::vector<double> l{0.3, 2.0, 0.9};
  CHECK(group_latent(e, 1.5, {{0}, {1}, {2}}, l) == Approx(separable_latent(e, 1.5, l)));
  const auto lin = linear_regularizer();
  const std::vector<double> mixed{0.4, 0.6, 2.0};
  CHECK(group_latent(lin, 1.0, {{0, 1}, {2}}, mixed) == Approx(1.25));
  CHECK_ERROR_CODE(group_latent(lin, 1.0, {{0, 1}, {1, 2}}, mixed), ErrorCode::kBadPartition);
  CHECK_ERROR_CODE(group_latent(lin, 1.0, {{0, 1}}, mixed), ErrorCode::kBadPartition);
}

TEST_CASE("constrained weights agree with the numeric action") {
  const auto reg = exp_regularizer();
  const auto region = CurriculumRegion::intersection({Halfspace({1.0, -1.0, 0.0}, 0.0), Halfspace({0.0, 1.0, 1.0}, 0.6)});
  const std::vector<double> l{2.0, 0.5, 1.5};
  const auto v = constrained_weights(reg, 1.0, region, l);
  const auto numeric = curriculum_action_numeric(reg, 1.0, region, l);
  CHECK(region.contains(v, 1e-9));
  CHECK(curriculum_objective(reg, 1.0, v, l) == Approx(numeric.value).epsilon(1e-7));

  const auto chain = CurriculumRegion::order(3, {{0, 1}, {1, 2}});
  const std::vector<double> reversed{3.0, 2.0, 1.0};
  const auto pooled = constrained_weights(reg, 1.0, chain, reversed);
  for (double w : pooled) CHECK(w == Approx(std::exp(-2.0)));

  const auto hard = constrained_weights(hard_regularizer(), 1.0, kOrder, std::vector<double>{2.0, 0.5});
  CHECK(hard[0] >= hard[1]);
}

TEST_CASE("region json round trip") {
  const nlohmann::json spec = {{"kind", "halfspace"}, {"k", {1.0, -1.0}}, {"b", 0.25}};
  const auto region = CurriculumRegion::from_json(spec, 2);
  CHECK(region.kind() == RegionKind::kAffine);
  const nlohmann::json back = region;
  CHECK(CurriculumRegion::from_json(back, 2).halfspaces().front().b == 0.25);
  CHECK(CurriculumRegion::from_json({{"kind", "groups"}, {"partition", {{0, 1}}}}, 2).kind() == RegionKind::kGroups);
  CHECK_ERROR_CODE(CurriculumRegion::from_json({{"kind", "halfspace"}, {"k", {1.0}}, {"b", 0.0}}, 2),
                   ErrorCode::kDimensionMismatch);
  CHECK_ERROR_CODE(CurriculumRegion::from_json({{"kind", "ball"}}, 2), ErrorCode::kParse);
  CHECK_ERROR_CODE(CurriculumRegion::from_json({{"kind", "full"}, {"radius", 1}}, 2), ErrorCode::kParse);
}
