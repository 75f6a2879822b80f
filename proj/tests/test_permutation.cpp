#include <doctest.h>

#include <cmath>

#include "distanova/core.hpp"
#include "distanova/distances.hpp"
#include "distanova/moments.hpp"
#include "distanova/permutation.hpp"
#include "test_util.hpp"

using namespace distanova;
using permutation::Mode;
using permutation::PermutationPlan;

namespace {

DistanceMatrix scalar_euclidean(const std::vector<double>& y) {
  const int n = static_cast<int>(y.size());
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d(i, j) = std::abs(y[i] - y[j]);
  return DistanceMatrix(std::move(d));
}

}  // namespace

TEST_CASE("exact enumeration: spec example p = #(F >= 4)/24 = 1/3") {
  const auto g = gower_center(scalar_euclidean({0, 1, 2, 3}));
  const auto h = group_projector(GroupAssignment({0, 0, 1, 1}));
  PermutationPlan plan;
  plan.mode = Mode::Exact;
  const auto f_values = perm_F_values(g, h, plan);
  REQUIRE(f_values.size() == 24);
  CHECK(permutation::perm_pvalue(4.0, f_values) == doctest::Approx(1.0 / 3.0));
  // the permutation mean of B equals the closed-form mu
  const auto b_values = moments::enumerate_B(h, g);
  double mean = 0.0;
  for (double b : b_values) mean += b;
  mean /= static_cast<double>(b_values.size());
  const auto [mu, sigma2] = moments::mean_variance(moments::trace_quantities(h, g), 4);
  CHECK(test_util::rel_diff(mean, mu) < 1e-12);
}

TEST_CASE("exact mode cardinality and identity reproduction") {
  const auto g = gower_center(scalar_euclidean({0.0, 0.7, 2.1}));
  const auto h = group_projector(GroupAssignment({0, 1, 1}));
  PermutationPlan plan;
  plan.mode = Mode::Exact;
  CHECK(perm_F_values(g, h, plan).size() == 6);

  // Monte Carlo first draw is the observed statistic
  SplitMix64 rng(88);
  const auto y = test_util::random_matrix(15, 2, rng);
  const auto gg =
      gower_center(pairwise_matrix(VectorDataset{y}, VectorMeasure::Euclidean));
  const GroupAssignment groups(test_util::random_labels(15, 2, rng));
  const auto hh = group_projector(groups);
  const auto v = variance_decomposition(gg, hh);
  const double f_hat = dbf_statistic(v);
  PermutationPlan mc;
  mc.n_pi = 1000;
  mc.seed = 7;
  const auto f_values = perm_F_values(gg, hh, mc);
  CHECK(test_util::rel_diff(f_values[0], f_hat) < 1e-11);
  // identity inclusion bounds the p-value away from zero
  CHECK(permutation::perm_pvalue(f_values[0], f_values) >= 1.0 / mc.n_pi);
}

TEST_CASE("perm_pvalue counting rules") {
  const std::vector<double> all_equal(10, 2.0);
  CHECK(permutation::perm_pvalue(2.0, all_equal) == 1.0);
  std::vector<double> one_hit(10000, 0.0);
  one_hit[0] = 5.0;
  CHECK(permutation::perm_pvalue(5.0, one_hit) == doctest::Approx(1e-4));
  CHECK_THROWS_AS(permutation::perm_pvalue(1.0, std::vector<double>{}), InvalidInput);
}

TEST_CASE("plan validation") {
  const auto g = gower_center(scalar_euclidean({0, 1, 2, 3}));
  const auto h = group_projector(GroupAssignment({0, 0, 1, 1}));
  PermutationPlan bad_mc;
  bad_mc.n_pi = 100;
  CHECK_THROWS_AS(perm_F_values(g, h, bad_mc), InvalidInput);
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(10, 10);
  PermutationPlan exact;
  exact.mode = Mode::Exact;
  CHECK_THROWS_AS(perm_F_values(GowerMatrix(big),
                                group_projector(GroupAssignment(std::vector<int>{
                                    0, 0, 0, 0, 0, 1, 1, 1, 1, 1})),
                                exact),
                  InvalidInput);
}

TEST_CASE("Monte Carlo p-values: seed-reproducible, thread-independent, scale-invariant") {
  SplitMix64 rng(99);
  const auto y = test_util::random_matrix(30, 3, rng);
  const auto d = pairwise_matrix(VectorDataset{y}, VectorMeasure::Manhattan);
  const GroupAssignment groups(test_util::random_labels(30, 2, rng));
  const auto h = group_projector(groups);
  const auto g = gower_center(d);
  const auto f_hat = dbf_statistic(variance_decomposition(g, h));

  PermutationPlan plan;
  plan.n_pi = 4000;
  plan.seed = 123;
  plan.threads = 1;
  const auto fv1 = perm_F_values(g, h, plan);
  plan.threads = 4;
  const auto fv4 = perm_F_values(g, h, plan);
  REQUIRE(fv1.size() == fv4.size());
  for (std::size_t i = 0; i < fv1.size(); ++i) CHECK(fv1[i] == fv4[i]);

  const double p1 = permutation::perm_pvalue(f_hat, fv1);
  // scaling distances leaves every F and the p-value unchanged
  const auto g_scaled = gower_center(DistanceMatrix(2.0 * d.values()));
  const auto fv_scaled = perm_F_values(g_scaled, h, plan);
  CHECK(permutation::perm_pvalue(f_hat, fv_scaled) == doctest::Approx(p1).epsilon(1e-12));
}

TEST_CASE("exact p-value is invariant to the plan seed") {
  const auto g = gower_center(scalar_euclidean({0.3, 1.0, 2.4, 3.1, 4.0}));
  const auto h = group_projector(GroupAssignment({0, 0, 0, 1, 1}));
  PermutationPlan a;
  a.mode = Mode::Exact;
  a.seed = 1;
  PermutationPlan b;
  b.mode = Mode::Exact;
  b.seed = 999;
  const auto fa = perm_F_values(g, h, a);
  const auto fb = perm_F_values(g, h, b);
  CHECK(permutation::perm_pvalue(1.0, fa) == permutation::perm_pvalue(1.0, fb));
}

TEST_CASE("Monte Carlo without identity matches the pure proportion estimator") {
  SplitMix64 rng(55);
  const auto y = test_util::random_matrix(12, 2, rng);
  const auto g = gower_center(pairwise_matrix(VectorDataset{y}, VectorMeasure::Euclidean));
  const GroupAssignment groups(test_util::random_labels(12, 2, rng));
  const auto h = group_projector(groups);
  PermutationPlan plan;
  plan.n_pi = 2000;
  plan.seed = 5;
  plan.include_identity = false;
  const auto fv = perm_F_values(g, h, plan);
  CHECK(fv.size() == 2000);
  // with identity excluded a zero count is possible; the estimator is the
  // raw proportion
  const double huge = 1e12;
  CHECK(permutation::perm_pvalue(huge, fv) == 0.0);
}

TEST_CASE("sampler overload agrees with the matrix-level Monte Carlo path") {
  SplitMix64 rng(1001);
  const auto y = test_util::random_matrix(25, 2, rng);
  const auto g = gower_center(pairwise_matrix(VectorDataset{y}, VectorMeasure::Euclidean));
  const GroupAssignment groups(test_util::random_labels(25, 2, rng));
  const auto h = group_projector(groups);
  PermutationPlan plan;
  plan.n_pi = 3000;
  plan.seed = 4242;
  const auto via_matrix = perm_F_values(g, h, plan);
  const detail::GroupedBSampler sampler(detail::ClassGower::from_gower(g, nullptr), groups);
  const auto via_sampler = perm_F_values(sampler, plan);
  REQUIRE(via_matrix.size() == via_sampler.size());
  for (std::size_t i = 0; i < via_matrix.size(); ++i)
    CHECK(via_matrix[i] == via_sampler[i]);
}
