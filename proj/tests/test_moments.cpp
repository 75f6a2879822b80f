#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "distanova/core.hpp"
#include "distanova/distances.hpp"
#include "distanova/moments.hpp"
#include "test_util.hpp"

using namespace distanova;

namespace {

DistanceMatrix scalar_euclidean(const std::vector<double>& y) {
  const int n = static_cast<int>(y.size());
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d(i, j) = std::abs(y[i] - y[j]);
  return DistanceMatrix(std::move(d));
}

// independent brute force: materializes P G P^T for every permutation
std::vector<double> enumerate_oracle(const Eigen::MatrixXd& h, const Eigen::MatrixXd& g) {
  const int n = static_cast<int>(h.rows());
  std::vector<int> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  std::vector<double> out;
  do {
    Eigen::MatrixXd gp(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gp(i, j) = g(pi[i], pi[j]);
    out.push_back((h * gp).trace());
  } while (std::next_permutation(pi.begin(), pi.end()));
  return out;
}

struct MultisetMoments {
  double mu, var, skew;
};

MultisetMoments multiset_moments(const std::vector<double>& values) {
  long double s = 0.0;
  for (double v : values) s += v;
  const long double mu = s / values.size();
  long double m2 = 0.0, m3 = 0.0;
  for (double v : values) {
    const long double d = v - mu;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= values.size();
  m3 /= values.size();
  return {static_cast<double>(mu), static_cast<double>(m2),
          static_cast<double>(m3 / (m2 * std::sqrt(static_cast<double>(m2))))};
}

}  // namespace

TEST_CASE("trace_quantities: closed-form cases") {
  const auto g0 = gower_center(scalar_euclidean({0, 1, 2}));
  const auto h0 = group_projector(GroupAssignment({0, 0, 0}));
  const auto q0 = moments::trace_quantities(h0, g0);
  CHECK(q0.a1 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(q0.a2 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(q0.a3 == doctest::Approx(0.0).epsilon(1e-14));

  const auto g1 = gower_center(scalar_euclidean({0, 1}));
  const auto h1 = group_projector(GroupAssignment({0, 1}));
  const auto q1 = moments::trace_quantities(h1, g1);
  CHECK(q1.a1 == doctest::Approx(1.0));
  CHECK(q1.a2 == doctest::Approx(1.0));
  CHECK(q1.a3 == doctest::Approx(0.5));

  // b1 is the total variability
  const auto g2 = gower_center(scalar_euclidean({0, 1, 2, 3}));
  const auto h2 = group_projector(GroupAssignment({0, 0, 1, 1}));
  CHECK(moments::trace_quantities(h2, g2).b1 == doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("projector_trace_quantities matches the materialized projector") {
  SplitMix64 rng(101);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 5 + static_cast<int>(rng.next_below(30));
    const int g = 2 + static_cast<int>(rng.next_below(4));
    const GroupAssignment groups(test_util::random_labels(n, g, rng));
    const auto h = group_projector(groups);
    Eigen::MatrixXd gmat = Eigen::MatrixXd::Identity(n, n);  // any symmetric works
    const auto q = moments::trace_quantities(h, GowerMatrix(gmat));
    double a1, a2, a3;
    moments::projector_trace_quantities(groups.group_sizes(), n, a1, a2, a3);
    CHECK(test_util::rel_diff(q.a1, a1) < 1e-12);
    CHECK(test_util::rel_diff(q.a2, a2) < 1e-12);
    CHECK(test_util::rel_diff(q.a3, a3) < 1e-12);
  }
}

TEST_CASE("mean_variance: frozen values for y=(0,1,2,3), groups {12|34}") {
  const auto g = gower_center(scalar_euclidean({0, 1, 2, 3}));
  const auto h = group_projector(GroupAssignment({0, 0, 1, 1}));
  const auto q = moments::trace_quantities(h, g);
  const auto [mu, sigma2] = moments::mean_variance(q, 4);
  CHECK(mu == doctest::Approx(5.0 / 3.0).epsilon(1e-13));       // enumeration: 40/24
  CHECK(sigma2 == doctest::Approx(26.0 / 9.0).epsilon(1e-12));  // enumeration over 4!
  CHECK_THROWS_AS(moments::mean_variance(q, 3), InvalidInput);
}

TEST_CASE("mean_variance: G=1 gives a point mass at zero") {
  const auto g = gower_center(scalar_euclidean({0, 2, 5, 6}));
  const auto h = group_projector(GroupAssignment({0, 0, 0, 0}));
  const auto [mu, sigma2] = moments::mean_variance(moments::trace_quantities(h, g), 4);
  CHECK(std::abs(mu) < 1e-12);
  CHECK(std::abs(sigma2) < 1e-12);
}

TEST_CASE("enumerate_B: cardinalities and distinct values") {
  const auto g2 = gower_center(scalar_euclidean({0, 1}));
  const auto h2 = group_projector(GroupAssignment({0, 1}));
  CHECK(moments::enumerate_B(h2, g2).size() == 2);

  const auto g3 = gower_center(scalar_euclidean({0, 1, 3}));
  const auto h3 = group_projector(GroupAssignment({0, 1, 1}));
  auto values = moments::enumerate_B(h3, g3);
  CHECK(values.size() == 6);
  std::sort(values.begin(), values.end());
  int distinct = 1;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] - values[i - 1] > 1e-12) ++distinct;
  CHECK(distinct == 3);  // one value per choice of the singleton sample

  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(10, 10);
  CHECK_THROWS_AS(
      moments::enumerate_B(group_projector(GroupAssignment(std::vector<int>(10, 0))),
                           GowerMatrix(big)),
      InvalidInput);
}

TEST_CASE("enumerate_B agrees with the matrix-permutation brute force") {
  SplitMix64 rng(7);
  for (int rep = 0; rep < 4; ++rep) {
    const int n = 4 + static_cast<int>(rng.next_below(2));
    const auto y = test_util::random_matrix(n, 2, rng);
    const auto g = gower_center(pairwise_matrix(VectorDataset{y}, VectorMeasure::Euclidean));
    const auto h = group_projector(GroupAssignment(test_util::random_labels(n, 2, rng)));
    const auto fast = moments::enumerate_B(h, g);
    const auto slow = enumerate_oracle(h.values(), g.values());
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i)
      CHECK(test_util::rel_diff(fast[i], slow[i]) < 1e-12);
  }
}

TEST_CASE("closed-form mean and variance match enumeration for N in 4..7") {
  SplitMix64 rng(1234);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 4 + static_cast<int>(rng.next_below(4));
    const int ng = 2 + static_cast<int>(rng.next_below(std::min(3, n - 1)));
    const auto y = test_util::random_matrix(n, 3, rng);
    const auto measure = rep % 2 == 0 ? VectorMeasure::Euclidean : VectorMeasure::Manhattan;
    const auto g = gower_center(pairwise_matrix(VectorDataset{y}, measure));
    const auto h = group_projector(GroupAssignment(test_util::random_labels(n, ng, rng)));
    const auto mm = multiset_moments(moments::enumerate_B(h, g));
    const auto [mu, sigma2] = moments::mean_variance(moments::trace_quantities(h, g), n);
    CHECK(test_util::rel_diff(mu, mm.mu) < 1e-10);
    CHECK(test_util::rel_diff(sigma2, mm.var) < 1e-10);
  }
}

TEST_CASE("skewness: enumerated backend matches the multiset oracle") {
  const auto g = gower_center(scalar_euclidean({0, 1, 2, 3}));
  const auto h = group_projector(GroupAssignment({0, 0, 1, 1}));
  const auto est = moments::skewness(h, g, moments::SkewBackend::Enumerated);
  // enumeration over 4!: third central moment 70/27, variance 26/9
  const double expected = (70.0 / 27.0) / std::pow(26.0 / 9.0, 1.5);
  CHECK(est.gamma == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("skewness: degenerate equidistant configuration is refused") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(5, 5, 1.0);
  d.diagonal().setZero();
  const auto g = gower_center(DistanceMatrix(d));
  const auto h = group_projector(GroupAssignment({0, 0, 0, 1, 1}));
  CHECK_THROWS_AS(moments::skewness(h, g, moments::SkewBackend::Enumerated),
                  DegeneracyError);
}

TEST_CASE("skewness: Monte Carlo matches enumeration within its standard error") {
  SplitMix64 rng(555);
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 5 + static_cast<int>(rng.next_below(3));
    const auto y = test_util::random_matrix(n, 2, rng);
    const auto g = gower_center(pairwise_matrix(VectorDataset{y}, VectorMeasure::Euclidean));
    const auto h = group_projector(GroupAssignment(test_util::random_labels(n, 2, rng)));
    const auto exact = moments::skewness(h, g, moments::SkewBackend::Enumerated);
    moments::McConfig cfg;
    cfg.n_draws = 200000;
    cfg.seed = 99 + rep;
    const auto mc = moments::skewness(h, g, moments::SkewBackend::MonteCarlo, cfg);
    CHECK(std::abs(mc.gamma - exact.gamma) < 4.0 * mc.std_error + 1e-6);
  }
}

TEST_CASE("skewness: Monte Carlo is bit-reproducible and thread-independent") {
  SplitMix64 rng(2024);
  const auto y = test_util::random_matrix(40, 3, rng);
  const auto g = gower_center(pairwise_matrix(VectorDataset{y}, VectorMeasure::Manhattan));
  const auto h = group_projector(GroupAssignment(test_util::random_labels(40, 2, rng)));
  moments::McConfig cfg;
  cfg.n_draws = 20000;
  cfg.seed = 31337;
  cfg.threads = 1;
  const auto a = moments::skewness(h, g, moments::SkewBackend::MonteCarlo, cfg);
  const auto b = moments::skewness(h, g, moments::SkewBackend::MonteCarlo, cfg);
  cfg.threads = 4;
  const auto c = moments::skewness(h, g, moments::SkewBackend::MonteCarlo, cfg);
  CHECK(a.gamma == b.gamma);
  CHECK(a.gamma == c.gamma);
  cfg.seed = 31338;
  const auto d = moments::skewness(h, g, moments::SkewBackend::MonteCarlo, cfg);
  CHECK(a.gamma != d.gamma);
}

TEST_CASE("moments scale as c^2 under distance scaling; gamma is invariant") {
  SplitMix64 rng(808);
  const int n = 12;
  const auto y = test_util::random_matrix(n, 2, rng);
  const auto d = pairwise_matrix(VectorDataset{y}, VectorMeasure::Euclidean);
  const GroupAssignment groups(test_util::random_labels(n, 3, rng));
  const auto h = group_projector(groups);
  const auto g1 = gower_center(d);
  const auto g2 = gower_center(DistanceMatrix(2.0 * d.values()));  // exact fp scaling
  const auto q1 = moments::trace_quantities(h, g1);
  const auto q2 = moments::trace_quantities(h, g2);
  const auto [mu1, s1] = moments::mean_variance(q1, n);
  const auto [mu2, s2] = moments::mean_variance(q2, n);
  CHECK(mu2 == doctest::Approx(4.0 * mu1).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(16.0 * s1).epsilon(1e-13));
  moments::McConfig cfg;
  cfg.n_draws = 10000;
  cfg.seed = 5;
  const auto ga = moments::skewness(h, g1, moments::SkewBackend::MonteCarlo, cfg);
  const auto gb = moments::skewness(h, g2, moments::SkewBackend::MonteCarlo, cfg);
  CHECK(ga.gamma == doctest::Approx(gb.gamma).epsilon(1e-12));
}

TEST_CASE("gamma is invariant under sample relabeling") {
  SplitMix64 rng(99);
  const int n = 7;
  const auto y = test_util::random_matrix(n, 2, rng);
  const auto d = pairwise_matrix(VectorDataset{y}, VectorMeasure::Euclidean);
  const auto labels = test_util::random_labels(n, 2, rng);
  const auto gamma_a = moments::skewness(group_projector(GroupAssignment(labels)),
                                         gower_center(d), moments::SkewBackend::Enumerated);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  partial_shuffle(std::span<int>(perm), perm.size(), rng);
  Eigen::MatrixXd dp(n, n);
  std::vector<int> lp(n);
  for (int i = 0; i < n; ++i) {
    lp[i] = labels[perm[i]];
    for (int j = 0; j < n; ++j) dp(i, j) = d.values()(perm[i], perm[j]);
  }
  const auto gamma_b =
      moments::skewness(group_projector(GroupAssignment(lp)),
                        gower_center(DistanceMatrix(dp)), moments::SkewBackend::Enumerated);
  CHECK(gamma_a.gamma == doctest::Approx(gamma_b.gamma).epsilon(1e-11));
}

TEST_CASE("B of real-valued vector data is right-skewed under permutation") {
  SplitMix64 rng(4242);
  for (int rep = 0; rep < 3; ++rep) {
    const int n = 30;
    const auto y = test_util::random_matrix(n, 10, rng, 2.0);
    const auto g = gower_center(pairwise_matrix(VectorDataset{y}, VectorMeasure::Euclidean));
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = i < n / 2 ? 0 : 1;
    const auto h = group_projector(GroupAssignment(labels));
    moments::McConfig cfg;
    cfg.n_draws = 20000;
    cfg.seed = rep;
    const auto est = moments::skewness(h, g, moments::SkewBackend::MonteCarlo, cfg);
    CHECK(est.gamma > 0.0);
  }
}

TEST_CASE("grouped enumeration matches generic enumeration, including G=3") {
  SplitMix64 rng(648);
  for (int rep = 0; rep < 6; ++rep) {
    const int n = 5 + static_cast<int>(rng.next_below(3));
    const int ng = 2 + static_cast<int>(rng.next_below(2));
    const auto y = test_util::random_matrix(n, 2, rng);
    const auto g = gower_center(pairwise_matrix(VectorDataset{y}, VectorMeasure::Euclidean));
    const GroupAssignment groups(test_util::random_labels(n, ng, rng));
    const auto h = group_projector(groups);
    const auto generic = moments::skewness(h, g, moments::SkewBackend::Enumerated);
    const detail::GroupedBSampler sampler(detail::ClassGower::from_gower(g, nullptr), groups);
    const auto grouped = moments::enumerated_skewness_grouped(sampler, groups);
    CHECK(test_util::rel_diff(generic.gamma, grouped.gamma) < 1e-10);
  }
}

TEST_CASE("sampler: class compression changes nothing") {
  SplitMix64 rng(31415);
  // duplicate rows so classes are nontrivial
  const int n = 24;
  Eigen::MatrixXd y(n, 2);
  std::vector<std::int32_t> class_of(n);
  const auto base = test_util::random_matrix(5, 2, rng);
  for (int i = 0; i < n; ++i) {
    const int c = static_cast<int>(rng.next_below(5));
    y.row(i) = base.row(c);
    class_of[i] = c;
  }
  const auto g = gower_center(pairwise_matrix(VectorDataset{y}, VectorMeasure::Euclidean));
  const GroupAssignment groups(test_util::random_labels(n, 2, rng));
  const detail::GroupedBSampler plain(detail::ClassGower::from_gower(g, nullptr), groups);
  const detail::GroupedBSampler packed(detail::ClassGower::from_gower(g, &class_of), groups);
  CHECK(plain.uses_class_counts() != packed.uses_class_counts());
  CHECK(test_util::rel_diff(plain.observed_b(), packed.observed_b()) < 1e-11);
  CHECK(test_util::rel_diff(plain.total(), packed.total()) < 1e-12);
  SplitMix64 r1(77), r2(77);
  auto s1 = plain.make_scratch();
  auto s2 = packed.make_scratch();
  for (int k = 0; k < 500; ++k) {
    const double b1 = plain.draw_b(r1, s1);
    const double b2 = packed.draw_b(r2, s2);
    CHECK(std::abs(b1 - b2) < 1e-11 * std::max(1.0, std::abs(b1)));
  }
}

TEST_CASE("sampler: observed B matches the variance decomposition") {
  SplitMix64 rng(2718);
  for (int ng : {2, 3, 4}) {
    const int n = 20;
    const auto y = test_util::random_matrix(n, 3, rng);
    const auto g = gower_center(pairwise_matrix(VectorDataset{y}, VectorMeasure::Manhattan));
    const GroupAssignment groups(test_util::random_labels(n, ng, rng));
    const auto v = variance_decomposition(g, group_projector(groups));
    const detail::GroupedBSampler sampler(detail::ClassGower::from_gower(g, nullptr), groups);
    CHECK(test_util::rel_diff(sampler.observed_b(), v.between) < 1e-11);
    CHECK(test_util::rel_diff(sampler.total(), v.total) < 1e-12);
    // sample mean approaches the closed-form mu
    const auto [mu, sigma2] =
        moments::mean_variance(moments::trace_quantities(group_projector(groups), g), n);
    SplitMix64 r(5);
    auto scratch = sampler.make_scratch();
    double sum = 0.0;
    const int draws = 40000;
    for (int k = 0; k < draws; ++k) sum += sampler.draw_b(r, scratch);
    CHECK(std::abs(sum / draws - mu) < 5.0 * std::sqrt(sigma2 / draws));
  }
}
