#include "distanova/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "distanova/numeric.hpp"
#include "distanova/parallel.hpp"

namespace distanova::moments {

namespace {

constexpr int kMaxEnumerateN = 9;
constexpr std::size_t kDrawChunk = 512;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

TraceQuantities trace_quantities(const GroupProjector& projector, const GowerMatrix& gower) {
  const int n = gower.n();
  if (projector.n() != n) throw InvalidInput("trace_quantities: dimension mismatch");
  const auto& h = projector.values();
  const auto& g = gower.values();
  TraceQuantities q;
  NeumaierSum a1, a2, a3, b1, b2, b3;
  for (int i = 0; i < n; ++i) {
    a1.add(h(i, i));
    a3.add(h(i, i) * h(i, i));
    b1.add(g(i, i));
    b3.add(g(i, i) * g(i, i));
    for (int j = 0; j < n; ++j) {
      a2.add(h(i, j) * h(i, j));
      b2.add(g(i, j) * g(i, j));
    }
  }
  q.a1 = a1.value();
  q.a2 = a2.value();
  q.a3 = a3.value();
  q.b1 = b1.value();
  q.b2 = b2.value();
  q.b3 = b3.value();
  return q;
}

void projector_trace_quantities(const std::vector<int>& group_sizes, int n, double& a1,
                                double& a2, double& a3) {
  const int g = static_cast<int>(group_sizes.size());
  a1 = g - 1.0;
  // within group g the entry is 1/N_g - 1/N (diagonal included); across
  // groups it is -1/N
  double same = 0.0, same_diag = 0.0, pairs_same = 0.0;
  for (int k = 0; k < g; ++k) {
    const double ng = group_sizes[k];
    const double v = 1.0 / ng - 1.0 / n;
    same += ng * ng * v * v;
    same_diag += ng * v * v;
    pairs_same += ng * ng;
  }
  a2 = same + (static_cast<double>(n) * n - pairs_same) / (static_cast<double>(n) * n);
  a3 = same_diag;
}

std::pair<double, double> mean_variance(const TraceQuantities& q, int n) {
  if (n < 4) throw InvalidInput("mean_variance: requires N >= 4");
  const long double nn = n;
  const long double a1 = q.a1, a2 = q.a2, a3 = q.a3;
  const long double b1 = q.b1, b2 = q.b2, b3 = q.b3;
  const long double mu = a1 * b1 / (nn - 1.0L);
  const long double term1 = 2.0L * ((nn - 1.0L) * a2 - a1 * a1) *
                            ((nn - 1.0L) * b2 - b1 * b1) /
                            ((nn - 1.0L) * (nn - 1.0L) * (nn + 1.0L) * (nn - 2.0L));
  const long double term2 =
      (nn * (nn + 1.0L) * a3 - (nn - 1.0L) * (a1 * a1 + 2.0L * a2)) *
      (nn * (nn + 1.0L) * b3 - (nn - 1.0L) * (b1 * b1 + 2.0L * b2)) /
      ((nn + 1.0L) * nn * (nn - 1.0L) * (nn - 2.0L) * (nn - 3.0L));
  double sigma2 = static_cast<double>(term1 + term2);
  if (sigma2 < 0.0) sigma2 = 0.0;  // cancellation guard; caller flags degenerate
  return {static_cast<double>(mu), sigma2};
}

std::vector<double> enumerate_B(const GroupProjector& projector, const GowerMatrix& gower) {
  const int n = gower.n();
  if (projector.n() != n) throw InvalidInput("enumerate_B: dimension mismatch");
  if (n > kMaxEnumerateN)
    throw InvalidInput("enumerate_B: refusing N > 9 (N! permutations)");
  const auto& h = projector.values();
  const auto& g = gower.values();
  std::vector<int> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(factorial(n)));
  do {
    double b = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b += h(i, j) * g(pi[i], pi[j]);
    values.push_back(b);
  } while (std::next_permutation(pi.begin(), pi.end()));
  return values;
}

namespace {

// Two-pass central moments of an enumerated multiset.
SkewEstimate enumerated_skewness(const std::vector<double>& values) {
  NeumaierSum mean_sum;
  for (double v : values) mean_sum.add(v);
  const double mu = mean_sum.value() / static_cast<double>(values.size());
  NeumaierSum m2, m3;
  for (double v : values) {
    const double d = v - mu;
    m2.add(d * d);
    m3.add(d * d * d);
  }
  const double var = m2.value() / static_cast<double>(values.size());
  if (var <= 0.0)
    throw DegeneracyError("skewness: point-mass permutation distribution");
  const double third = m3.value() / static_cast<double>(values.size());
  return {third / (var * std::sqrt(var)), 0.0};
}

}  // namespace

SkewEstimate enumerated_skewness_grouped(const detail::GroupedBSampler& sampler,
                                         const GroupAssignment& groups) {
  const int n = groups.n();
  if (n > kMaxEnumerateN)
    throw InvalidInput("enumerated skewness: refusing N > 9 (N! permutations)");
  const auto& cg = sampler.class_gower();
  const int r = cg.n_classes;
  const int g = groups.group_count();
  std::vector<int> arrangement = groups.labels();
  std::sort(arrangement.begin(), arrangement.end());
  std::vector<double> counts(static_cast<std::size_t>(g) * r);
  std::vector<double> values;
  do {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (int i = 0; i < n; ++i)
      counts[static_cast<std::size_t>(arrangement[i]) * r + cg.class_of[i]] += 1.0;
    double b = -cg.total_sum / n;
    for (int k = 0; k < g; ++k) {
      const double* cnt = counts.data() + static_cast<std::size_t>(k) * r;
      double quad = 0.0;
      for (int a = 0; a < r; ++a) {
        if (cnt[a] == 0.0) continue;
        double dot = 0.0;
        for (int c = 0; c < r; ++c) dot += cg.at(a, c) * cnt[c];
        quad += cnt[a] * dot;
      }
      b += quad / groups.group_sizes()[k];
    }
    values.push_back(b);
  } while (std::next_permutation(arrangement.begin(), arrangement.end()));
  return enumerated_skewness(values);
}

SkewEstimate mc_skewness(const detail::GroupedBSampler& sampler, double mu, double sigma2,
                         const McConfig& config) {
  if (config.n_draws < 10000)
    throw InvalidInput("mc_skewness: Monte Carlo backend requires N_pi >= 10^4");
  if (sigma2 <= 0.0)
    throw DegeneracyError("skewness: point-mass permutation distribution");
  const std::size_t n_draws = static_cast<std::size_t>(config.n_draws);
  const std::size_t n_chunks = (n_draws + kDrawChunk - 1) / kDrawChunk;
  std::vector<double> chunk_sum(n_chunks, 0.0), chunk_sumsq(n_chunks, 0.0);
  parallel_chunks(n_draws, kDrawChunk, config.threads,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                    SplitMix64 rng(mix_seed(config.seed, 0x6d6f6d33ULL, chunk));
                    auto scratch = sampler.make_scratch();
                    double s = 0.0, s2 = 0.0;
                    for (std::size_t k = begin; k < end; ++k) {
                      const double d = sampler.draw_b(rng, scratch) - mu;
                      const double x = d * d * d;
                      s += x;
                      s2 += x * x;
                    }
                    chunk_sum[chunk] = s;
                    chunk_sumsq[chunk] = s2;
                  });
  NeumaierSum total, total_sq;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    total.add(chunk_sum[c]);
    total_sq.add(chunk_sumsq[c]);
  }
  const double nd = static_cast<double>(n_draws);
  const double mean_x = total.value() / nd;
  const double var_x = std::max(0.0, total_sq.value() / nd - mean_x * mean_x);
  const double sigma3 = sigma2 * std::sqrt(sigma2);
  return {mean_x / sigma3, std::sqrt(var_x / nd) / sigma3};
}

SkewEstimate skewness(const GroupProjector& projector, const GowerMatrix& gower,
                      SkewBackend backend, const McConfig& config) {
  if (backend == SkewBackend::Enumerated)
    return enumerated_skewness(enumerate_B(projector, gower));
  const auto q = trace_quantities(projector, gower);
  const auto [mu, sigma2] = mean_variance(q, gower.n());
  const detail::GroupedBSampler sampler(
      detail::ClassGower::from_gower(gower, nullptr), projector.groups());
  return mc_skewness(sampler, mu, sigma2, config);
}

PermMoments perm_moments(const GroupProjector& projector, const GowerMatrix& gower,
                         SkewBackend backend, const McConfig& config) {
  PermMoments out;
  out.backend = backend;
  const auto q = trace_quantities(projector, gower);
  std::tie(out.mu, out.sigma2) = mean_variance(q, gower.n());
  if (out.sigma2 <= 0.0) {
    out.degenerate = true;
    return out;
  }
  if (backend == SkewBackend::Enumerated) {
    const auto est = enumerated_skewness(enumerate_B(projector, gower));
    out.gamma = est.gamma;
  } else {
    const detail::GroupedBSampler sampler(
        detail::ClassGower::from_gower(gower, nullptr), projector.groups());
    const auto est = mc_skewness(sampler, out.mu, out.sigma2, config);
    out.gamma = est.gamma;
    out.gamma_se = est.std_error;
  }
  return out;
}

}  // namespace distanova::moments
