#include "distanova/permutation.hpp"

#include <cmath>
#include <limits>

#include "distanova/moments.hpp"
#include "distanova/parallel.hpp"

namespace distanova::permutation {

namespace {

constexpr std::size_t kDrawChunk = 512;

double f_of_b(double b, double total) {
  const double w = total - b;
  if (w == 0.0) return std::numeric_limits<double>::infinity();
  return b / w;
}

}  // namespace

std::vector<double> perm_F_values(const detail::GroupedBSampler& sampler,
                                  const PermutationPlan& plan) {
  if (plan.mode == Mode::Exact)
    throw InvalidInput("perm_F_values: exact mode requires the matrix-level overload");
  if (plan.n_pi < 1000) throw InvalidInput("perm_F_values: Monte Carlo requires N_pi >= 10^3");
  const double total = sampler.total();
  const std::size_t n_pi = static_cast<std::size_t>(plan.n_pi);
  std::vector<double> values(n_pi);
  std::size_t offset = 0;
  if (plan.include_identity) {
    values[0] = f_of_b(sampler.observed_b(), total);
    offset = 1;
  }
  const std::size_t n_random = n_pi - offset;
  parallel_chunks(n_random, kDrawChunk, plan.threads,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                    SplitMix64 rng(mix_seed(plan.seed, 0x7065726dULL, chunk));
                    auto scratch = sampler.make_scratch();
                    for (std::size_t k = begin; k < end; ++k)
                      values[offset + k] = f_of_b(sampler.draw_b(rng, scratch), total);
                  });
  return values;
}

std::vector<double> perm_F_values(const GowerMatrix& gower, const GroupProjector& projector,
                                  const PermutationPlan& plan) {
  if (plan.mode == Mode::MonteCarlo) {
    const detail::GroupedBSampler sampler(detail::ClassGower::from_gower(gower, nullptr),
                                          projector.groups());
    return perm_F_values(sampler, plan);
  }
  // exact enumeration; T is fixed across permutations
  const auto b_values = moments::enumerate_B(projector, gower);
  double total = 0.0;
  for (int i = 0; i < gower.n(); ++i) total += gower.values()(i, i);
  std::vector<double> values(b_values.size());
  for (std::size_t i = 0; i < b_values.size(); ++i) values[i] = f_of_b(b_values[i], total);
  return values;
}

double perm_pvalue(double f_hat, std::span<const double> f_values) {
  if (f_values.empty()) throw InvalidInput("perm_pvalue: empty permutation set");
  std::size_t count = 0;
  for (double f : f_values)
    if (f >= f_hat) ++count;
  return static_cast<double>(count) / static_cast<double>(f_values.size());
}

}  // namespace distanova::permutation
