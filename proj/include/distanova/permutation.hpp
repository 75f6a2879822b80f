#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "distanova/core.hpp"
#include "distanova/grouped_sampler.hpp"

namespace distanova::permutation {

enum class Mode { Exact, MonteCarlo };

struct PermutationPlan {
  Mode mode = Mode::MonteCarlo;
  long n_pi = 10000;          // Monte Carlo draw count, >= 10^3
  std::uint64_t seed = 0;
  int threads = 1;
  // The observed statistic is counted as the first Monte Carlo draw, so
  // p >= 1/N_pi. The paper's estimator is the pure proportion; disable to
  // match it exactly.
  bool include_identity = true;
};

// F_pi = B_pi / (T - B_pi) for each permutation. Exact mode enumerates all
// N! relabelings (N <= 9); Monte Carlo mode draws seeded uniform relabelings
// in fixed chunks so results do not depend on the thread schedule.
std::vector<double> perm_F_values(const GowerMatrix& gower, const GroupProjector& projector,
                                  const PermutationPlan& plan);

// Same draws on a prebuilt sampler (scan fast path).
std::vector<double> perm_F_values(const detail::GroupedBSampler& sampler,
                                  const PermutationPlan& plan);

// Proportion of permuted statistics >= the observed one (ties count).
double perm_pvalue(double f_hat, std::span<const double> f_values);

}  // namespace distanova::permutation
