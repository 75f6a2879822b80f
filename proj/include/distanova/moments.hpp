#pragma once

#include <cstdint>
#include <vector>

#include "distanova/core.hpp"
#include "distanova/grouped_sampler.hpp"

namespace distanova::moments {

struct TraceQuantities {
  double a1 = 0.0;  // tr(H)
  double a2 = 0.0;  // sum_ij h_ij^2 = tr(H H) for symmetric H
  double a3 = 0.0;  // sum_i h_ii^2
  double b1 = 0.0;  // tr(G)
  double b2 = 0.0;  // sum_ij g_ij^2
  double b3 = 0.0;  // sum_i g_ii^2
};

enum class SkewBackend { Enumerated, MonteCarlo };

struct McConfig {
  long n_draws = 10000;  // >= 10^4 (hybrid estimator: only E[(B-mu)^3] is sampled)
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SkewEstimate {
  double gamma = 0.0;
  double std_error = 0.0;  // 0 for the enumerated backend
};

struct PermMoments {
  double mu = 0.0;
  double sigma2 = 0.0;
  double gamma = 0.0;
  double gamma_se = 0.0;
  SkewBackend backend = SkewBackend::MonteCarlo;
  bool degenerate = false;  // sigma2 clamped at zero
};

TraceQuantities trace_quantities(const GroupProjector& projector, const GowerMatrix& gower);

// a-side quantities depend on group sizes only.
void projector_trace_quantities(const std::vector<int>& group_sizes, int n, double& a1,
                                double& a2, double& a3);

// Closed-form permutational mean and variance of B = tr(H G_pi); requires
// n >= 4. A tiny negative variance from cancellation is clamped to zero.
std::pair<double, double> mean_variance(const TraceQuantities& q, int n);

// All N! values of tr(H P G P^T); refuses N > 9.
std::vector<double> enumerate_B(const GroupProjector& projector, const GowerMatrix& gower);

// Third standardized moment of the permutation distribution of B.
// Enumerated: exact for N <= 9. MonteCarlo: closed-form mu/sigma plus a
// seeded sample average of (B - mu)^3; deterministic for a fixed seed and
// schedule-independent across threads.
SkewEstimate skewness(const GroupProjector& projector, const GowerMatrix& gower,
                      SkewBackend backend, const McConfig& config = {});

// Same estimator on a prebuilt sampler (scan fast path).
SkewEstimate mc_skewness(const detail::GroupedBSampler& sampler, double mu, double sigma2,
                         const McConfig& config);

// Exact skewness for N <= 9 by enumerating the distinct label arrangements
// (each stands for Prod N_g! of the N! permutations, so the moments match
// the full enumeration).
SkewEstimate enumerated_skewness_grouped(const detail::GroupedBSampler& sampler,
                                         const GroupAssignment& groups);

// Closed-form mu/sigma^2 with the selected skewness backend.
PermMoments perm_moments(const GroupProjector& projector, const GowerMatrix& gower,
                         SkewBackend backend, const McConfig& config = {});

}  // namespace distanova::moments
