#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace distanova::validation {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double elapsed_seconds = 0.0;
};

// Closed-form mu/sigma^2 vs full enumeration and enumerated vs Monte Carlo
// skewness on randomized small datasets.
CheckResult check_moment_oracle(int datasets, long mc_draws, double rel_tol,
                                std::uint64_t seed, int threads);

// Scalar Euclidean DBF equals classical one-way ANOVA up to degrees of
// freedom on randomized datasets.
CheckResult check_anova_identity(int datasets, double rel_tol, std::uint64_t seed);

// t2_from_dbf on the total-metric DBF equals the direct Hotelling T^2.
CheckResult check_hotelling_identity(int datasets, double rel_tol, std::uint64_t seed);

// CDF validity conditions (limits, monotonicity, right-continuity) and unit
// PDF mass over randomized (mu, sigma, gamma, T) covering all three cases.
CheckResult check_cdf_validity(int parameter_sets, std::uint64_t seed, int threads);

// Pearson type III pdf mass/mean/variance/skewness by quadrature.
CheckResult check_pt3_moments(double tol);

std::vector<CheckResult> run_all(std::uint64_t seed, int threads);

}  // namespace distanova::validation
