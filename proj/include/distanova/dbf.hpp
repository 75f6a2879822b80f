#pragma once

#include <optional>

#include "distanova/core.hpp"
#include "distanova/grouped_sampler.hpp"
#include "distanova/moments.hpp"
#include "distanova/pearson3.hpp"

namespace distanova {

// End-to-end DBF test options shared by the CLI, the scan and the
// simulation runners.
struct DbfOptions {
  moments::SkewBackend skew_backend = moments::SkewBackend::MonteCarlo;
  long skew_draws = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
};

enum class DbfStatus {
  Ok,
  // W = 0 with B > 0: the statistic diverges; p = 0 by convention.
  DegenerateWithin,
  // no variability at all (T = 0) or a point-mass permutation distribution;
  // no p-value is defined.
  DegenerateNull,
};

struct DbfOutcome {
  DbfStatus status = DbfStatus::Ok;
  VarianceDecomposition decomposition;
  double f_hat = 0.0;                     // +inf when DegenerateWithin
  moments::PermMoments moments;
  std::optional<pearson3::DbfNull> null;  // absent when degenerate
  double p_value = 0.0;                   // NaN when DegenerateNull
};

// Fits the approximate null from closed-form moments plus the selected
// skewness backend and evaluates the one-sided p-value. Requires N >= 7
// (the closed forms are not trusted below that).
DbfOutcome run_dbf_test(const detail::GroupedBSampler& sampler,
                        const GroupAssignment& groups, const DbfOptions& options);

DbfOutcome run_dbf_test(const GowerMatrix& gower, const GroupAssignment& groups,
                        const DbfOptions& options);

}  // namespace distanova
