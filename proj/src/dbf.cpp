#include "distanova/dbf.hpp"

#include <cmath>
#include <limits>

namespace distanova {

namespace {

// per-window scale below which T, W and sigma^2 are treated as zero
bool negligible(double value, double scale) {
  return std::abs(value) <= 1e-12 * std::max(1e-300, scale);
}

}  // namespace

DbfOutcome run_dbf_test(const detail::GroupedBSampler& sampler,
                        const GroupAssignment& groups, const DbfOptions& options) {
  const int n = groups.n();
  if (groups.group_count() < 2) throw InvalidInput("run_dbf_test: requires G >= 2");
  if (n < 7)
    throw InvalidInput("run_dbf_test: approximation path requires N >= 7");

  DbfOutcome out;
  const double total = sampler.total();
  const double between = sampler.observed_b();
  out.decomposition = VarianceDecomposition{total, between, total - between};

  if (negligible(total, std::abs(between))) {
    out.status = DbfStatus::DegenerateNull;
    out.p_value = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  if (negligible(out.decomposition.within, total)) {
    out.status = DbfStatus::DegenerateWithin;
    out.f_hat = std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    return out;
  }
  out.f_hat = out.decomposition.between / out.decomposition.within;

  double a1, a2, a3, b1, b2, b3;
  moments::projector_trace_quantities(groups.group_sizes(), n, a1, a2, a3);
  sampler.class_gower().trace_quantities(b1, b2, b3);
  const auto [mu, sigma2] =
      moments::mean_variance(moments::TraceQuantities{a1, a2, a3, b1, b2, b3}, n);
  out.moments.mu = mu;
  out.moments.sigma2 = sigma2;
  out.moments.backend = options.skew_backend;
  if (negligible(sigma2, total * total / ((n - 1.0) * (n - 1.0)))) {
    out.status = DbfStatus::DegenerateNull;
    out.moments.degenerate = true;
    out.p_value = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  if (options.skew_backend == moments::SkewBackend::Enumerated) {
    const auto est = moments::enumerated_skewness_grouped(sampler, groups);
    out.moments.gamma = est.gamma;
  } else {
    moments::McConfig cfg;
    cfg.n_draws = options.skew_draws;
    cfg.seed = options.seed;
    cfg.threads = options.threads;
    const auto est = moments::mc_skewness(sampler, mu, sigma2, cfg);
    out.moments.gamma = est.gamma;
    out.moments.gamma_se = est.std_error;
  }

  out.null = pearson3::DbfNull::fit(mu, sigma2, out.moments.gamma, total);
  double p = pearson3::dbf_pvalue(out.f_hat, *out.null);
  // the fitted tail is strictly positive; keep p representable for -log10
  if (p <= 0.0) p = std::numeric_limits<double>::min();
  out.p_value = p;
  return out;
}

DbfOutcome run_dbf_test(const GowerMatrix& gower, const GroupAssignment& groups,
                        const DbfOptions& options) {
  const detail::GroupedBSampler sampler(detail::ClassGower::from_gower(gower, nullptr),
                                        groups);
  return run_dbf_test(sampler, groups, options);
}

}  // namespace distanova
