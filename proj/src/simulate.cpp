#include "distanova/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "distanova/classical.hpp"
#include "distanova/core.hpp"
#include "distanova/dbf.hpp"
#include "distanova/parallel.hpp"
#include "distanova/permutation.hpp"
#include "distanova/rng.hpp"

namespace distanova::simulate {

namespace {

constexpr std::uint64_t kTagData = 0x64617461ULL;
constexpr std::uint64_t kTagSkew = 0x736b6577ULL;
constexpr std::uint64_t kTagPerm = 0x7065726dULL;
constexpr std::uint64_t kTagPool = 0x706f6f6cULL;

std::vector<int> balanced_labels(int n, int g) {
  std::vector<int> labels(n);
  int idx = 0;
  for (int k = 0; k < g; ++k) {
    const int size = n / g + (k < n % g ? 1 : 0);
    for (int i = 0; i < size; ++i) labels[idx++] = k;
  }
  return labels;
}

void summarize(const std::vector<double>& abs_diffs, ComparisonResult& out) {
  const int n = static_cast<int>(abs_diffs.size());
  double mean = 0.0;
  for (double d : abs_diffs) mean += d;
  mean /= n;
  double var = 0.0;
  for (double d : abs_diffs) var += (d - mean) * (d - mean);
  out.mean_abs_diff = mean;
  out.sd_abs_diff = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  out.runs = n;
}

// Local quadratic least-squares fit over a centered window of raw samples,
// evaluated at the window center.
double local_quadratic(const std::vector<double>& t, const std::vector<double>& y,
                       int center, int half_width, double at) {
  const int lo = std::max(0, center - half_width);
  const int hi = std::min<int>(static_cast<int>(t.size()) - 1, center + half_width);
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, b0 = 0, b1 = 0, b2 = 0;
  for (int i = lo; i <= hi; ++i) {
    const double x = t[i] - at;
    const double x2 = x * x;
    s0 += 1.0;
    s1 += x;
    s2 += x2;
    s3 += x2 * x;
    s4 += x2 * x2;
    b0 += y[i];
    b1 += y[i] * x;
    b2 += y[i] * x2;
  }
  Eigen::Matrix3d m;
  m << s0, s1, s2, s1, s2, s3, s2, s3, s4;
  const Eigen::Vector3d rhs(b0, b1, b2);
  return m.ldlt().solve(rhs)(0);  // constant term = value at the center
}

}  // namespace

std::vector<double> gen_univariate_normal(int n, std::uint64_t run_seed) {
  SplitMix64 rng(run_seed);
  const double mu = -10.0 + 20.0 * rng.next_double();
  const double sigma2 = std::max(1e-6, 10.0 * rng.next_double());
  const double sigma = std::sqrt(sigma2);
  std::vector<double> y(n);
  for (auto& v : y) v = mu + sigma * rng.next_gaussian();
  return y;
}

VectorDataset gen_mvn_wishart(int n, int p, std::uint64_t run_seed) {
  SplitMix64 rng(run_seed);
  Eigen::RowVectorXd mu(p);
  for (int j = 0; j < p; ++j) mu(j) = -6.0 + 12.0 * rng.next_double();
  Eigen::MatrixXd factor(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) factor(i, j) = rng.next_gaussian();
  Eigen::MatrixXd y(n, p);
  Eigen::VectorXd z(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(j) = rng.next_gaussian();
    y.row(i) = mu + (factor * z).transpose();
  }
  return VectorDataset{std::move(y)};
}

double bezier_value(double y0, double y1, double y2, double t, double t_max) {
  const double s = t / t_max;
  return (1.0 - s) * (1.0 - s) * y0 + 2.0 * s * (1.0 - s) * y1 + s * s * y2;
}

CurveSet gen_bezier_curves(int n, std::uint64_t run_seed, int out_grid) {
  constexpr int kRaw = 1000;
  constexpr double kTMax = 48.0;
  SplitMix64 rng(run_seed);
  std::vector<double> raw_t(kRaw);
  for (int k = 0; k < kRaw; ++k) raw_t[k] = kTMax * k / (kRaw - 1.0);
  CurveSet curves;
  curves.grid.resize(out_grid);
  for (int k = 0; k < out_grid; ++k) curves.grid[k] = kTMax * k / (out_grid - 1.0);
  curves.values.resize(n, out_grid);
  std::vector<double> raw_y(kRaw);
  for (int i = 0; i < n; ++i) {
    const double y0 = -5.0 + 10.0 * rng.next_double();
    const double y1 = -5.0 + 10.0 * rng.next_double();
    const double y2 = -5.0 + 10.0 * rng.next_double();
    for (int k = 0; k < kRaw; ++k)
      raw_y[k] = bezier_value(y0, y1, y2, raw_t[k], kTMax) + rng.next_gaussian();
    for (int k = 0; k < out_grid; ++k) {
      const double at = curves.grid[k];
      const int center = static_cast<int>(std::lround(at / kTMax * (kRaw - 1)));
      curves.values(i, k) = local_quadratic(raw_t, raw_y, center, 25, at);
    }
  }
  return curves;
}

gwas::GenotypeMatrix synthetic_pool(int subjects, int snps, std::uint64_t seed) {
  SplitMix64 rng(seed);
  gwas::GenotypeMatrix pool;
  pool.subjects.resize(subjects);
  for (int i = 0; i < subjects; ++i) pool.subjects[i] = "S" + std::to_string(i);
  pool.snps.resize(snps);
  pool.counts.resize(static_cast<std::size_t>(subjects) * snps);
  for (int s = 0; s < snps; ++s) {
    pool.snps[s] = {"1", "snp" + std::to_string(s)};
    const double maf = 0.05 + 0.45 * rng.next_double();
    for (int i = 0; i < subjects; ++i) {
      const int count = (rng.next_double() < maf ? 1 : 0) + (rng.next_double() < maf ? 1 : 0);
      pool.counts[static_cast<std::size_t>(s) * subjects + i] =
          static_cast<std::int8_t>(count);
    }
  }
  pool.chromosome_ranges.emplace_back(0, snps);
  return pool;
}

GenotypeWindow gen_snp_resample(const gwas::GenotypeMatrix& pool, int n, int p,
                                std::uint64_t run_seed) {
  if (n > pool.n_subjects() || p > pool.n_snps())
    throw InvalidInput("gen_snp_resample: pool smaller than requested sample");
  SplitMix64 rng(run_seed);
  std::vector<std::int32_t> subject_idx(pool.n_subjects());
  std::iota(subject_idx.begin(), subject_idx.end(), 0);
  partial_shuffle(std::span<std::int32_t>(subject_idx), static_cast<std::size_t>(n), rng);
  std::vector<std::int32_t> snp_idx(pool.n_snps());
  std::iota(snp_idx.begin(), snp_idx.end(), 0);
  partial_shuffle(std::span<std::int32_t>(snp_idx), static_cast<std::size_t>(p), rng);
  GenotypeWindow window;
  window.n = n;
  window.p = p;
  window.counts.resize(static_cast<std::size_t>(n) * p);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < p; ++k) {
      const auto g = pool.at(subject_idx[i], snp_idx[k]);
      if (g < 0) throw InvalidInput("gen_snp_resample: pool contains missing calls");
      window.counts[static_cast<std::size_t>(i) * p + k] = g;
    }
  return window;
}

double ks_statistic(const std::vector<double>& cdf_a, const std::vector<double>& cdf_b) {
  if (cdf_a.size() != cdf_b.size() || cdf_a.empty())
    throw InvalidInput("ks_statistic: grids must match");
  double ks = 0.0;
  for (std::size_t i = 0; i < cdf_a.size(); ++i)
    ks = std::max(ks, std::abs(cdf_a[i] - cdf_b[i]));
  return ks;
}

ComparisonResult run_table1(const SimConfig& config, std::vector<RunRecord>* records) {
  if (config.runs < 1) throw InvalidInput("run_table1: runs must be >= 1");
  const bool univariate = config.scenario == Scenario::UnivariateNormal;
  if (!univariate && config.scenario != Scenario::MvnWishart)
    throw InvalidInput("run_table1: scenario must be univariate_normal or mvn_wishart");
  const int g = univariate ? config.g : 2;
  const GroupAssignment groups(balanced_labels(config.n, g));
  const auto projector = group_projector(groups);
  std::vector<double> p_approx(config.runs), p_ref(config.runs);
  parallel_chunks(
      static_cast<std::size_t>(config.runs), 1, config.threads,
      [&](std::size_t run, std::size_t, std::size_t) {
        const std::uint64_t data_seed = mix_seed(config.seed, kTagData, run);
        DbfOptions opt;
        opt.skew_draws = config.skew_draws;
        opt.seed = mix_seed(config.seed, kTagSkew, run);
        if (univariate) {
          const auto y = gen_univariate_normal(config.n, data_seed);
          Eigen::MatrixXd m(config.n, 1);
          for (int i = 0; i < config.n; ++i) m(i, 0) = y[i];
          const auto delta = pairwise_matrix(VectorDataset{m}, VectorMeasure::Euclidean);
          const auto outcome = run_dbf_test(gower_center(delta), groups, opt);
          p_approx[run] = outcome.p_value;
          p_ref[run] = classical::anova_f(y, groups).p_value;
        } else {
          const auto data = gen_mvn_wishart(config.n, config.p, data_seed);
          const auto delta = mahalanobis_metric(data, groups, MahalanobisKind::Total);
          const auto outcome = run_dbf_test(gower_center(delta), groups, opt);
          p_approx[run] = outcome.p_value;
          p_ref[run] = classical::hotelling_t2(data, groups).p_value;
        }
      });
  std::vector<double> abs_diffs(config.runs);
  for (int k = 0; k < config.runs; ++k) abs_diffs[k] = std::abs(p_approx[k] - p_ref[k]);
  ComparisonResult out;
  summarize(abs_diffs, out);
  if (records) {
    records->clear();
    for (int k = 0; k < config.runs; ++k)
      records->push_back(RunRecord{k, p_approx[k], p_ref[k]});
  }
  return out;
}

ComparisonResult run_table2(const SimConfig& config, const Table2Distance& distance,
                            std::vector<RunRecord>* records) {
  if (config.runs < 1) throw InvalidInput("run_table2: runs must be >= 1");
  const GroupAssignment groups(balanced_labels(config.n, 2));
  const auto projector = group_projector(groups);
  const bool exact = config.n <= 9;
  // shared pool for the SNP resampling scenario
  gwas::GenotypeMatrix pool;
  if (distance.genetic)
    pool = synthetic_pool(std::max(150, 2 * config.n), 500, mix_seed(config.seed, kTagPool));

  std::vector<double> p_approx(config.runs), p_ref(config.runs);
  parallel_chunks(
      static_cast<std::size_t>(config.runs), 1, config.threads,
      [&](std::size_t run, std::size_t, std::size_t) {
        for (std::uint64_t attempt = 0;; ++attempt) {
          if (attempt > 50)
            throw DegeneracyError("run_table2: persistent degenerate draws");
          const std::uint64_t data_seed = mix_seed(config.seed, kTagData, run, attempt);
          DistanceMatrix delta(Eigen::MatrixXd::Zero(1, 1));
          if (distance.vector) {
            SplitMix64 rng(data_seed);
            Eigen::MatrixXd y(config.n, config.p);
            for (int i = 0; i < config.n; ++i)
              for (int j = 0; j < config.p; ++j) y(i, j) = 2.0 * rng.next_gaussian();
            delta = pairwise_matrix(VectorDataset{std::move(y)}, *distance.vector);
          } else if (distance.genetic) {
            const auto window = gen_snp_resample(pool, config.n, 5, data_seed);
            delta = pairwise_matrix(window, *distance.genetic);
          } else if (distance.curve) {
            const auto curves = gen_bezier_curves(config.n, data_seed, 101);
            delta = pairwise_matrix(curves, *distance.curve);
          } else {
            throw InvalidInput("run_table2: no measure selected");
          }
          const auto gower = gower_center(delta);
          DbfOptions opt;
          opt.skew_backend = exact ? moments::SkewBackend::Enumerated
                                   : moments::SkewBackend::MonteCarlo;
          opt.skew_draws = config.skew_draws;
          opt.seed = mix_seed(config.seed, kTagSkew, run, attempt);
          DbfOutcome outcome;
          try {
            outcome = run_dbf_test(gower, groups, opt);
          } catch (const DegeneracyError&) {
            continue;  // redraw: point-mass permutation distribution
          }
          if (outcome.status != DbfStatus::Ok) continue;
          permutation::PermutationPlan plan;
          plan.mode = exact ? permutation::Mode::Exact : permutation::Mode::MonteCarlo;
          plan.n_pi = config.n_pi;
          plan.seed = mix_seed(config.seed, kTagPerm, run, attempt);
          const auto f_values = perm_F_values(gower, projector, plan);
          p_approx[run] = outcome.p_value;
          p_ref[run] = permutation::perm_pvalue(outcome.f_hat, f_values);
          break;
        }
      });
  std::vector<double> abs_diffs(config.runs);
  for (int k = 0; k < config.runs; ++k) abs_diffs[k] = std::abs(p_approx[k] - p_ref[k]);
  ComparisonResult out;
  summarize(abs_diffs, out);
  if (records) {
    records->clear();
    for (int k = 0; k < config.runs; ++k)
      records->push_back(RunRecord{k, p_approx[k], p_ref[k]});
  }
  return out;
}

Fig3Result run_fig3(const SimConfig& config) {
  Fig3Result result;
  result.budgets = {1000, 10000, 50000, 100000};
  const long max_budget = result.budgets.back();
  const GroupAssignment groups(balanced_labels(config.n, 2));
  const auto projector = group_projector(groups);

  // one fixed dataset; its approximate null is the object under study
  const auto y = gen_univariate_normal(config.n, mix_seed(config.seed, kTagData));
  Eigen::MatrixXd m(config.n, 1);
  for (int i = 0; i < config.n; ++i) m(i, 0) = y[i];
  const auto gower =
      gower_center(pairwise_matrix(VectorDataset{m}, VectorMeasure::Euclidean));
  DbfOptions opt;
  opt.skew_draws = config.skew_draws;
  opt.seed = mix_seed(config.seed, kTagSkew);
  const auto outcome = run_dbf_test(gower, groups, opt);
  if (outcome.status != DbfStatus::Ok)
    throw DegeneracyError("run_fig3: degenerate dataset");
  const auto& null = *outcome.null;

  // 1000 equally spaced points across the range of the approximate
  // distribution: its lower support edge (clipped at 0, where the exact
  // F-derived CDF starts) up to the 1 - 1e-6 quantile
  double f_lo = 0.0;
  if (!null.normal && null.gamma > 0.0) f_lo = std::max(0.0, null.alpha);
  double lo = f_lo, hi = std::max(1.0, f_lo + 1.0);
  while (pearson3::dbf_cdf(hi, null) < 1.0 - 1e-6) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pearson3::dbf_cdf(mid, null) < 1.0 - 1e-6 ? lo : hi) = mid;
  }
  const double f_hi = hi;
  const int grid_n = 1000;
  std::vector<double> grid(grid_n), cdf_exact(grid_n), cdf_approx(grid_n);
  const double df1 = groups.group_count() - 1.0;
  const double df2 = config.n - groups.group_count();
  for (int k = 0; k < grid_n; ++k) {
    grid[k] = f_lo + (f_hi - f_lo) * k / (grid_n - 1.0);
    cdf_exact[k] = classical::f_cdf(grid[k] * df2 / df1, df1, df2);
    cdf_approx[k] = pearson3::dbf_cdf(grid[k], null);
  }
  result.ks_reference = ks_statistic(cdf_approx, cdf_exact);

  result.ks_per_budget.assign(result.budgets.size(),
                              std::vector<double>(config.runs, 0.0));
  const detail::GroupedBSampler sampler(detail::ClassGower::from_gower(gower, nullptr),
                                        groups);
  parallel_chunks(
      static_cast<std::size_t>(config.runs), 1, config.threads,
      [&](std::size_t run, std::size_t, std::size_t) {
        permutation::PermutationPlan plan;
        plan.n_pi = max_budget;
        plan.seed = mix_seed(config.seed, kTagPerm, run);
        plan.include_identity = false;  // pure Monte Carlo permutation CDF
        auto f_values = perm_F_values(sampler, plan);
        for (std::size_t b = 0; b < result.budgets.size(); ++b) {
          std::vector<double> prefix(f_values.begin(),
                                     f_values.begin() + result.budgets[b]);
          std::sort(prefix.begin(), prefix.end());
          std::vector<double> ecdf(grid_n);
          for (int k = 0; k < grid_n; ++k)
            ecdf[k] = static_cast<double>(std::upper_bound(prefix.begin(), prefix.end(),
                                                           grid[k]) -
                                          prefix.begin()) /
                      static_cast<double>(prefix.size());
          result.ks_per_budget[b][run] = ks_statistic(ecdf, cdf_exact);
        }
      });
  return result;
}

void write_comparison_csv(const std::filesystem::path& path,
                          const std::vector<RunRecord>& records,
                          const ComparisonResult& summary) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "run_id,p_approx,p_reference,abs_diff\n";
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g\n", r.run_id, r.p_approx,
                  r.p_reference, std::abs(r.p_approx - r.p_reference));
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "summary,mean_abs_diff=%.10g,sd_abs_diff=%.10g,runs=%d\n",
                summary.mean_abs_diff, summary.sd_abs_diff, summary.runs);
  out << buf;
}

void write_fig3_csv(const std::filesystem::path& path, const Fig3Result& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "budget,run_id,ks\n";
  char buf[96];
  for (std::size_t b = 0; b < result.budgets.size(); ++b)
    for (std::size_t r = 0; r < result.ks_per_budget[b].size(); ++r) {
      std::snprintf(buf, sizeof buf, "%ld,%zu,%.10g\n", result.budgets[b], r,
                    result.ks_per_budget[b][r]);
      out << buf;
    }
  std::snprintf(buf, sizeof buf, "approx,-1,%.10g\n", result.ks_reference);
  out << buf;
}

}  // namespace distanova::simulate
