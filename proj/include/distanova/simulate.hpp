#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "distanova/distances.hpp"
#include "distanova/gwas_types.hpp"

namespace distanova::simulate {

enum class Scenario { UnivariateNormal, MvnWishart, SnpResample, BezierCurves };

struct SimConfig {
  Scenario scenario = Scenario::UnivariateNormal;
  int n = 100;
  int g = 2;
  int p = 1;
  int runs = 200;
  std::uint64_t seed = 0;
  int threads = 1;
  // Monte Carlo budgets for the reference permutation p-values and the
  // skewness backend of the approximate test.
  long n_pi = 10000;
  long skew_draws = 10000;
};

struct ComparisonResult {
  double mean_abs_diff = 0.0;
  double sd_abs_diff = 0.0;
  int runs = 0;
  std::vector<double> ks_values;  // run_fig3 only: KS per permutation budget
  std::vector<long> ks_budgets;
  double ks_reference = 0.0;      // KS of the approximate CDF itself
};

// One row per run plus a trailing summary row.
struct RunRecord {
  int run_id = 0;
  double p_approx = 0.0;
  double p_reference = 0.0;
};

// i.i.d. N(mu_k, sigma_k^2) scalar draws; mu_k ~ U(-10,10),
// sigma_k^2 ~ U(0,10) truncated at 1e-6 (the run seed fixes everything).
std::vector<double> gen_univariate_normal(int n, std::uint64_t run_seed);

// N_p(mu_k, Sigma_k) rows with mu entries U(-6,6) and Sigma_k = A A^T for a
// standard Gaussian P x P factor (Wishart, P degrees of freedom, identity
// scale).
VectorDataset gen_mvn_wishart(int n, int p, std::uint64_t run_seed);

// Random quadratic Bezier curves over t in [0,48], sampled at 1000 points
// with standard Gaussian noise and locally smoothed onto a common grid.
CurveSet gen_bezier_curves(int n, std::uint64_t run_seed, int out_grid = 201);

// Noise-free quadratic Bezier value at t (endpoints y0, y2; midpoint control
// y1); exposed so tests can pin the generator's curve family.
double bezier_value(double y0, double y1, double y2, double t, double t_max);

// n subjects and p SNP columns drawn uniformly without replacement.
GenotypeWindow gen_snp_resample(const gwas::GenotypeMatrix& pool, int n, int p,
                                std::uint64_t run_seed);

// Synthetic genotype pool (MAF ~ U(0.05, 0.5) per SNP, Hardy-Weinberg
// counts); stands in for real cohort controls in the resampling scenario.
gwas::GenotypeMatrix synthetic_pool(int subjects, int snps, std::uint64_t seed);

// max |a - b| over a common evaluation grid.
double ks_statistic(const std::vector<double>& cdf_a, const std::vector<double>& cdf_b);

// Approximate-vs-classical p-value comparison (univariate -> ANOVA;
// mvn_wishart -> Hotelling with the total-metric distance).
ComparisonResult run_table1(const SimConfig& config,
                            std::vector<RunRecord>* records = nullptr);

// Approximate vs permutation p-values under the null for one distance.
// Vector measures apply to real Gaussian data; genetic measures to resampled
// SNP windows; curve measures to Bezier curves. n <= 9 uses the exact
// permutation distribution, larger n uses n_pi Monte Carlo draws.
struct Table2Distance {
  std::string name;
  std::optional<VectorMeasure> vector;
  std::optional<GeneticMeasure> genetic;
  std::optional<CurveMeasure> curve;
};

ComparisonResult run_table2(const SimConfig& config, const Table2Distance& distance,
                            std::vector<RunRecord>* records = nullptr);

// Permutation-budget study: KS distances between the DBF permutation CDF and
// the exact ANOVA-F-derived CDF for nested budgets {1e3, 1e4, 5e4, 1e5},
// versus the approximate CDF's own KS (the reference line).
struct Fig3Result {
  std::vector<long> budgets;
  std::vector<std::vector<double>> ks_per_budget;  // [budget][run]
  double ks_reference = 0.0;
};

Fig3Result run_fig3(const SimConfig& config);

// CSV writers (one row per run plus a summary row; Fig. 3 long format).
void write_comparison_csv(const std::filesystem::path& path,
                          const std::vector<RunRecord>& records,
                          const ComparisonResult& summary);
void write_fig3_csv(const std::filesystem::path& path, const Fig3Result& result);

}  // namespace distanova::simulate
