#include "distanova/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>

#include "distanova/classical.hpp"
#include "distanova/core.hpp"
#include "distanova/distances.hpp"
#include "distanova/moments.hpp"
#include "distanova/parallel.hpp"
#include "distanova/pearson3.hpp"
#include "distanova/rng.hpp"
#include "distanova/special_functions.hpp"

namespace distanova::validation {

namespace {

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

double simpson(const std::function<double(double)>& f, double a, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        int panels, double tol) {
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + (b - a) * k / panels;
    const double hi = a + (b - a) * (k + 1) / panels;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson(f, lo, hi, fa, fm, fb, whole, tol, 36);
  }
  return total;
}

std::vector<int> random_labels(int n, int groups, SplitMix64& rng) {
  std::vector<int> labels(n);
  for (;;) {
    std::vector<int> count(groups, 0);
    for (int i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng.next_below(groups));
      ++count[labels[i]];
    }
    if (*std::min_element(count.begin(), count.end()) > 0) return labels;
  }
}

Eigen::MatrixXd gaussian_matrix(int rows, int cols, SplitMix64& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  return m;
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

CheckResult check_moment_oracle(int datasets, long mc_draws, double rel_tol,
                                std::uint64_t seed, int threads) {
  Timer timer;
  CheckResult result{"moment-oracle", true, "", 0.0};
  double worst_mu = 0.0, worst_sigma = 0.0, worst_gamma_z = 0.0;
  for (int rep = 0; rep < datasets && result.passed; ++rep) {
    // a draw whose permutation distribution is a point mass is replaced
    double mu_enum = 0.0, var_enum = 0.0, gamma_enum = 0.0, mu = 0.0, sigma2 = 0.0;
    GroupAssignment groups({0, 1});
    GowerMatrix gower(Eigen::MatrixXd::Zero(2, 2));
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt > 20) {
        result.passed = false;
        result.detail = format("dataset %d: persistent degenerate draws", rep);
        break;
      }
      SplitMix64 rng(mix_seed(seed, 0x6d6fULL, rep, attempt));
      const int n = 4 + static_cast<int>(rng.next_below(4));  // 4..7
      const int g = 2 + static_cast<int>(rng.next_below(std::min(3, n - 1)));
      const int p = 1 + static_cast<int>(rng.next_below(3));
      const auto y = gaussian_matrix(n, p, rng);
      const auto measure =
          rep % 2 == 0 ? VectorMeasure::Euclidean : VectorMeasure::Manhattan;
      gower = gower_center(pairwise_matrix(VectorDataset{y}, measure));
      groups = GroupAssignment(random_labels(n, g, rng));
      const auto projector = group_projector(groups);

      const auto values = moments::enumerate_B(projector, gower);
      long double sum = 0.0;
      for (double v : values) sum += v;
      mu_enum = static_cast<double>(sum / values.size());
      long double m2 = 0.0, m3 = 0.0;
      for (double v : values) {
        const long double d = v - mu_enum;
        m2 += d * d;
        m3 += d * d * d;
      }
      var_enum = static_cast<double>(m2 / values.size());
      std::tie(mu, sigma2) =
          moments::mean_variance(moments::trace_quantities(projector, gower),
                                 gower.n());
      if (var_enum <= 1e-20 || sigma2 <= 1e-20) continue;
      gamma_enum =
          static_cast<double>(m3 / values.size()) / (var_enum * std::sqrt(var_enum));
      break;
    }
    if (!result.passed) break;
    const int n = gower.n();
    (void)n;
    worst_mu = std::max(worst_mu, rel_diff(mu, mu_enum));
    worst_sigma = std::max(worst_sigma, rel_diff(sigma2, var_enum));
    if (rel_diff(mu, mu_enum) > rel_tol || rel_diff(sigma2, var_enum) > rel_tol) {
      result.passed = false;
      result.detail = format("dataset %d: closed-form moments off (mu %.3e, sigma2 %.3e)",
                             rep, rel_diff(mu, mu_enum), rel_diff(sigma2, var_enum));
      break;
    }
    moments::McConfig cfg;
    cfg.n_draws = mc_draws;
    cfg.seed = mix_seed(seed, 0x6d63ULL, rep);
    cfg.threads = threads;
    const auto mc = moments::mc_skewness(
        detail::GroupedBSampler(detail::ClassGower::from_gower(gower, nullptr), groups),
        mu, sigma2, cfg);
    (void)mu_enum;
    const double z = std::abs(mc.gamma - gamma_enum) / std::max(mc.std_error, 1e-300);
    worst_gamma_z = std::max(worst_gamma_z, z);
    if (z > 3.0) {
      result.passed = false;
      result.detail = format("dataset %d: MC skewness %.6f vs enumerated %.6f (%.2f se)",
                             rep, mc.gamma, gamma_enum, z);
    }
  }
  if (result.passed)
    result.detail =
        format("%d datasets: worst rel diff mu %.2e, sigma2 %.2e; worst gamma z %.2f",
               datasets, worst_mu, worst_sigma, worst_gamma_z);
  result.elapsed_seconds = timer.seconds();
  return result;
}

CheckResult check_anova_identity(int datasets, double rel_tol, std::uint64_t seed) {
  Timer timer;
  CheckResult result{"anova-identity", true, "", 0.0};
  double worst = 0.0;
  for (int rep = 0; rep < datasets && result.passed; ++rep) {
    SplitMix64 rng(mix_seed(seed, 0x616eULL, rep));
    const int n = 8 + static_cast<int>(rng.next_below(193));  // 8..200
    const int g = 2 + static_cast<int>(rng.next_below(5));    // 2..6
    std::vector<double> y(n);
    for (auto& v : y) v = 5.0 * rng.next_gaussian();
    const GroupAssignment groups(random_labels(n, g, rng));
    Eigen::MatrixXd m(n, 1);
    for (int i = 0; i < n; ++i) m(i, 0) = y[i];
    const auto gower =
        gower_center(pairwise_matrix(VectorDataset{std::move(m)}, VectorMeasure::Euclidean));
    const auto v = variance_decomposition(gower, group_projector(groups));
    const double f_scaled = dbf_statistic(v) * (n - g) / (g - 1.0);
    const double f_classical = classical::anova_f(y, groups).f;
    const double diff = std::abs(f_scaled - f_classical) /
                        std::max({1.0, std::abs(f_scaled), std::abs(f_classical)});
    worst = std::max(worst, diff);
    if (diff > rel_tol) {
      result.passed = false;
      result.detail = format("dataset %d (N=%d G=%d): rel diff %.3e", rep, n, g, diff);
    }
  }
  if (result.passed) result.detail = format("%d datasets: worst rel diff %.2e", datasets, worst);
  result.elapsed_seconds = timer.seconds();
  return result;
}

CheckResult check_hotelling_identity(int datasets, double rel_tol, std::uint64_t seed) {
  Timer timer;
  CheckResult result{"hotelling-identity", true, "", 0.0};
  double worst = 0.0;
  for (int rep = 0; rep < datasets && result.passed; ++rep) {
    SplitMix64 rng(mix_seed(seed, 0x6874ULL, rep));
    const int p = 1 + static_cast<int>(rng.next_below(8));           // 1..8
    const int n = std::max(p + 4, 12) + static_cast<int>(rng.next_below(40));  // <= ~60
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = i < n / 2 ? 0 : 1;
    const GroupAssignment groups(labels);
    const auto y = gaussian_matrix(n, p, rng);
    const auto delta = mahalanobis_metric(VectorDataset{y}, groups, MahalanobisKind::Total);
    const auto v = variance_decomposition(gower_center(delta), group_projector(groups));
    const double t2_via_dbf = classical::t2_from_dbf(dbf_statistic(v), n, p);
    const double t2_direct = classical::hotelling_t2(VectorDataset{y}, groups).t2;
    const double diff = std::abs(t2_via_dbf - t2_direct) /
                        std::max({1.0, std::abs(t2_via_dbf), std::abs(t2_direct)});
    worst = std::max(worst, diff);
    if (diff > rel_tol) {
      result.passed = false;
      result.detail = format("dataset %d (N=%d P=%d): rel diff %.3e", rep, n, p, diff);
    }
  }
  if (result.passed) result.detail = format("%d datasets: worst rel diff %.2e", datasets, worst);
  result.elapsed_seconds = timer.seconds();
  return result;
}

CheckResult check_cdf_validity(int parameter_sets, std::uint64_t seed, int threads) {
  Timer timer;
  CheckResult result{"cdf-validity", true, "", 0.0};
  std::vector<std::string> failures(parameter_sets);
  std::vector<int> case_seen(parameter_sets, -1);
  parallel_chunks(
      static_cast<std::size_t>(parameter_sets), 8, threads,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t rep = begin; rep < end; ++rep) {
          SplitMix64 rng(mix_seed(seed, 0x636466ULL, rep));
          const int target_case = static_cast<int>(rep % 3);
          const double total = 0.5 + 19.5 * rng.next_double();
          const double mu = total * (0.05 + 0.85 * rng.next_double());
          const double mag = 0.05 + 2.95 * rng.next_double();
          double gamma, sigma;
          if (target_case == 0) {
            gamma = mag;
            sigma = (total - mu) * (0.02 + 1.2 * rng.next_double());
          } else if (target_case == 1) {
            // negative skew with the pole inside the support: beta < 2/|gamma|
            gamma = -mag;
            sigma = (total - mu) * mag / 2.0 * (1.1 + 3.0 * rng.next_double());
          } else {
            // negative skew, support wholly below the pole: beta > 2/|gamma|
            gamma = -mag;
            sigma = (total - mu) * mag / 2.0 * (0.15 + 0.75 * rng.next_double());
          }
          const auto null = pearson3::DbfNull::fit(mu, sigma * sigma, gamma, total);
          case_seen[rep] = gamma > 0.0 ? 0 : (null.alpha <= -1.0 ? 1 : 2);
          auto fail = [&](const std::string& what) {
            if (failures[rep].empty())
              failures[rep] = format("set %zu (case %d): %s", rep, case_seen[rep],
                                     what.c_str());
          };
          // limits
          if (std::abs(pearson3::dbf_cdf(-1e160, null)) > 1e-8) fail("lower limit");
          if (std::abs(pearson3::dbf_cdf(1e160, null) - 1.0) > 1e-8) fail("upper limit");
          // monotone nondecreasing on a 10^4-point grid
          double prev = -1e-300;
          const double span = 12.0 + 2.0 * std::abs(null.alpha);
          for (int k = 0; k <= 10000; ++k) {
            const double f = -span + 2.0 * span * k / 10000.0;
            const double c = pearson3::dbf_cdf(f, null);
            if (c < prev - 1e-12) {
              fail(format("monotonicity at f=%.6g (drop %.3e)", f, prev - c));
              break;
            }
            prev = std::max(prev, c);
          }
          // right-continuity at the pole, at alpha and at random points: the
          // one-sided gap must vanish as the step shrinks (near a shape < 1
          // support edge it decays like h^k, while a genuine jump would not
          // decay at all)
          for (int probe = 0; probe < 5; ++probe) {
            double f0;
            if (probe == 0)
              f0 = -1.0;
            else if (probe == 1)
              f0 = null.alpha;
            else
              f0 = -6.0 + 12.0 * rng.next_double();
            // evaluating the CDF at the support edge carries O(eps^k)
            // cancellation fuzz in the Gamma argument; allow for it
            double edge_fuzz = 0.0;
            if (!null.normal) {
              const double k = 4.0 / (null.gamma * null.gamma);
              edge_fuzz = 3.0 * sf::gamma_p(k, 1e-14 / (null.gamma * null.gamma));
            }
            const double tol = 1e-8 + edge_fuzz;
            const double h = 1e-10 * std::max(1.0, std::abs(f0));
            const double at = pearson3::dbf_cdf(f0, null);
            const double gap_big = std::abs(pearson3::dbf_cdf(f0 + h, null) - at);
            if (gap_big <= tol) continue;
            const double gap_small = std::abs(pearson3::dbf_cdf(f0 + h / 16.0, null) - at);
            if (gap_small > std::max(tol, 0.55 * gap_big))
              fail(format("right-continuity at f=%.6g (gap %.3e -> %.3e)", f0, gap_big,
                          gap_small));
          }
          // pdf mass integrated along the standardized-B line, which covers
          // both f-branches in one pass; the test supplies its own analytic
          // transform jacobian h'(b) = T sigma / (T - mu - sigma b)^2, so a
          // wrong change of variables in dbf_pdf shows up as missing mass.
          double mass;
          const auto b_line_integrand = [&](double b) {
            const double denom = null.total - null.mu - null.sigma * b;
            if (denom == 0.0) return 0.0;  // measure-zero pole
            const double f = (null.mu + null.sigma * b) / denom;
            const double jac = null.total * null.sigma / (denom * denom);
            return pearson3::dbf_pdf(f, null) * jac;
          };
          if (null.normal) {
            mass = integrate_panels(b_line_integrand, -45.0, 45.0, 128, 1e-9);
          } else {
            // Gamma representation u in (0, inf), b = gamma u/2 - 2/gamma;
            // the sliver below u_cut (singular edge for shape < 1) is exact
            const double k = 4.0 / (null.gamma * null.gamma);
            const double u_cut = 1e-6;
            const double u_hi = k + 50.0 * std::sqrt(k) + 80.0;
            mass = sf::gamma_p(k, u_cut) +
                   integrate_panels(
                       [&](double u) {
                         const double b = null.gamma * u / 2.0 - 2.0 / null.gamma;
                         return b_line_integrand(b) * std::abs(null.gamma) / 2.0;
                       },
                       u_cut, u_hi, 160, 1e-9);
          }
          if (std::abs(mass - 1.0) > 1e-6) fail(format("pdf mass %.8f", mass));
        }
      });
  int counts[3] = {0, 0, 0};
  for (int c : case_seen)
    if (c >= 0) ++counts[c];
  for (const auto& f : failures)
    if (!f.empty()) {
      result.passed = false;
      result.detail = f;
      break;
    }
  if (result.passed)
    result.detail = format("%d sets (gamma>0: %d, gamma<0 split: %d, gamma<0 whole: %d)",
                           parameter_sets, counts[0], counts[1], counts[2]);
  result.elapsed_seconds = timer.seconds();
  return result;
}

CheckResult check_pt3_moments(double tol) {
  Timer timer;
  CheckResult result{"pt3-moments", true, "", 0.0};
  double worst = 0.0;
  for (double gamma : {0.1, 0.5, 1.5, 3.0, -0.1, -0.5, -1.5, -3.0}) {
    const double k = 4.0 / (gamma * gamma);
    const double u_hi = k + 50.0 * std::sqrt(k) + 80.0;
    // k >= 1 (|gamma| <= 2): bounded density, integrate directly in b.
    // k < 1: the density diverges at the support edge; substitute u = w^{1/k}
    // and account the sliver below the cut as (-2/gamma)^order times its
    // incomplete-gamma mass.
    auto moment = [&](int order) {
      if (k >= 1.0) {
        const double b_at_uhi = gamma * u_hi / 2.0 - 2.0 / gamma;
        const double lo = gamma > 0.0 ? -2.0 / gamma : b_at_uhi;
        const double hi = gamma > 0.0 ? b_at_uhi : -2.0 / gamma;
        return integrate_panels(
            [&](double b) { return std::pow(b, order) * pearson3::pt3_pdf(b, gamma); },
            lo, hi, 160, 1e-10);
      }
      const double u_cut = 1e-13;
      const double edge_mass = sf::gamma_p(k, u_cut);
      const double bulk = integrate_panels(
          [&](double w) {
            const double u = std::pow(w, 1.0 / k);
            const double b = gamma * u / 2.0 - 2.0 / gamma;
            const double jac =
                std::abs(gamma) / (2.0 * k) * std::pow(w, 1.0 / k - 1.0);
            const double pdf = pearson3::pt3_pdf(b, gamma);
            if (!std::isfinite(pdf)) return 0.0;
            return std::pow(b, order) * pdf * jac;
          },
          std::pow(u_cut, k), std::pow(u_hi, k), 128, 1e-10);
      return bulk + edge_mass * std::pow(-2.0 / gamma, order);
    };
    const double mass = moment(0);
    const double mean = moment(1);
    const double var = moment(2);
    const double skew = moment(3);
    worst = std::max({worst, std::abs(mass - 1.0), std::abs(mean), std::abs(var - 1.0),
                      std::abs(skew - gamma)});
    if (std::abs(mass - 1.0) > tol || std::abs(mean) > tol || std::abs(var - 1.0) > tol ||
        std::abs(skew - gamma) > tol) {
      result.passed = false;
      result.detail = format("gamma=%.2f: mass %.8f mean %.2e var %.8f skew %.6f", gamma,
                             mass, mean, var, skew);
      break;
    }
  }
  if (result.passed) result.detail = format("8 gamma values: worst deviation %.2e", worst);
  result.elapsed_seconds = timer.seconds();
  return result;
}

std::vector<CheckResult> run_all(std::uint64_t seed, int threads) {
  std::vector<CheckResult> results;
  results.push_back(check_moment_oracle(50, 1000000, 1e-10, seed, threads));
  results.push_back(check_anova_identity(100, 1e-9, seed));
  results.push_back(check_hotelling_identity(100, 1e-8, seed));
  results.push_back(check_cdf_validity(1000, seed, threads));
  results.push_back(check_pt3_moments(1e-6));
  return results;
}

}  // namespace distanova::validation
