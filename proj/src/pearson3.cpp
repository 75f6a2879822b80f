#include "distanova/pearson3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "distanova/special_functions.hpp"

namespace distanova::pearson3 {

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / 2.5066282746310005024;
}

}  // namespace

double pt3_pdf(double b, double gamma) {
  if (gamma == 0.0) throw InvalidInput("pt3_pdf: gamma must be nonzero");
  const double k = 4.0 / (gamma * gamma);
  const double u = 2.0 * (2.0 + gamma * b) / (gamma * gamma);
  if (u < 0.0) return 0.0;
  const double scale = 2.0 / std::abs(gamma);  // |du/db|
  if (u == 0.0) {
    if (k > 1.0) return 0.0;
    if (k == 1.0) return scale;
    return std::numeric_limits<double>::infinity();
  }
  const double log_pdf = (k - 1.0) * std::log(u) - u - sf::log_gamma(k);
  return scale * std::exp(log_pdf);
}

double pt3_cdf(double b, double gamma) {
  if (gamma == 0.0) throw InvalidInput("pt3_cdf: gamma must be nonzero");
  const double k = 4.0 / (gamma * gamma);
  const double u = 2.0 * (2.0 + gamma * b) / (gamma * gamma);
  if (gamma > 0.0) {
    if (u <= 0.0) return 0.0;
    return sf::gamma_p(k, u);
  }
  // support reversal: B = gamma U / 2 - 2/gamma with U ~ Gamma(k)
  if (u <= 0.0) return 1.0;
  return sf::gamma_q(k, u);
}

DbfNull DbfNull::fit(double mu, double sigma2, double gamma, double total) {
  if (!(sigma2 > 0.0))
    throw DegeneracyError("DbfNull: degenerate permutation distribution (sigma = 0)");
  if (!(total > 0.0)) throw DegeneracyError("DbfNull: total variability must be positive");
  if (!(total > mu))
    throw DegeneracyError("DbfNull: requires T > mu_B");
  DbfNull null;
  null.mu = mu;
  null.sigma = std::sqrt(sigma2);
  null.gamma = gamma;
  null.total = total;
  null.beta = (total - mu) / null.sigma;
  null.normal = std::abs(gamma) < kNormalFallback;
  null.alpha = null.normal ? -1.0 : alpha_of(mu, null.sigma, gamma, total);
  return null;
}

double h_transform(double b, const DbfNull& null) {
  const double denom = null.total - null.mu - null.sigma * b;
  if (denom == 0.0) throw DegeneracyError("h_transform: evaluation at the pole b = beta");
  return (null.mu + null.sigma * b) / denom;
}

double h_inverse(double f, const DbfNull& null) {
  if (f == -1.0) throw DegeneracyError("h_inverse: evaluation at the pole f = -1");
  return ((null.total - null.mu) * f - null.mu) / (null.sigma * (1.0 + f));
}

double alpha_of(double mu, double sigma, double gamma, double total) {
  const double denom = gamma * (total - mu) + 2.0 * sigma;
  if (denom == 0.0) throw DegeneracyError("alpha_of: zero denominator");
  return (gamma * mu - 2.0 * sigma) / denom;
}

double dbf_cdf(double f, const DbfNull& null) {
  if (std::isnan(f)) throw InvalidInput("dbf_cdf: NaN argument");
  const auto base_cdf = [&](double b) {
    return null.normal ? sf::normal_cdf(b) : pt3_cdf(b, null.gamma);
  };
  const double cdf_beta = base_cdf(null.beta);
  if (!null.normal && null.gamma < 0.0 && null.alpha > -1.0) {
    // no discontinuity inside the support: F ranges over (-1, alpha]
    if (f <= -1.0) return 0.0;
    if (std::isinf(f)) return 1.0;
    return clamp01(base_cdf(h_inverse(f, null)));
  }
  // gamma > 0, Normal, or gamma < 0 with alpha <= -1: the pole splits the
  // support and the two branches share one shifted form
  if (f == -1.0) return clamp01(1.0 - cdf_beta);
  if (std::isinf(f)) return f < 0.0 ? 0.0 : 1.0;
  if (f < -1.0) return clamp01(base_cdf(h_inverse(f, null)) - cdf_beta);
  return clamp01(1.0 + base_cdf(h_inverse(f, null)) - cdf_beta);
}

double dbf_pdf(double f, const DbfNull& null) {
  if (std::isnan(f) || std::isinf(f)) return 0.0;
  if (f == -1.0) return 0.0;
  const double b = h_inverse(f, null);
  const double density = null.normal ? normal_pdf(b) : pt3_pdf(b, null.gamma);
  if (density == 0.0 || std::isinf(density)) return density;
  const double jac = null.total / (null.sigma * (1.0 + f) * (1.0 + f));
  return jac * density;
}

double dbf_pvalue(double f_hat, const DbfNull& null) {
  return clamp01(1.0 - dbf_cdf(f_hat, null));
}

}  // namespace distanova::pearson3
