#pragma once

#include "distanova/errors.hpp"

namespace distanova::pearson3 {

// Skewness magnitude below which the standardized null is treated as the
// limiting standard Normal (the piecewise forms divide by gamma, and the
// Gamma shape 4/gamma^2 overflows).
constexpr double kNormalFallback = 1e-8;

// Density of the standardized Pearson type III variable with skewness gamma
// (mean 0, variance 1). Support [-2/g, inf) for g > 0, (-inf, -2/g] for
// g < 0; zero outside. Requires gamma != 0.
double pt3_pdf(double b, double gamma);

// CDF via the regularized incomplete gamma with shape 4/gamma^2 at
// 2(2 + gamma b)/gamma^2; clamps to 0/1 outside the support.
double pt3_cdf(double b, double gamma);

// Fitted approximate null of the DBF statistic.
struct DbfNull {
  double mu = 0.0;     // permutational mean of B
  double sigma = 0.0;  // permutational sd of B (> 0)
  double gamma = 0.0;  // permutational skewness of B
  double total = 0.0;  // T (fixed under permutation)
  double beta = 0.0;   // (T - mu) / sigma, the pole of h
  double alpha = 0.0;  // image of the support edge -2/gamma under h
  bool normal = false; // |gamma| < kNormalFallback

  // Validates sigma2 > 0 and total > mu; computes beta and alpha.
  static DbfNull fit(double mu, double sigma2, double gamma, double total);
};

// h: standardized B -> F and its inverse (poles at b = beta, f = -1).
double h_transform(double b, const DbfNull& null);
double h_inverse(double f, const DbfNull& null);

// alpha = (g mu - 2 s) / (g (T - mu) + 2 s); h_inverse(alpha) = -2/gamma.
double alpha_of(double mu, double sigma, double gamma, double total);

// Piecewise null CDF of F. Case selection: gamma > 0; gamma < 0 with
// alpha <= -1 (the pole beta lies inside the support); gamma < 0 with
// alpha > -1 (support maps onto (-1, alpha] with no discontinuity); Normal
// fallback for |gamma| below kNormalFallback.
double dbf_cdf(double f, const DbfNull& null);

// Change-of-variables density T / (sigma (1+f)^2) * f_B(h^{-1}(f)); zero
// outside the case support.
double dbf_pdf(double f, const DbfNull& null);

// One-sided p-value 1 - CDF(f_hat); larger F is evidence against the null.
double dbf_pvalue(double f_hat, const DbfNull& null);

}  // namespace distanova::pearson3
