#pragma once

namespace distanova::sf {

// log Gamma(x) for x > 0 (Lanczos).
double log_gamma(double x);

// Regularized lower/upper incomplete gamma P(a,x), Q(a,x) = 1 - P(a,x).
// Series / continued fraction for a < 100, Gauss-Legendre quadrature above.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a,b), continued fraction with the
// symmetry switch at x = (a+1)/(a+b+2).
double beta_inc(double a, double b, double x);

// Standard normal CDF.
double normal_cdf(double x);

}  // namespace distanova::sf
