#pragma once

#include <span>

#include "distanova/core.hpp"
#include "distanova/distances.hpp"

namespace distanova::classical {

struct AnovaResult {
  double f = 0.0;
  double d1 = 0.0;  // G - 1
  double d2 = 0.0;  // N - G
  double p_value = 0.0;
};

struct HotellingResult {
  double t2 = 0.0;
  double f_equivalent = 0.0;  // (N-P-1) T^2 / ((N-2) P) ~ F_{P, N-P-1}
  double p_value = 0.0;
};

// Classical one-way ANOVA F with its exact null p-value.
AnovaResult anova_f(std::span<const double> y, const GroupAssignment& groups);

// F distribution CDF through the regularized incomplete beta.
double f_cdf(double x, double d1, double d2);

// Two-sample Hotelling's T^2 = N1 N2 (N-2) d' W^{-1} d / N with the exact
// F-distribution p-value; requires G = 2, N > P + 1 and nonsingular pooled W.
HotellingResult hotelling_t2(const VectorDataset& data, const GroupAssignment& groups);

// T^2 = (N-2) P F / (1 + (1-P) F), the monotone map from the DBF statistic
// under the total-metric distance.
double t2_from_dbf(double f_dt, int n, int p);

}  // namespace distanova::classical
