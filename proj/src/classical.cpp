#include "distanova/classical.hpp"

#include <cmath>
#include <vector>

#include "distanova/numeric.hpp"
#include "distanova/special_functions.hpp"

namespace distanova::classical {

AnovaResult anova_f(std::span<const double> y, const GroupAssignment& groups) {
  const int n = groups.n();
  const int g = groups.group_count();
  if (static_cast<int>(y.size()) != n) throw InvalidInput("anova_f: label/data size mismatch");
  if (g < 2) throw InvalidInput("anova_f: requires G >= 2");
  if (n <= g) throw InvalidInput("anova_f: requires N > G");
  const auto& labels = groups.labels();
  const auto& sizes = groups.group_sizes();
  std::vector<NeumaierSum> group_sum(g);
  NeumaierSum grand;
  for (int i = 0; i < n; ++i) {
    group_sum[labels[i]].add(y[i]);
    grand.add(y[i]);
  }
  const double grand_mean = grand.value() / n;
  std::vector<double> mean(g);
  NeumaierSum ssb;
  for (int k = 0; k < g; ++k) {
    mean[k] = group_sum[k].value() / sizes[k];
    const double d = mean[k] - grand_mean;
    ssb.add(sizes[k] * d * d);
  }
  NeumaierSum ssw;
  for (int i = 0; i < n; ++i) {
    const double d = y[i] - mean[labels[i]];
    ssw.add(d * d);
  }
  const double within = ssw.value();
  if (within == 0.0) throw DegeneracyError("anova_f: zero within-group variance");
  AnovaResult r;
  r.d1 = g - 1.0;
  r.d2 = n - static_cast<double>(g);
  r.f = (ssb.value() / r.d1) / (within / r.d2);
  r.p_value = 1.0 - f_cdf(r.f, r.d1, r.d2);
  return r;
}

double f_cdf(double x, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw InvalidInput("f_cdf: degrees of freedom must be positive");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return sf::beta_inc(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

HotellingResult hotelling_t2(const VectorDataset& data, const GroupAssignment& groups) {
  const int n = data.n();
  const int p = data.p();
  if (groups.n() != n) throw InvalidInput("hotelling_t2: label/data size mismatch");
  if (groups.group_count() != 2) throw InvalidInput("hotelling_t2: requires G = 2");
  if (n <= p + 1) throw DegeneracyError("hotelling_t2: requires N > P + 1");
  const auto& labels = groups.labels();
  const auto& sizes = groups.group_sizes();
  Eigen::RowVectorXd mean0 = Eigen::RowVectorXd::Zero(p);
  Eigen::RowVectorXd mean1 = Eigen::RowVectorXd::Zero(p);
  for (int i = 0; i < n; ++i)
    (labels[i] == 0 ? mean0 : mean1) += data.values.row(i);
  mean0 /= sizes[0];
  mean1 /= sizes[1];
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    const Eigen::RowVectorXd c = data.values.row(i) - (labels[i] == 0 ? mean0 : mean1);
    pooled += c.transpose() * c;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(pooled);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("hotelling_t2: singular pooled within-group matrix");
  const Eigen::VectorXd diff = (mean0 - mean1).transpose();
  const Eigen::VectorXd solved = llt.solve(diff);
  HotellingResult r;
  r.t2 = static_cast<double>(sizes[0]) * sizes[1] * (n - 2.0) * diff.dot(solved) / n;
  r.f_equivalent = (n - p - 1.0) * r.t2 / ((n - 2.0) * p);
  r.p_value = 1.0 - f_cdf(r.f_equivalent, p, n - p - 1.0);
  return r;
}

double t2_from_dbf(double f_dt, int n, int p) {
  const double denom = 1.0 + (1.0 - p) * f_dt;
  if (denom == 0.0) throw DegeneracyError("t2_from_dbf: pole in the monotone map");
  return (n - 2.0) * p * f_dt / denom;
}

}  // namespace distanova::classical
