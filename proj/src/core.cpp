#include "distanova/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "distanova/numeric.hpp"

namespace distanova {

GroupAssignment::GroupAssignment(std::vector<int> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw InvalidInput("group assignment: no samples");
  std::map<int, int> remap;
  for (int raw : labels_) remap.emplace(raw, 0);
  int next_id = 0;
  for (auto& [raw, id] : remap) id = next_id++;
  sizes_.assign(remap.size(), 0);
  for (int& raw : labels_) {
    raw = remap.at(raw);
    ++sizes_[raw];
  }
  for (std::size_t g = 0; g < sizes_.size(); ++g)
    if (sizes_[g] == 0) throw InvalidInput("group assignment: empty group");
}

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  const auto n = values_.rows();
  if (n == 0 || values_.cols() != n)
    throw InvalidInput("distance matrix: must be square and nonempty");
  const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(values_(i, i)) > 1e-12 * scale)
      throw InvalidInput("distance matrix: nonzero diagonal");
    values_(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (values_(i, j) < 0.0 || values_(j, i) < 0.0)
        throw InvalidInput("distance matrix: negative entry");
      if (std::abs(values_(i, j) - values_(j, i)) > 1e-12 * scale)
        throw InvalidInput("distance matrix: not symmetric");
    }
  }
}

GowerMatrix gower_center(const DistanceMatrix& delta) {
  const int n = delta.n();
  if (n < 2) throw InvalidInput("gower_center: requires N >= 2");
  // Squared distances are formed once; every downstream quantity consumes
  // only D∘D.
  const Eigen::MatrixXd sq = delta.values().array().square();
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const double grand_mean = row_mean.mean();
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g(i, j) = -0.5 * (sq(i, j) - row_mean(i) - row_mean(j) + grand_mean);
  return GowerMatrix(std::move(g));
}

GroupProjector group_projector(const GroupAssignment& groups) {
  const int n = groups.n();
  if (n < 2) throw InvalidInput("group_projector: requires N >= 2");
  const auto& labels = groups.labels();
  const auto& sizes = groups.group_sizes();
  Eigen::MatrixXd h = Eigen::MatrixXd::Constant(n, n, -1.0 / n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (labels[i] == labels[j]) h(i, j) += 1.0 / sizes[labels[i]];
  return GroupProjector(std::move(h), groups);
}

VarianceDecomposition variance_decomposition(const GowerMatrix& gower,
                                             const GroupProjector& projector) {
  const int n = gower.n();
  if (projector.n() != n)
    throw InvalidInput("variance_decomposition: dimension mismatch");
  const auto& g = gower.values();
  const auto& h = projector.values();
  NeumaierSum total, between, within;
  for (int i = 0; i < n; ++i) {
    total.add(g(i, i));
    for (int j = 0; j < n; ++j) {
      // tr(H G) = sum_ij h_ij g_ij for symmetric G
      between.add(h(i, j) * g(i, j));
      within.add(((i == j ? 1.0 : 0.0) - h(i, j)) * g(i, j));
    }
  }
  return VarianceDecomposition{total.value(), between.value(), within.value()};
}

double dbf_statistic(const VarianceDecomposition& v) {
  if (v.within == 0.0)
    throw DegeneracyError("dbf_statistic: zero within-group variability");
  return v.between / v.within;
}

}  // namespace distanova
