#pragma once

#include <Eigen/Dense>
#include <vector>

#include "distanova/errors.hpp"

namespace distanova {

// Group membership for N samples. Arbitrary integer labels are accepted and
// remapped to dense ids 0..G-1 in ascending label order; every group must be
// nonempty.
class GroupAssignment {
 public:
  explicit GroupAssignment(std::vector<int> labels);

  int n() const { return static_cast<int>(labels_.size()); }
  int group_count() const { return static_cast<int>(sizes_.size()); }
  // Dense ids in 0..G-1, one per sample.
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<int>& group_sizes() const { return sizes_; }

 private:
  std::vector<int> labels_;
  std::vector<int> sizes_;
};

// N x N symmetric nonnegative dissimilarity matrix with zero diagonal.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(Eigen::MatrixXd values);

  int n() const { return static_cast<int>(values_.rows()); }
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  Eigen::MatrixXd values_;
};

// Gower's centered inner product matrix; rows/columns sum to zero and the
// trace equals the total distance-based variability.
class GowerMatrix {
 public:
  explicit GowerMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {}

  int n() const { return static_cast<int>(values_.rows()); }
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  Eigen::MatrixXd values_;
};

// Centered idempotent block matrix encoding group membership; trace = G-1.
class GroupProjector {
 public:
  GroupProjector(Eigen::MatrixXd values, GroupAssignment groups)
      : values_(std::move(values)), groups_(std::move(groups)) {}

  int n() const { return static_cast<int>(values_.rows()); }
  const Eigen::MatrixXd& values() const { return values_; }
  const GroupAssignment& groups() const { return groups_; }

 private:
  Eigen::MatrixXd values_;
  GroupAssignment groups_;
};

struct VarianceDecomposition {
  double total = 0.0;
  double between = 0.0;
  double within = 0.0;
};

// G = C (-1/2 D∘D) C with C the centering matrix.
GowerMatrix gower_center(const DistanceMatrix& delta);

// blockdiag(J_{Ng}/Ng) - J_N/N, assembled by label lookup so unsorted label
// sequences are handled directly.
GroupProjector group_projector(const GroupAssignment& groups);

// T = tr(G), B = tr(H G), W = tr((I-H) G); compensated accumulation.
VarianceDecomposition variance_decomposition(const GowerMatrix& gower,
                                             const GroupProjector& projector);

// F = B / W; throws DegeneracyError when W == 0 (statistic diverges; callers
// report p = 0 by convention).
double dbf_statistic(const VarianceDecomposition& v);

}  // namespace distanova
