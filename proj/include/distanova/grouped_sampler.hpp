#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "distanova/core.hpp"
#include "distanova/numeric.hpp"
#include "distanova/rng.hpp"

namespace distanova::detail {

// Packed dot product via Eigen's fixed reduction kernel; the evaluation
// order is a compile-time constant, so results are bit-stable for a given
// build regardless of the thread count.
inline double dot_packed(const double* a, const double* b, int n) {
  return Eigen::Map<const Eigen::VectorXd>(a, n).dot(
      Eigen::Map<const Eigen::VectorXd>(b, n));
}

// Gower matrix reduced to equivalence classes of subjects with identical
// data rows (e.g. identical genotype profiles). All rows within a class are
// equal, including the diagonal entry, so quadratic forms over subject
// subsets collapse to quadratic forms over class counts. With all-singleton
// classes this is just the subject-level matrix.
struct ClassGower {
  int n_subjects = 0;
  int n_classes = 0;
  std::vector<double> gamma;         // R x R row-major class-level Gower values
  std::vector<int> class_size;       // subjects per class
  std::vector<std::int32_t> class_of;  // subject -> class
  std::vector<double> class_rowsum;  // sum over all subjects b of g(a_r, b)
  double total_sum = 0.0;            // sum_ab g_ab (zero up to roundoff)
  double trace = 0.0;                // T = sum_r n_r gamma_rr

  double at(int r, int s) const { return gamma[static_cast<std::size_t>(r) * n_classes + s]; }

  // Collapses a subject-level Gower matrix. class_ids == nullptr treats every
  // subject as its own class.
  static ClassGower from_gower(const GowerMatrix& g,
                               const std::vector<std::int32_t>* class_ids);

  // Double-centers class-level squared distances directly (never forming the
  // N x N matrix). d2[r*R+s] = squared distance between class representatives.
  static ClassGower from_squared_distances(const std::vector<double>& d2,
                                           std::vector<int> class_size,
                                           std::vector<std::int32_t> class_of);

  // b1 = tr(G), b2 = sum_ij g_ij^2, b3 = sum_i g_ii^2, subject-weighted.
  void trace_quantities(double& b1, double& b2, double& b3) const;
};

inline ClassGower ClassGower::from_gower(const GowerMatrix& g,
                                         const std::vector<std::int32_t>* class_ids) {
  const int n = g.n();
  ClassGower cg;
  cg.n_subjects = n;
  if (class_ids == nullptr) {
    cg.class_of.resize(n);
    std::iota(cg.class_of.begin(), cg.class_of.end(), 0);
    cg.class_size.assign(n, 1);
    cg.n_classes = n;
  } else {
    if (static_cast<int>(class_ids->size()) != n)
      throw InvalidInput("ClassGower: class id size mismatch");
    cg.class_of = *class_ids;
    const int r = 1 + *std::max_element(cg.class_of.begin(), cg.class_of.end());
    cg.class_size.assign(r, 0);
    for (auto c : cg.class_of) ++cg.class_size[c];
    cg.n_classes = r;
  }
  const int r = cg.n_classes;
  for (int c = 0; c < r; ++c)
    if (cg.class_size[c] == 0) throw InvalidInput("ClassGower: class ids must be dense");
  std::vector<int> rep(r, -1);
  for (int i = 0; i < n; ++i)
    if (rep[cg.class_of[i]] < 0) rep[cg.class_of[i]] = i;
  cg.gamma.resize(static_cast<std::size_t>(r) * r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) cg.gamma[static_cast<std::size_t>(a) * r + b] = g.values()(rep[a], rep[b]);
  cg.class_rowsum.assign(r, 0.0);
  NeumaierSum tau, tr;
  for (int a = 0; a < r; ++a) {
    NeumaierSum rs;
    for (int b = 0; b < r; ++b) rs.add(cg.class_size[b] * cg.at(a, b));
    cg.class_rowsum[a] = rs.value();
    tau.add(cg.class_size[a] * cg.class_rowsum[a]);
    tr.add(cg.class_size[a] * cg.at(a, a));
  }
  cg.total_sum = tau.value();
  cg.trace = tr.value();
  return cg;
}

inline ClassGower ClassGower::from_squared_distances(const std::vector<double>& d2,
                                                     std::vector<int> class_size,
                                                     std::vector<std::int32_t> class_of) {
  ClassGower cg;
  cg.n_classes = static_cast<int>(class_size.size());
  cg.n_subjects = static_cast<int>(class_of.size());
  cg.class_size = std::move(class_size);
  cg.class_of = std::move(class_of);
  const int r = cg.n_classes;
  const double n = cg.n_subjects;
  std::vector<double> row_mean(r, 0.0);
  for (int a = 0; a < r; ++a) {
    NeumaierSum rs;
    for (int b = 0; b < r; ++b)
      rs.add(cg.class_size[b] * d2[static_cast<std::size_t>(a) * r + b]);
    row_mean[a] = rs.value() / n;
  }
  NeumaierSum gm;
  for (int a = 0; a < r; ++a) gm.add(cg.class_size[a] * row_mean[a]);
  const double grand_mean = gm.value() / n;
  cg.gamma.resize(static_cast<std::size_t>(r) * r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      cg.gamma[static_cast<std::size_t>(a) * r + b] =
          -0.5 * (d2[static_cast<std::size_t>(a) * r + b] - row_mean[a] - row_mean[b] +
                  grand_mean);
  cg.class_rowsum.assign(r, 0.0);
  NeumaierSum tau, tr;
  for (int a = 0; a < r; ++a) {
    NeumaierSum rs;
    for (int b = 0; b < r; ++b) rs.add(cg.class_size[b] * cg.at(a, b));
    cg.class_rowsum[a] = rs.value();
    tau.add(cg.class_size[a] * cg.class_rowsum[a]);
    tr.add(cg.class_size[a] * cg.at(a, a));
  }
  cg.total_sum = tau.value();
  cg.trace = tr.value();
  return cg;
}

inline void ClassGower::trace_quantities(double& b1, double& b2, double& b3) const {
  const int r = n_classes;
  NeumaierSum s1, s2, s3;
  for (int a = 0; a < r; ++a) {
    const double gaa = at(a, a);
    s1.add(class_size[a] * gaa);
    s3.add(class_size[a] * gaa * gaa);
    for (int b = 0; b < r; ++b) {
      const double v = at(a, b);
      s2.add(static_cast<double>(class_size[a]) * class_size[b] * v * v);
    }
  }
  b1 = s1.value();
  b2 = s2.value();
  b3 = s3.value();
}

// Draws B = tr(H_c G_pi) under uniform random simultaneous relabelings.
// Groups are laid out in fixed segments over a subject index array; each draw
// Fisher-Yates-shuffles the prefix covering every segment except the largest
// group, which takes the remaining tail. The inner sum runs either over class
// counts (dense R x R quadratic form) or over subject index gathers,
// whichever is cheaper for the window; both orderings consume the generator
// identically.
class GroupedBSampler {
 public:
  struct Scratch {
    std::vector<std::int32_t> idx;      // subject permutation state
    std::vector<double> counts;         // class counts of one group
    std::vector<double> product;        // Gamma * counts
    std::vector<std::int32_t> cls;      // subject -> class scratch
  };

  GroupedBSampler(ClassGower cg, const GroupAssignment& groups)
      : cg_(std::move(cg)), sizes_(groups.group_sizes()) {
    const int n = cg_.n_subjects;
    if (groups.n() != n) throw InvalidInput("GroupedBSampler: label size mismatch");
    const int g = static_cast<int>(sizes_.size());
    int tail = 0;
    for (int k = 1; k < g; ++k)
      if (sizes_[k] >= sizes_[tail]) tail = k;
    tail_group_ = tail;
    prefix_len_ = n - sizes_[tail];
    segment_group_.clear();
    for (int k = 0; k < g; ++k)
      if (k != tail) segment_group_.push_back(k);
    segment_group_.push_back(tail);
    // cost heuristic: the dense path does one full R x R matrix-vector
    // product per segment, the subject path does ~ng^2/2 random gathers
    // (roughly 10 dense multiply-adds each); the largest group of a
    // two-group design is free either way via the complement identity
    constexpr double kGatherWeight = 10.0;
    double subject_cost = 0.0, class_cost = 0.0;
    const double r = cg_.n_classes;
    for (int k = 0; k < g; ++k) {
      const double ng = sizes_[k];
      if (g == 2 && k == tail) continue;
      subject_cost += kGatherWeight * 0.5 * ng * (ng + 1.0);
      class_cost += r * r;
    }
    use_class_counts_ = class_cost < subject_cost;
    observed_b_ = observed_from_labels(groups.labels());
  }

  int n() const { return cg_.n_subjects; }
  double total() const { return cg_.trace; }
  double observed_b() const { return observed_b_; }
  const ClassGower& class_gower() const { return cg_; }
  bool uses_class_counts() const { return use_class_counts_; }

  Scratch make_scratch() const {
    Scratch s;
    s.idx.resize(cg_.n_subjects);
    std::iota(s.idx.begin(), s.idx.end(), 0);
    s.counts.assign(cg_.n_classes, 0.0);
    s.product.assign(cg_.n_classes, 0.0);
    s.cls.reserve(cg_.n_subjects);
    return s;
  }

  double draw_b(SplitMix64& rng, Scratch& s) const {
    const int n = cg_.n_subjects;
    {
      // Fisher-Yates over the prefix covering every segment but the tail
      std::int32_t* idx = s.idx.data();
      for (int i = 0; i < prefix_len_ && i + 1 < n; ++i) {
        const auto j = i + static_cast<int>(rng.next_below(n - i));
        std::swap(idx[i], idx[j]);
      }
    }
    const int g = static_cast<int>(sizes_.size());
    double b = -cg_.total_sum / n;
    double first_quad = 0.0, first_rowsum = 0.0;
    int offset = 0;
    for (int seg = 0; seg < g; ++seg) {
      const int group = segment_group_[seg];
      const int ng = sizes_[group];
      if (g == 2 && seg == 1) {
        // complement identity: s2 = tau - 2 * sum_{a in S1} rowsum_a + s1
        const double s2 = cg_.total_sum - 2.0 * first_rowsum + first_quad;
        b += s2 / ng;
        break;
      }
      double quad, rowsum;
      group_sums(s, offset, ng, quad, rowsum);
      b += quad / ng;
      if (seg == 0) {
        first_quad = quad;
        first_rowsum = rowsum;
      }
      offset += ng;
    }
    return b;
  }

 private:
  void group_sums(Scratch& s, int offset, int ng, double& quad, double& rowsum) const {
    const std::int32_t* idx = s.idx.data() + offset;
    const int r = cg_.n_classes;
    if (use_class_counts_) {
      double* cnt = s.counts.data();
      std::fill(cnt, cnt + r, 0.0);
      for (int k = 0; k < ng; ++k) cnt[cg_.class_of[idx[k]]] += 1.0;
      // one matrix-vector product per draw: q = c' Gamma c
      Eigen::Map<Eigen::VectorXd>(s.product.data(), r).noalias() =
          Eigen::Map<const Eigen::MatrixXd>(cg_.gamma.data(), r, r) *
          Eigen::Map<const Eigen::VectorXd>(cnt, r);
      quad = dot_packed(cnt, s.product.data(), r);
      rowsum = dot_packed(cnt, cg_.class_rowsum.data(), r);
    } else {
      const double* gm = cg_.gamma.data();
      // resolve subject -> class once so the pair loop has one indirection
      s.cls.resize(static_cast<std::size_t>(ng));
      std::int32_t* cls = s.cls.data();
      for (int k = 0; k < ng; ++k) cls[k] = cg_.class_of[idx[k]];
      double q = 0.0, rs = 0.0;
      for (int k = 0; k < ng; ++k) {
        const std::int32_t a = cls[k];
        const double* row = gm + static_cast<std::size_t>(a) * r;
        double p0 = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;
        int l = 0;
        for (; l + 4 <= k; l += 4) {
          p0 += row[cls[l]];
          p1 += row[cls[l + 1]];
          p2 += row[cls[l + 2]];
          p3 += row[cls[l + 3]];
        }
        double partial = (p0 + p1) + (p2 + p3);
        for (; l < k; ++l) partial += row[cls[l]];
        q += 2.0 * partial + row[a];
        rs += cg_.class_rowsum[a];
      }
      quad = q;
      rowsum = rs;
    }
  }

  double observed_from_labels(const std::vector<int>& labels) const {
    const int n = cg_.n_subjects;
    const int g = static_cast<int>(sizes_.size());
    const int r = cg_.n_classes;
    std::vector<double> counts(static_cast<std::size_t>(g) * r, 0.0);
    for (int i = 0; i < n; ++i)
      counts[static_cast<std::size_t>(labels[i]) * r + cg_.class_of[i]] += 1.0;
    NeumaierSum b;
    b.add(-cg_.total_sum / n);
    for (int k = 0; k < g; ++k) {
      const double* cnt = counts.data() + static_cast<std::size_t>(k) * r;
      NeumaierSum q;
      for (int a = 0; a < r; ++a) {
        if (cnt[a] == 0.0) continue;
        double dot = 0.0;
        for (int bb = 0; bb < r; ++bb) dot += cg_.at(a, bb) * cnt[bb];
        q.add(cnt[a] * dot);
      }
      b.add(q.value() / sizes_[k]);
    }
    return b.value();
  }

  ClassGower cg_;
  std::vector<int> sizes_;
  std::vector<int> segment_group_;
  int tail_group_ = 0;
  int prefix_len_ = 0;
  bool use_class_counts_ = false;
  double observed_b_ = 0.0;
};

}  // namespace distanova::detail
