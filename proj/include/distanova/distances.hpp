#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "distanova/core.hpp"

namespace distanova {

struct VectorDataset {
  Eigen::MatrixXd values;  // N x P

  int n() const { return static_cast<int>(values.rows()); }
  int p() const { return static_cast<int>(values.cols()); }
};

// Minor-allele counts; every entry must be 0, 1 or 2 (missing values are
// resolved upstream).
struct GenotypeWindow {
  int n = 0;
  int p = 0;
  std::vector<std::int8_t> counts;  // row-major N x P

  std::span<const std::int8_t> row(int i) const {
    return {counts.data() + static_cast<std::size_t>(i) * p, static_cast<std::size_t>(p)};
  }
};

// N curves sampled on a common strictly increasing grid; M >= 4 so second
// differences are defined.
struct CurveSet {
  std::vector<double> grid;  // length M
  Eigen::MatrixXd values;    // N x M

  int n() const { return static_cast<int>(values.rows()); }
  int m() const { return static_cast<int>(grid.size()); }
};

struct MatchCounts {
  int m_plus = 0;   // complete matches
  int m_minus = 0;  // mismatches
  int p = 0;        // comparisons
};

enum class VectorMeasure { Euclidean, Manhattan, Maximum, Canberra, BrayCurtis };
enum class GeneticMeasure { Ibs, SimpleMatching, SokalSneath, RogersTanimoto1, Hamman1 };
enum class CurveMeasure { L2, Curvature, VisualL2 };
enum class MahalanobisKind { Total, Within };

double vector_distance(std::span<const double> a, std::span<const double> b,
                       VectorMeasure measure);

MatchCounts match_counts(std::span<const std::int8_t> a, std::span<const std::int8_t> b);

double genetic_distance(std::span<const std::int8_t> a, std::span<const std::int8_t> b,
                        GeneticMeasure measure);

// Cohort-relative Hamman I: similarities are shifted by |min| over all pairs
// and normalized by the shifted maximum; an all-equal cohort yields zeros.
DistanceMatrix hamman_distances(const GenotypeWindow& window);

double functional_distance(std::span<const double> c1, std::span<const double> c2,
                           std::span<const double> grid, CurveMeasure measure);

// Pairwise distances through the inverse total (T) or pooled within-group (W)
// sum-of-squares matrix. Fails on singular metrics; no pseudo-inverse.
DistanceMatrix mahalanobis_metric(const VectorDataset& data, const GroupAssignment& groups,
                                  MahalanobisKind kind);

DistanceMatrix pairwise_matrix(const VectorDataset& data, VectorMeasure measure,
                               int threads = 1);
DistanceMatrix pairwise_matrix(const GenotypeWindow& window, GeneticMeasure measure,
                               int threads = 1);
DistanceMatrix pairwise_matrix(const CurveSet& curves, CurveMeasure measure,
                               int threads = 1);

}  // namespace distanova
