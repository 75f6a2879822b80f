#include "distanova/distances.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "distanova/parallel.hpp"

namespace distanova {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* who) {
  if (a != b || a == 0)
    throw InvalidInput(std::string(who) + ": length mismatch or empty vectors");
}

void check_genotype(std::span<const std::int8_t> v, const char* who) {
  for (auto g : v)
    if (g < 0 || g > 2) throw InvalidInput(std::string(who) + ": entry outside {0,1,2}");
}

// Fills a symmetric zero-diagonal matrix from a pair kernel, parallel over
// rows; each entry is computed once, so the result is schedule-independent.
DistanceMatrix fill_pairwise(int n, int threads,
                             const std::function<double(int, int)>& kernel) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  parallel_chunks(static_cast<std::size_t>(n), 8, threads,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i)
                      for (std::size_t j = i + 1; j < static_cast<std::size_t>(n); ++j) {
                        const double v = kernel(static_cast<int>(i), static_cast<int>(j));
                        d(i, j) = v;
                        d(j, i) = v;
                      }
                  });
  return DistanceMatrix(std::move(d));
}

// Second derivative by central differences on a possibly nonuniform grid;
// endpoints reuse the adjacent interior value (one-sided second difference).
void second_derivative(std::span<const double> y, std::span<const double> t,
                       std::vector<double>& out) {
  const std::size_t m = y.size();
  out.resize(m);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double h1 = t[i] - t[i - 1];
    const double h2 = t[i + 1] - t[i];
    out[i] = 2.0 * (y[i - 1] * h2 - y[i] * (h1 + h2) + y[i + 1] * h1) /
             (h1 * h2 * (h1 + h2));
  }
  out[0] = out[1];
  out[m - 1] = out[m - 2];
}

double trapezoid(std::span<const double> f, std::span<const double> t) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i)
    s += 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]);
  return s;
}

double curvature_energy(std::span<const double> y, std::span<const double> t) {
  std::vector<double> dd;
  second_derivative(y, t, dd);
  for (auto& v : dd) v *= v;
  return trapezoid(dd, t);
}

// Min-max rescale of a sampled curve onto [0,1] x [0,1]; a constant curve
// maps to the 0.5 line.
void rescale_unit(std::span<const double> y, std::span<const double> t,
                  std::vector<double>& ys, std::vector<double>& ts) {
  const std::size_t m = y.size();
  ys.resize(m);
  ts.resize(m);
  const double t0 = t.front(), t1 = t.back();
  double lo = y[0], hi = y[0];
  for (double v : y) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = hi - lo;
  for (std::size_t i = 0; i < m; ++i) {
    ts[i] = (t[i] - t0) / (t1 - t0);
    ys[i] = range > 0.0 ? (y[i] - lo) / range : 0.5;
  }
}

double point_segment_dist_sq(double px, double py, double ax, double ay, double bx,
                             double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len_sq = dx * dx + dy * dy;
  double u = len_sq > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len_sq : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  const double ex = px - (ax + u * dx), ey = py - (ay + u * dy);
  return ex * ex + ey * ey;
}

// One-way squared visual deviation integrated over the unit time interval:
// at each sample of curve i, the exact minimum distance to curve j's
// piecewise-linear interpolant.
double visual_one_way(const std::vector<double>& ti, const std::vector<double>& yi,
                      const std::vector<double>& tj, const std::vector<double>& yj) {
  const std::size_t m = ti.size();
  std::vector<double> delta_sq(m);
  for (std::size_t k = 0; k < m; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s + 1 < tj.size(); ++s)
      best = std::min(best, point_segment_dist_sq(ti[k], yi[k], tj[s], yj[s], tj[s + 1],
                                                  yj[s + 1]));
    delta_sq[k] = best;
  }
  return trapezoid(delta_sq, ti);
}

}  // namespace

double vector_distance(std::span<const double> a, std::span<const double> b,
                       VectorMeasure measure) {
  check_lengths(a.size(), b.size(), "vector_distance");
  switch (measure) {
    case VectorMeasure::Euclidean: {
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
      return std::sqrt(s);
    }
    case VectorMeasure::Manhattan: {
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
      return s;
    }
    case VectorMeasure::Maximum: {
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s = std::max(s, std::abs(a[k] - b[k]));
      return s;
    }
    case VectorMeasure::Canberra: {
      // absolute values taken first; 0/0 terms contribute 0
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double x = std::abs(a[k]), y = std::abs(b[k]);
        if (x + y > 0.0) s += std::abs(x - y) / (x + y);
      }
      return s;
    }
    case VectorMeasure::BrayCurtis: {
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double x = std::abs(a[k]), y = std::abs(b[k]);
        num += std::abs(x - y);
        den += x + y;
      }
      return den > 0.0 ? num / den : 0.0;
    }
  }
  throw InvalidInput("vector_distance: unknown measure");
}

MatchCounts match_counts(std::span<const std::int8_t> a, std::span<const std::int8_t> b) {
  check_lengths(a.size(), b.size(), "match_counts");
  check_genotype(a, "match_counts");
  check_genotype(b, "match_counts");
  MatchCounts mc;
  mc.p = static_cast<int>(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) mc.m_plus += a[k] == b[k] ? 1 : 0;
  mc.m_minus = mc.p - mc.m_plus;
  return mc;
}

double genetic_distance(std::span<const std::int8_t> a, std::span<const std::int8_t> b,
                        GeneticMeasure measure) {
  check_lengths(a.size(), b.size(), "genetic_distance");
  if (measure == GeneticMeasure::Ibs) {
    check_genotype(a, "genetic_distance");
    check_genotype(b, "genetic_distance");
    // shared-allele score per SNP: 2 when equal, 1 when exactly one is
    // heterozygous, 0 for opposite homozygotes -- i.e. 2 - |a-b|
    int score = 0;
    for (std::size_t k = 0; k < a.size(); ++k) score += 2 - std::abs(a[k] - b[k]);
    return 1.0 - static_cast<double>(score) / (2.0 * static_cast<double>(a.size()));
  }
  const MatchCounts mc = match_counts(a, b);
  const double mp = mc.m_plus, mm = mc.m_minus, p = mc.p;
  switch (measure) {
    case GeneticMeasure::SimpleMatching:
      return 1.0 - mp / p;
    case GeneticMeasure::SokalSneath:
      return 1.0 - mp / (mp + 0.5 * mm);
    case GeneticMeasure::RogersTanimoto1:
      return 1.0 - mp / (mp + 2.0 * mm);
    case GeneticMeasure::Hamman1:
      throw InvalidInput("genetic_distance: Hamman I is cohort-relative; use hamman_distances");
    default:
      throw InvalidInput("genetic_distance: unknown measure");
  }
}

DistanceMatrix hamman_distances(const GenotypeWindow& window) {
  const int n = window.n;
  if (n < 2) throw InvalidInput("hamman_distances: requires N >= 2");
  Eigen::MatrixXd s_hi(n, n);
  double s_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    s_hi(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const MatchCounts mc = match_counts(window.row(i), window.row(j));
      const double s = static_cast<double>(mc.m_plus - mc.m_minus) / mc.p;
      s_hi(i, j) = s;
      s_hi(j, i) = s;
      s_min = std::min(s_min, s);
    }
  }
  const double shift = std::abs(s_min);
  double s_max = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) s_max = std::max(s_max, s_hi(i, j) + shift);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  if (s_max > 0.0) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double v = 1.0 - (s_hi(i, j) + shift) / s_max;
        d(i, j) = v;
        d(j, i) = v;
      }
  }
  return DistanceMatrix(std::move(d));
}

double functional_distance(std::span<const double> c1, std::span<const double> c2,
                           std::span<const double> grid, CurveMeasure measure) {
  check_lengths(c1.size(), c2.size(), "functional_distance");
  check_lengths(c1.size(), grid.size(), "functional_distance");
  if (grid.size() < 4) throw InvalidInput("functional_distance: requires M >= 4");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1]))
      throw InvalidInput("functional_distance: grid must be strictly increasing");
  switch (measure) {
    case CurveMeasure::L2: {
      std::vector<double> diff_sq(c1.size());
      for (std::size_t i = 0; i < c1.size(); ++i)
        diff_sq[i] = (c1[i] - c2[i]) * (c1[i] - c2[i]);
      return std::sqrt(trapezoid(diff_sq, grid));
    }
    case CurveMeasure::Curvature:
      return std::abs(curvature_energy(c1, grid) - curvature_energy(c2, grid));
    case CurveMeasure::VisualL2: {
      std::vector<double> y1, t1, y2, t2;
      rescale_unit(c1, grid, y1, t1);
      rescale_unit(c2, grid, y2, t2);
      return std::sqrt(visual_one_way(t1, y1, t2, y2) + visual_one_way(t2, y2, t1, y1));
    }
  }
  throw InvalidInput("functional_distance: unknown measure");
}

DistanceMatrix mahalanobis_metric(const VectorDataset& data, const GroupAssignment& groups,
                                  MahalanobisKind kind) {
  const int n = data.n();
  const int p = data.p();
  if (groups.n() != n) throw InvalidInput("mahalanobis_metric: label/data size mismatch");
  if (n <= p)
    throw DegeneracyError("mahalanobis_metric: singular metric (requires N > P)");
  Eigen::MatrixXd ssq = Eigen::MatrixXd::Zero(p, p);
  if (kind == MahalanobisKind::Total) {
    const Eigen::RowVectorXd mean = data.values.colwise().mean();
    const Eigen::MatrixXd centered = data.values.rowwise() - mean;
    ssq = centered.transpose() * centered;
  } else {
    const auto& labels = groups.labels();
    for (int g = 0; g < groups.group_count(); ++g) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(p);
      int ng = 0;
      for (int i = 0; i < n; ++i)
        if (labels[i] == g) {
          mean += data.values.row(i);
          ++ng;
        }
      mean /= ng;
      for (int i = 0; i < n; ++i)
        if (labels[i] == g) {
          const Eigen::RowVectorXd c = data.values.row(i) - mean;
          ssq += c.transpose() * c;
        }
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(ssq);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("mahalanobis_metric: singular metric matrix");
  // x -> L^{-1} x turns the metric into plain Euclidean distance
  const Eigen::MatrixXd transformed =
      llt.matrixL().solve(data.values.transpose()).transpose();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = (transformed.row(i) - transformed.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  return DistanceMatrix(std::move(d));
}

DistanceMatrix pairwise_matrix(const VectorDataset& data, VectorMeasure measure,
                               int threads) {
  const int n = data.n();
  if (!data.values.allFinite()) throw InvalidInput("pairwise_matrix: non-finite entry");
  std::vector<std::vector<double>> rows(n);
  for (int i = 0; i < n; ++i)
    rows[i].assign(data.values.row(i).begin(), data.values.row(i).end());
  return fill_pairwise(n, threads, [&](int i, int j) {
    return vector_distance(rows[i], rows[j], measure);
  });
}

DistanceMatrix pairwise_matrix(const GenotypeWindow& window, GeneticMeasure measure,
                               int threads) {
  if (measure == GeneticMeasure::Hamman1) return hamman_distances(window);
  return fill_pairwise(window.n, threads, [&](int i, int j) {
    return genetic_distance(window.row(i), window.row(j), measure);
  });
}

DistanceMatrix pairwise_matrix(const CurveSet& curves, CurveMeasure measure, int threads) {
  const int n = curves.n();
  std::vector<std::vector<double>> rows(n);
  for (int i = 0; i < n; ++i)
    rows[i].assign(curves.values.row(i).begin(), curves.values.row(i).end());
  if (measure == CurveMeasure::Curvature) {
    // the per-curve bending energy is all that enters the distance
    std::vector<double> energy(n);
    for (int i = 0; i < n; ++i) energy[i] = curvature_energy(rows[i], curves.grid);
    return fill_pairwise(n, threads,
                         [&](int i, int j) { return std::abs(energy[i] - energy[j]); });
  }
  return fill_pairwise(n, threads, [&](int i, int j) {
    return functional_distance(rows[i], rows[j], curves.grid, measure);
  });
}

}  // namespace distanova
