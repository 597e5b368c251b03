#include "srad/clustering.hpp"

#include <cmath>
#include <limits>

namespace srad {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

struct Run {
  std::vector<int> labels;
  std::vector<double> c0, c1;
  double sse = std::numeric_limits<double>::infinity();
  bool collapsed = false;  // all points identical
};

void compute_centers(const Matrix& pts, const std::vector<int>& labels,
                     std::vector<double>& c0, std::vector<double>& c1,
                     std::size_t& n0, std::size_t& n1) {
  const std::size_t d = pts.cols;
  c0.assign(d, 0.0);
  c1.assign(d, 0.0);
  n0 = n1 = 0;
  for (std::size_t i = 0; i < pts.rows; ++i) {
    auto& c = labels[i] == 0 ? c0 : c1;
    (labels[i] == 0 ? n0 : n1) += 1;
    const auto row = pts.row(i);
    for (std::size_t j = 0; j < d; ++j) c[j] += row[j];
  }
  if (n0 > 0)
    for (double& v : c0) v /= static_cast<double>(n0);
  if (n1 > 0)
    for (double& v : c1) v /= static_cast<double>(n1);
}

double total_sse(const Matrix& pts, const std::vector<int>& labels,
                 const std::vector<double>& c0, const std::vector<double>& c1) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.rows; ++i)
    acc += sq_dist(pts.row(i), labels[i] == 0 ? c0 : c1);
  return acc;
}

Run lloyd_once(const Matrix& pts, RngHandle rng, const KMeansConfig& cfg) {
  const std::size_t m = pts.rows;
  Run run;

  // k-means++ seeding: first center uniform, second weighted by squared
  // distance to the first.
  const std::size_t first = rng.next_below(m);
  std::vector<double> c0(pts.row(first).begin(), pts.row(first).end());
  std::vector<double> w(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = sq_dist(pts.row(i), c0);
    total += w[i];
  }
  if (total <= 0.0) {
    run.collapsed = true;
    run.labels.assign(m, 0);
    run.c0 = c0;
    run.c1 = c0;
    run.sse = 0.0;
    return run;
  }
  std::vector<double> c1;
  {
    const double u = rng.next_unit() * total;
    double cum = 0.0;
    std::size_t pick = m - 1;
    for (std::size_t i = 0; i < m; ++i) {
      cum += w[i];
      if (u < cum) {
        pick = i;
        break;
      }
    }
    c1.assign(pts.row(pick).begin(), pts.row(pick).end());
  }

  std::vector<int> labels(m, 0);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      const int want = sq_dist(pts.row(i), c0) <= sq_dist(pts.row(i), c1) ? 0 : 1;
      if (want != labels[i]) {
        labels[i] = want;
        changed = true;
      }
    }

    std::vector<double> n0_c, n1_c;
    std::size_t n0, n1;
    compute_centers(pts, labels, n0_c, n1_c, n0, n1);

    // Empty-cluster repair: reseed at the point farthest from the survivor.
    if (n0 == 0 || n1 == 0) {
      const auto& survivor = n0 == 0 ? n1_c : n0_c;
      std::size_t far_i = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double di = sq_dist(pts.row(i), survivor);
        if (di > far_d) {
          far_d = di;
          far_i = i;
        }
      }
      if (n0 == 0) {
        n0_c.assign(pts.row(far_i).begin(), pts.row(far_i).end());
      } else {
        n1_c.assign(pts.row(far_i).begin(), pts.row(far_i).end());
      }
      c0 = n0_c;
      c1 = n1_c;
      continue;
    }

    const double move = std::sqrt(sq_dist(c0, n0_c)) + std::sqrt(sq_dist(c1, n1_c));
    c0 = n0_c;
    c1 = n1_c;
    if (!changed || move < cfg.tol) break;
  }

  run.labels = std::move(labels);
  run.c0 = std::move(c0);
  run.c1 = std::move(c1);
  run.sse = total_sse(pts, run.labels, run.c0, run.c1);
  return run;
}

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace

ClusterResult kmeans2(const Matrix& points, RngHandle rng, const KMeansConfig& cfg) {
  if (points.rows < 2)
    throw ShapeError("kmeans2 needs at least 2 points; use cluster_degenerate");
  if (!points.all_finite()) throw ValidationError("kmeans2: non-finite input");
  if (cfg.restarts < 1) throw ValidationError("kmeans2: restarts must be >= 1");

  Run best;
  for (int r = 0; r < cfg.restarts; ++r) {
    Run run = lloyd_once(points, rng.child("restart", static_cast<std::uint64_t>(r)),
                         cfg);
    if (run.sse < best.sse) best = std::move(run);
    if (best.collapsed) break;  // identical points, no restart can differ
  }

  ClusterResult res;
  res.sse = best.sse;
  if (best.collapsed || !lex_less(best.c1, best.c0)) {
    res.labels = best.labels;
    res.center0 = best.c0;
    res.center1 = best.c1;
  } else {
    res.labels.resize(points.rows);
    for (std::size_t i = 0; i < points.rows; ++i) res.labels[i] = 1 - best.labels[i];
    res.center0 = best.c1;
    res.center1 = best.c0;
  }
  res.center_distance = std::sqrt(sq_dist(res.center0, res.center1));
  res.degenerate = best.collapsed || res.center_distance == 0.0;
  return res;
}

ClusterResult cluster_degenerate(const Matrix& points) {
  if (points.rows != 1)
    throw ShapeError("cluster_degenerate expects exactly one point");
  ClusterResult res;
  res.labels = {0};
  res.center0.assign(points.row(0).begin(), points.row(0).end());
  res.center1 = res.center0;
  res.center_distance = 0.0;
  res.degenerate = true;
  res.sse = 0.0;
  return res;
}

Matrix center_distance_gradient(const Matrix& points, const ClusterResult& result) {
  if (result.degenerate || result.center_distance <= 0.0)
    throw ValidationError("center_distance_gradient: undefined for d = 0");
  if (result.labels.size() != points.rows)
    throw ShapeError("center_distance_gradient: labels do not match points");

  std::size_t n0 = 0, n1 = 0;
  for (int l : result.labels) (l == 0 ? n0 : n1) += 1;
  if (n0 == 0 || n1 == 0)
    throw ValidationError("center_distance_gradient: a cluster is empty");

  const std::size_t d = points.cols;
  std::vector<double> unit(d);
  for (std::size_t j = 0; j < d; ++j)
    unit[j] = (result.center0[j] - result.center1[j]) / result.center_distance;

  Matrix g(points.rows, d);
  for (std::size_t i = 0; i < points.rows; ++i) {
    const double scale = result.labels[i] == 0 ? 1.0 / static_cast<double>(n0)
                                               : -1.0 / static_cast<double>(n1);
    for (std::size_t j = 0; j < d; ++j) g(i, j) = scale * unit[j];
  }
  return g;
}

}  // namespace srad
