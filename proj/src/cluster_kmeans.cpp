#include <cmath>
#include <limits>

#include "topiclab/cluster.hpp"
#include "topiclab/errors.hpp"
#include "topiclab/rng.hpp"

namespace topiclab {

namespace {

double sq_dist(const Eigen::MatrixXd& pts, int i, const Eigen::MatrixXd& centroids,
               int c) {
  return (pts.row(i) - centroids.row(c)).squaredNorm();
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXf& points, const KMeansParams& params) {
  const int n = static_cast<int>(points.rows());
  const int dim = static_cast<int>(points.cols());
  const int k = params.k;
  if (k < 1) throw InvalidArgument("kmeans: k must be >= 1");
  if (k > n)
    throw InvalidArgument("kmeans: k=" + std::to_string(k) + " exceeds n=" +
                          std::to_string(n));

  const Eigen::MatrixXd pts = points.cast<double>();
  Rng rng(params.seed);

  // k-means++ seeding
  Eigen::MatrixXd centroids(k, dim);
  std::vector<double> min_sq(n, std::numeric_limits<double>::max());
  {
    const int first = static_cast<int>(rng.uniform_int(n));
    centroids.row(0) = pts.row(first);
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        min_sq[i] = std::min(min_sq[i], sq_dist(pts, i, centroids, c - 1));
        total += min_sq[i];
      }
      int chosen = n - 1;
      if (total > 0.0) {
        const double u = rng.uniform() * total;
        double cum = 0.0;
        for (int i = 0; i < n; ++i) {
          cum += min_sq[i];
          if (u < cum) {
            chosen = i;
            break;
          }
        }
      } else {
        // all mass on already-chosen points (duplicates); pick uniformly
        chosen = static_cast<int>(rng.uniform_int(n));
      }
      centroids.row(c) = pts.row(chosen);
    }
  }

  KMeansResult result;
  std::vector<int> labels(n, 0);
  std::vector<int> counts(k, 0);

  for (int iter = 0; iter < params.max_iters; ++iter) {
    // assignment step; ties go to the lower centroid index
    double inertia = 0.0;
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      double best = sq_dist(pts, i, centroids, 0);
      int best_c = 0;
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(pts, i, centroids, c);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      labels[i] = best_c;
      counts[best_c] += 1;
      inertia += best;
    }

    // empty clusters take the point farthest from its assigned centroid
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      double worst = -1.0;
      int worst_i = -1;
      for (int i = 0; i < n; ++i) {
        if (counts[labels[i]] <= 1) continue;  // keep donors non-empty
        const double d = sq_dist(pts, i, centroids, labels[i]);
        if (d > worst) {
          worst = d;
          worst_i = i;
        }
      }
      if (worst_i < 0) continue;
      inertia -= worst;
      counts[labels[worst_i]] -= 1;
      labels[worst_i] = c;
      counts[c] = 1;
      centroids.row(c) = pts.row(worst_i);
    }
    result.inertia_history.push_back(inertia);
    result.inertia = inertia;

    // update step
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, dim);
    for (int i = 0; i < n; ++i) next.row(labels[i]) += pts.row(i);
    double max_shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) next.row(c) /= static_cast<double>(counts[c]);
      else next.row(c) = centroids.row(c);
      max_shift = std::max(max_shift, (next.row(c) - centroids.row(c)).norm());
    }
    centroids = next;
    if (max_shift < params.tol) break;
  }

  // final assignment against the converged centroids
  double inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    double best = sq_dist(pts, i, centroids, 0);
    int best_c = 0;
    for (int c = 1; c < k; ++c) {
      const double d = sq_dist(pts, i, centroids, c);
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    labels[i] = best_c;
    inertia += best;
  }
  result.inertia_history.push_back(inertia);
  result.inertia = inertia;
  result.centroids = centroids;
  result.assign.labels = std::move(labels);
  canonicalize_labels(result.assign);
  return result;
}

}  // namespace topiclab
