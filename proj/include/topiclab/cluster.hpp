#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace topiclab {

struct ClusterAssignment {
  std::vector<int> labels;  // -1 = noise, else 0..n_clusters-1 (size-ordered)
  int n_clusters = 0;
  double outlier_fraction = 0.0;
};

double outlier_fraction(const ClusterAssignment& assign);

// renumber non-noise labels by decreasing cluster size, ties by smallest
// member index; applied by both algorithms before returning
void canonicalize_labels(ClusterAssignment& assign);

struct KMeansParams {
  int k = 8;
  int max_iters = 300;
  double tol = 1e-4;
  std::uint64_t seed = 33;
};

struct KMeansResult {
  ClusterAssignment assign;
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // after each assignment step
};

// k-means++ seeding, Lloyd iterations, empty clusters reseeded to the point
// farthest from its assigned centroid; never produces noise labels
KMeansResult kmeans(const Eigen::MatrixXf& points, const KMeansParams& params);

struct HdbscanParams {
  int min_cluster_size = 15;
  int min_samples = -1;  // -1: use min_cluster_size
};

struct CondensedNode {
  int parent;
  int child;
  double lambda;  // 1 / distance at the split
  int child_size;
};

struct CondensedTree {
  int n_points = 0;
  int root = 0;  // == n_points
  std::vector<CondensedNode> nodes;
  std::unordered_map<int, double> stabilities;  // per cluster label
  std::vector<int> selected;                    // excess-of-mass winners
};

struct HdbscanResult {
  ClusterAssignment assign;
  CondensedTree tree;
  std::vector<double> core_distances;
  double mst_total_weight = 0.0;
  std::vector<double> mst_weights;  // sorted ascending
};

// mutual-reachability MST (Prim) -> single linkage -> condensed tree ->
// excess-of-mass selection; unselected points labeled -1
HdbscanResult hdbscan(const Eigen::MatrixXf& points, const HdbscanParams& params);

void save_condensed_tree_csv(const CondensedTree& tree, const std::string& path);

}  // namespace topiclab
