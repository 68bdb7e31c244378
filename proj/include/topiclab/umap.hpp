#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "topiclab/embedding.hpp"

namespace topiclab {

enum class Metric { cosine, euclidean };

struct UmapParams {
  int n_neighbors = 15;
  int n_components = 5;
  float min_dist = 0.1f;
  int n_epochs = 200;
  std::uint64_t seed = 33;
  Metric metric = Metric::cosine;
};

struct KnnGraph {
  Eigen::MatrixXi indices;    // n x k, each row sorted by ascending distance
  Eigen::MatrixXf distances;  // ties broken by lower point index
  int k = 0;
};

struct FuzzyGraph {
  int n = 0;
  // symmetric membership strengths, stored once per undirected edge (i < j),
  // sorted by (i, j)
  struct Edge {
    int i, j;
    float w;
  };
  std::vector<Edge> edges;
  Eigen::VectorXf rho;    // nearest-neighbor distance per point
  Eigen::VectorXf sigma;  // bandwidth solving the log2(k) equation
};

// exact brute-force k nearest neighbors (no self edges)
KnnGraph knn(const Eigen::MatrixXf& points, int k, Metric metric);

FuzzyGraph fuzzy_simplicial_set(const KnnGraph& graph);

// least-squares fit of 1/(1 + a*d^(2b)) to the min_dist membership curve
std::pair<float, float> fit_ab(float min_dist);

Eigen::MatrixXf optimize_layout(const FuzzyGraph& graph, const UmapParams& params);

// knn -> fuzzy_simplicial_set -> optimize_layout, with provenance tag
EmbeddingMatrix umap_reduce(const EmbeddingMatrix& emb, const UmapParams& params);

}  // namespace topiclab
