#include "topiclab/umap.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "topiclab/errors.hpp"
#include "topiclab/rng.hpp"

namespace topiclab {

KnnGraph knn(const Eigen::MatrixXf& points, int k, Metric metric) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k >= n)
    throw InvalidArgument("knn: k must satisfy 1 <= k < n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");

  // rows for the distance computation; cosine works on normalized rows
  Eigen::MatrixXf prep = points;
  Eigen::VectorXf sq_norms;
  if (metric == Metric::cosine) {
    for (int i = 0; i < n; ++i) {
      const float nm = prep.row(i).norm();
      if (nm > 1e-12f) prep.row(i) /= nm;
    }
  } else {
    sq_norms = prep.rowwise().squaredNorm();
  }

  KnnGraph g;
  g.k = k;
  g.indices.resize(n, k);
  g.distances.resize(n, k);

  const int block = 256;
  std::vector<std::pair<float, int>> cand;
  cand.reserve(n - 1);
  for (int start = 0; start < n; start += block) {
    const int rows = std::min(block, n - start);
    // pairwise distances of this block against everything
    Eigen::MatrixXf prod = prep.middleRows(start, rows) * prep.transpose();
    for (int bi = 0; bi < rows; ++bi) {
      const int i = start + bi;
      cand.clear();
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        float d;
        if (metric == Metric::cosine) {
          d = 1.0f - prod(bi, j);
        } else {
          const float sq = sq_norms(i) + sq_norms(j) - 2.0f * prod(bi, j);
          d = std::sqrt(std::max(sq, 0.0f));
        }
        cand.emplace_back(d, j);
      }
      std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
      for (int j = 0; j < k; ++j) {
        g.distances(i, j) = cand[j].first;
        g.indices(i, j) = cand[j].second;
      }
    }
  }
  return g;
}

FuzzyGraph fuzzy_simplicial_set(const KnnGraph& graph) {
  const int n = static_cast<int>(graph.indices.rows());
  const int k = graph.k;
  const float target = std::log2(static_cast<float>(k));

  FuzzyGraph fg;
  fg.n = n;
  fg.rho.resize(n);
  fg.sigma.resize(n);

  for (int i = 0; i < n; ++i) {
    const float rho = graph.distances(i, 0);
    fg.rho(i) = rho;
    float lo = 1e-8f, hi = 1e8f;
    for (int it = 0; it < 64; ++it) {
      const float mid = 0.5f * (lo + hi);
      float sum = 0.0f;
      for (int j = 0; j < k; ++j) {
        const float d = graph.distances(i, j) - rho;
        sum += d > 0.0f ? std::exp(-d / mid) : 1.0f;
      }
      if (sum > target)
        hi = mid;
      else
        lo = mid;
    }
    fg.sigma(i) = 0.5f * (lo + hi);
  }

  // directed strengths, then probabilistic union a + b - a*b
  std::unordered_map<std::uint64_t, std::pair<float, float>> dir;
  dir.reserve(static_cast<std::size_t>(n) * k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      const int nb = graph.indices(i, j);
      const float d = graph.distances(i, j) - fg.rho(i);
      const float w = d > 0.0f ? std::exp(-d / fg.sigma(i)) : 1.0f;
      const int lo_id = std::min(i, nb), hi_id = std::max(i, nb);
      const std::uint64_t key =
          (static_cast<std::uint64_t>(lo_id) << 32) | static_cast<std::uint32_t>(hi_id);
      auto& slot = dir[key];
      if (i == lo_id)
        slot.first = std::max(slot.first, w);
      else
        slot.second = std::max(slot.second, w);
    }
  }
  fg.edges.reserve(dir.size());
  for (const auto& [key, ab] : dir) {
    const float w = ab.first + ab.second - ab.first * ab.second;
    if (w > 0.0f)
      fg.edges.push_back({static_cast<int>(key >> 32),
                          static_cast<int>(key & 0xFFFFFFFFu), w});
  }
  std::sort(fg.edges.begin(), fg.edges.end(), [](const auto& a, const auto& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return fg;
}

std::pair<float, float> fit_ab(float min_dist) {
  // target curve: 1 for d <= min_dist, exp(-(d - min_dist)) beyond
  const int m = 300;
  std::vector<double> x(m), y(m);
  for (int i = 0; i < m; ++i) {
    x[i] = 3.0 * i / (m - 1);
    y[i] = x[i] <= min_dist ? 1.0 : std::exp(-(x[i] - min_dist));
  }

  double a = 1.0, b = 1.0, lambda = 1e-3;
  auto cost = [&](double ca, double cb) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      const double f = 1.0 / (1.0 + ca * std::pow(x[i], 2.0 * cb));
      s += (y[i] - f) * (y[i] - f);
    }
    return s;
  };
  double current = cost(a, b);
  for (int it = 0; it < 100; ++it) {
    // J^T J and J^T r for the 2-parameter model
    double jtj00 = 0, jtj01 = 0, jtj11 = 0, jtr0 = 0, jtr1 = 0;
    for (int i = 0; i < m; ++i) {
      if (x[i] <= 0.0) continue;
      const double p = std::pow(x[i], 2.0 * b);
      const double denom = 1.0 + a * p;
      const double f = 1.0 / denom;
      const double r = y[i] - f;
      const double dfda = -p / (denom * denom);
      const double dfdb = -2.0 * a * p * std::log(x[i]) / (denom * denom);
      jtj00 += dfda * dfda;
      jtj01 += dfda * dfdb;
      jtj11 += dfdb * dfdb;
      jtr0 += dfda * r;
      jtr1 += dfdb * r;
    }
    const double d00 = jtj00 * (1.0 + lambda), d11 = jtj11 * (1.0 + lambda);
    const double det = d00 * d11 - jtj01 * jtj01;
    if (std::abs(det) < 1e-30) break;
    const double da = (d11 * jtr0 - jtj01 * jtr1) / det;
    const double db = (d00 * jtr1 - jtj01 * jtr0) / det;
    const double next = cost(a + da, b + db);
    if (next < current) {
      a += da;
      b += db;
      current = next;
      lambda = std::max(lambda / 3.0, 1e-12);
      if (std::sqrt(da * da + db * db) < 1e-12) break;
    } else {
      lambda *= 3.0;
      if (lambda > 1e12) break;
    }
  }
  return {static_cast<float>(a), static_cast<float>(b)};
}

namespace {

constexpr float kClip = 4.0f;

inline float clipf(float v) { return v < -kClip ? -kClip : (v > kClip ? kClip : v); }

// Subspace iteration for the top eigenvectors of (I + D^-1/2 A D^-1/2)/2,
// i.e. the bottom of the normalized Laplacian. Returns false when the solve
// produced non-finite values, in which case the caller falls back to a
// seeded random initialization.
bool spectral_init(const FuzzyGraph& fg, int m, std::uint64_t seed,
                   std::vector<float>& out) {
  const int n = fg.n;
  const int p = m + 1;  // extra column for the trivial eigenvector
  if (n <= p || fg.edges.empty()) return false;

  std::vector<double> deg(n, 0.0);
  for (const auto& e : fg.edges) {
    deg[e.i] += e.w;
    deg[e.j] += e.w;
  }
  std::vector<double> dinv(n);
  for (int i = 0; i < n; ++i) dinv[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;

  auto apply_b = [&](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd scaled = x;
    for (int i = 0; i < n; ++i) scaled.row(i) *= dinv[i];
    Eigen::MatrixXd ax = Eigen::MatrixXd::Zero(n, x.cols());
    for (const auto& e : fg.edges) {
      ax.row(e.i) += e.w * scaled.row(e.j);
      ax.row(e.j) += e.w * scaled.row(e.i);
    }
    for (int i = 0; i < n; ++i) ax.row(i) *= dinv[i];
    return Eigen::MatrixXd(0.5 * (x + ax));
  };

  Rng rng(derive_seed(seed, "spectral"));
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();

  Eigen::VectorXd ritz_prev = Eigen::VectorXd::Zero(p);
  for (int it = 0; it < 500; ++it) {
    Eigen::MatrixXd bx = apply_b(x);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(bx);
    x = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    if (it % 10 == 9) {
      Eigen::MatrixXd t = x.transpose() * apply_b(x);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (t + t.transpose()));
      Eigen::VectorXd ritz = es.eigenvalues();
      if ((ritz - ritz_prev).cwiseAbs().maxCoeff() < 1e-9) break;
      ritz_prev = ritz;
    }
  }

  // Rayleigh-Ritz rotation, eigenvalues descending; column 0 is the trivial
  // top eigenvector and is dropped
  Eigen::MatrixXd t = x.transpose() * apply_b(x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (t + t.transpose()));
  Eigen::MatrixXd rotated = x * es.eigenvectors();
  Eigen::MatrixXd emb(n, m);
  for (int j = 0; j < m; ++j) emb.col(j) = rotated.col(p - 2 - j);

  if (!emb.allFinite()) return false;
  const double max_abs = emb.cwiseAbs().maxCoeff();
  if (max_abs <= 0.0) return false;
  const double scale = 10.0 / max_abs;

  Rng noise(derive_seed(seed, "spectral-noise"));
  out.resize(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      out[static_cast<std::size_t>(i) * m + j] =
          static_cast<float>(emb(i, j) * scale + 1e-4 * noise.normal());
  return true;
}

}  // namespace

Eigen::MatrixXf optimize_layout(const FuzzyGraph& fg, const UmapParams& params) {
  const int n = fg.n;
  const int m = params.n_components;
  if (n < 1) throw InvalidArgument("optimize_layout: empty graph");
  if (m < 2) throw InvalidArgument("optimize_layout: n_components must be >= 2");

  std::vector<float> emb;
  if (!spectral_init(fg, m, params.seed, emb)) {
    Rng rng(derive_seed(params.seed, "init"));
    emb.resize(static_cast<std::size_t>(n) * m);
    for (auto& v : emb) v = static_cast<float>(rng.uniform(-10.0, 10.0));
  }

  const auto [a, b] = fit_ab(params.min_dist);
  const int n_epochs = params.n_epochs;

  if (n_epochs > 0 && !fg.edges.empty()) {
    float w_max = 0.0f;
    for (const auto& e : fg.edges) w_max = std::max(w_max, e.w);
    const float w_min = w_max / static_cast<float>(n_epochs);

    // directed edge list, both directions of every undirected edge
    struct DirEdge {
      int src, dst;
      float w;
    };
    std::vector<DirEdge> edges;
    edges.reserve(fg.edges.size() * 2);
    for (const auto& e : fg.edges) {
      if (e.w < w_min) continue;
      edges.push_back({e.i, e.j, e.w});
      edges.push_back({e.j, e.i, e.w});
    }
    std::sort(edges.begin(), edges.end(), [](const DirEdge& x, const DirEdge& y) {
      return x.src != y.src ? x.src < y.src : x.dst < y.dst;
    });

    const std::size_t ne = edges.size();
    std::vector<float> epochs_per_sample(ne), next_sample(ne), next_neg(ne),
        epochs_per_neg(ne);
    constexpr float kNegativeRate = 5.0f;
    for (std::size_t e = 0; e < ne; ++e) {
      epochs_per_sample[e] = w_max / edges[e].w;
      epochs_per_neg[e] = epochs_per_sample[e] / kNegativeRate;
      next_sample[e] = epochs_per_sample[e];
      next_neg[e] = epochs_per_neg[e];
    }

    Rng rng(derive_seed(params.seed, "sgd"));
    for (int epoch = 0; epoch < n_epochs; ++epoch) {
      const float alpha =
          1.0f * (1.0f - static_cast<float>(epoch) / static_cast<float>(n_epochs));
      const float fepoch = static_cast<float>(epoch);
      for (std::size_t e = 0; e < ne; ++e) {
        if (next_sample[e] > fepoch) continue;
        float* cur = emb.data() + static_cast<std::size_t>(edges[e].src) * m;
        float* oth = emb.data() + static_cast<std::size_t>(edges[e].dst) * m;

        float dist_sq = 0.0f;
        for (int d = 0; d < m; ++d) {
          const float diff = cur[d] - oth[d];
          dist_sq += diff * diff;
        }
        float grad_coeff = 0.0f;
        if (dist_sq > 0.0f) {
          grad_coeff = -2.0f * a * b * std::pow(dist_sq, b - 1.0f);
          grad_coeff /= a * std::pow(dist_sq, b) + 1.0f;
        }
        for (int d = 0; d < m; ++d) {
          const float g = clipf(grad_coeff * (cur[d] - oth[d]));
          cur[d] += g * alpha;
          oth[d] -= g * alpha;
        }
        next_sample[e] += epochs_per_sample[e];

        const int n_neg = std::max(
            0, static_cast<int>((fepoch - next_neg[e]) / epochs_per_neg[e]));
        for (int t = 0; t < n_neg; ++t) {
          const int kpt = static_cast<int>(rng.uniform_int(n));
          const float* neg = emb.data() + static_cast<std::size_t>(kpt) * m;
          float nd_sq = 0.0f;
          for (int d = 0; d < m; ++d) {
            const float diff = cur[d] - neg[d];
            nd_sq += diff * diff;
          }
          float coeff;
          if (nd_sq > 0.0f) {
            coeff = 2.0f * b;
            coeff /= (0.001f + nd_sq) * (a * std::pow(nd_sq, b) + 1.0f);
          } else if (edges[e].dst == kpt) {
            continue;
          } else {
            coeff = 0.0f;
          }
          for (int d = 0; d < m; ++d) {
            const float g =
                coeff > 0.0f ? clipf(coeff * (cur[d] - neg[d])) : kClip;
            cur[d] += g * alpha;
          }
        }
        next_neg[e] += n_neg * epochs_per_neg[e];
      }
    }
  }

  Eigen::MatrixXf out(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out(i, j) = emb[static_cast<std::size_t>(i) * m + j];
  return out;
}

EmbeddingMatrix umap_reduce(const EmbeddingMatrix& emb, const UmapParams& params) {
  KnnGraph g = knn(emb.vectors, params.n_neighbors, params.metric);
  FuzzyGraph fg = fuzzy_simplicial_set(g);
  EmbeddingMatrix out;
  out.vectors = optimize_layout(fg, params);
  out.doc_ids = emb.doc_ids;
  out.provenance = "umap(seed=" + std::to_string(params.seed) + ")";
  return out;
}

}  // namespace topiclab
