#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "topiclab/cluster.hpp"
#include "topiclab/errors.hpp"

namespace topiclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::max();

struct MstEdge {
  int u, v;
  double w;
};

struct DendroRow {
  int left, right;
  double dist;
  int size;
};

// distance to the min_samples-th nearest neighbor, the point itself excluded
std::vector<double> core_distances(const Eigen::MatrixXd& pts, int min_samples) {
  const int n = static_cast<int>(pts.rows());
  std::vector<double> core(n);
  std::vector<double> row(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) row[j] = (pts.row(i) - pts.row(j)).norm();
    row[i] = kInf;  // exclude self
    std::nth_element(row.begin(), row.begin() + (min_samples - 1), row.end());
    core[i] = row[min_samples - 1];
  }
  return core;
}

std::vector<MstEdge> prim_mst(const Eigen::MatrixXd& pts,
                              const std::vector<double>& core) {
  const int n = static_cast<int>(pts.rows());
  std::vector<bool> in_tree(n, false);
  std::vector<double> dist(n, kInf);
  std::vector<int> from(n, -1);
  dist[0] = 0.0;

  std::vector<MstEdge> edges;
  edges.reserve(n - 1);
  for (int step = 0; step < n; ++step) {
    int u = -1;
    double best = kInf;
    for (int v = 0; v < n; ++v) {
      if (!in_tree[v] && dist[v] < best) {
        best = dist[v];
        u = v;
      }
    }
    in_tree[u] = true;
    if (from[u] >= 0) edges.push_back({from[u], u, dist[u]});
    for (int v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double d = (pts.row(u) - pts.row(v)).norm();
      const double mreach = std::max({core[u], core[v], d});
      if (mreach < dist[v]) {
        dist[v] = mreach;
        from[v] = u;
      }
    }
  }
  return edges;
}

// plain union-find over points, tracking the dendrogram node of each component
struct LinkUnionFind {
  std::vector<int> parent, node_of, size_of;
  explicit LinkUnionFind(int n) : parent(n), node_of(n), size_of(n, 1) {
    for (int i = 0; i < n; ++i) parent[i] = node_of[i] = i;
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

std::vector<DendroRow> single_linkage(std::vector<MstEdge> edges, int n) {
  for (auto& e : edges)
    if (e.u > e.v) std::swap(e.u, e.v);
  std::sort(edges.begin(), edges.end(), [](const MstEdge& a, const MstEdge& b) {
    if (a.w != b.w) return a.w < b.w;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });

  LinkUnionFind uf(n);
  std::vector<DendroRow> rows;
  rows.reserve(edges.size());
  for (std::size_t step = 0; step < edges.size(); ++step) {
    const int ra = uf.find(edges[step].u);
    const int rb = uf.find(edges[step].v);
    const int node = n + static_cast<int>(step);
    rows.push_back({uf.node_of[ra], uf.node_of[rb], edges[step].w,
                    uf.size_of[ra] + uf.size_of[rb]});
    uf.parent[rb] = ra;
    uf.size_of[ra] += uf.size_of[rb];
    uf.node_of[ra] = node;
  }
  return rows;
}

// leaves (point ids) under a dendrogram node
void collect_points(const std::vector<DendroRow>& rows, int n, int node,
                    std::vector<int>& out) {
  std::vector<int> stack{node};
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    if (cur < n) {
      out.push_back(cur);
    } else {
      stack.push_back(rows[cur - n].left);
      stack.push_back(rows[cur - n].right);
    }
  }
}

std::vector<CondensedNode> condense(const std::vector<DendroRow>& rows, int n,
                                    int min_cluster_size) {
  const int root = 2 * n - 2;
  std::vector<int> relabel(2 * n - 1, -1);
  relabel[root] = n;
  int next_label = n + 1;
  std::vector<bool> ignore(2 * n - 1, false);
  std::vector<CondensedNode> result;

  auto node_size = [&](int node) { return node < n ? 1 : rows[node - n].size; };

  // breadth-first over the dendrogram, root first
  std::vector<int> order;
  {
    std::vector<int> frontier{root};
    while (!frontier.empty()) {
      order.insert(order.end(), frontier.begin(), frontier.end());
      std::vector<int> next;
      for (int node : frontier) {
        if (node >= n) {
          next.push_back(rows[node - n].left);
          next.push_back(rows[node - n].right);
        }
      }
      frontier = std::move(next);
    }
  }

  std::vector<int> points;
  auto shed = [&](int parent_label, int subtree, double lambda) {
    points.clear();
    collect_points(rows, n, subtree, points);
    std::sort(points.begin(), points.end());
    for (int p : points) {
      result.push_back({parent_label, p, lambda, 1});
      ignore[p] = true;
    }
    // mark internal nodes of the subtree as handled
    std::vector<int> stack{subtree};
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      if (cur >= n) {
        ignore[cur] = true;
        stack.push_back(rows[cur - n].left);
        stack.push_back(rows[cur - n].right);
      }
    }
  };

  for (int node : order) {
    if (node < n || ignore[node]) continue;
    const DendroRow& row = rows[node - n];
    const double lambda = 1.0 / std::max(row.dist, 1e-10);
    const int left_count = node_size(row.left);
    const int right_count = node_size(row.right);

    if (left_count >= min_cluster_size && right_count >= min_cluster_size) {
      relabel[row.left] = next_label++;
      result.push_back({relabel[node], relabel[row.left], lambda, left_count});
      relabel[row.right] = next_label++;
      result.push_back({relabel[node], relabel[row.right], lambda, right_count});
    } else if (left_count < min_cluster_size && right_count < min_cluster_size) {
      shed(relabel[node], row.left, lambda);
      shed(relabel[node], row.right, lambda);
    } else if (left_count < min_cluster_size) {
      relabel[row.right] = relabel[node];
      shed(relabel[node], row.left, lambda);
    } else {
      relabel[row.left] = relabel[node];
      shed(relabel[node], row.right, lambda);
    }
  }
  return result;
}

std::unordered_map<int, double> compute_stability(
    const std::vector<CondensedNode>& tree, int n) {
  std::unordered_map<int, double> births;  // lambda at which a cluster appears
  for (const auto& node : tree)
    if (node.child >= n) births[node.child] = node.lambda;
  births[n] = 0.0;  // root

  std::unordered_map<int, double> stability;
  for (const auto& node : tree) {
    const double birth = births.at(node.parent);
    stability[node.parent] += (node.lambda - birth) * node.child_size;
  }
  return stability;
}

// bottom-up excess-of-mass; the root is never a selectable cluster
std::vector<int> excess_of_mass(const std::vector<CondensedNode>& tree, int n,
                                std::unordered_map<int, double>& stability) {
  std::map<int, std::vector<int>> cluster_children;  // parent -> child clusters
  for (const auto& node : tree)
    if (node.child >= n) cluster_children[node.parent].push_back(node.child);

  std::vector<int> candidates;
  for (const auto& [c, st] : stability)
    if (c != n) candidates.push_back(c);
  std::sort(candidates.begin(), candidates.end(), std::greater<int>());

  std::unordered_map<int, bool> is_cluster;
  for (int c : candidates) is_cluster[c] = true;

  for (int c : candidates) {
    double subtree = 0.0;
    auto it = cluster_children.find(c);
    if (it != cluster_children.end())
      for (int ch : it->second) subtree += stability.at(ch);

    if (subtree > stability.at(c)) {
      is_cluster[c] = false;
      stability[c] = subtree;
    } else {
      // deselect every descendant cluster
      std::vector<int> stack;
      if (it != cluster_children.end()) stack = it->second;
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        is_cluster[cur] = false;
        auto cit = cluster_children.find(cur);
        if (cit != cluster_children.end())
          stack.insert(stack.end(), cit->second.begin(), cit->second.end());
      }
    }
  }

  std::vector<int> selected;
  for (const auto& [c, flag] : is_cluster)
    if (flag) selected.push_back(c);
  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace

HdbscanResult hdbscan(const Eigen::MatrixXf& points, const HdbscanParams& params) {
  const int n = static_cast<int>(points.rows());
  const int mcs = params.min_cluster_size;
  const int ms = params.min_samples > 0 ? params.min_samples : mcs;
  if (mcs < 2) throw InvalidArgument("hdbscan: min_cluster_size must be >= 2");
  if (n < mcs)
    throw InvalidArgument("hdbscan: need at least min_cluster_size=" +
                          std::to_string(mcs) + " points, got " + std::to_string(n));
  if (ms >= n)
    throw InvalidArgument("hdbscan: min_samples=" + std::to_string(ms) +
                          " must be < n=" + std::to_string(n));

  const Eigen::MatrixXd pts = points.cast<double>();

  HdbscanResult result;
  result.core_distances = core_distances(pts, ms);
  std::vector<MstEdge> mst = prim_mst(pts, result.core_distances);
  for (const auto& e : mst) {
    result.mst_weights.push_back(e.w);
    result.mst_total_weight += e.w;
  }
  std::sort(result.mst_weights.begin(), result.mst_weights.end());

  std::vector<DendroRow> dendro = single_linkage(std::move(mst), n);
  result.tree.n_points = n;
  result.tree.root = n;
  result.tree.nodes = condense(dendro, n, mcs);
  result.tree.stabilities = compute_stability(result.tree.nodes, n);

  auto stability = result.tree.stabilities;  // selection mutates its copy
  result.tree.selected = excess_of_mass(result.tree.nodes, n, stability);

  // nearest selected ancestor (selected clusters form an antichain)
  std::unordered_map<int, int> cluster_parent;
  std::unordered_map<int, int> point_parent;
  for (const auto& node : result.tree.nodes) {
    if (node.child >= n)
      cluster_parent[node.child] = node.parent;
    else
      point_parent[node.child] = node.parent;
  }
  std::unordered_map<int, bool> selected_set;
  for (int c : result.tree.selected) selected_set[c] = true;

  result.assign.labels.assign(n, -1);
  for (int p = 0; p < n; ++p) {
    auto it = point_parent.find(p);
    if (it == point_parent.end()) continue;
    int c = it->second;
    while (true) {
      if (selected_set.count(c)) {
        result.assign.labels[p] = c;
        break;
      }
      auto up = cluster_parent.find(c);
      if (up == cluster_parent.end()) break;  // reached the root
      c = up->second;
    }
  }
  canonicalize_labels(result.assign);
  return result;
}

void save_condensed_tree_csv(const CondensedTree& tree, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open output file: " + path);
  f << "parent,child,lambda,size\n";
  char buf[64];
  for (const auto& node : tree.nodes) {
    std::snprintf(buf, sizeof(buf), "%.9g", node.lambda);
    f << node.parent << "," << node.child << "," << buf << "," << node.child_size
      << "\n";
  }
}

}  // namespace topiclab
