#include <algorithm>

#include "topiclab/cluster.hpp"

namespace topiclab {

double outlier_fraction(const ClusterAssignment& assign) {
  if (assign.labels.empty()) return 0.0;
  std::size_t noise = 0;
  for (int l : assign.labels)
    if (l == -1) ++noise;
  return static_cast<double>(noise) / static_cast<double>(assign.labels.size());
}

void canonicalize_labels(ClusterAssignment& assign) {
  // size per label and smallest member index for tie-breaking
  std::unordered_map<int, std::pair<int, int>> info;  // label -> (size, first idx)
  for (std::size_t i = 0; i < assign.labels.size(); ++i) {
    const int l = assign.labels[i];
    if (l < 0) continue;
    auto it = info.find(l);
    if (it == info.end())
      info.emplace(l, std::make_pair(1, static_cast<int>(i)));
    else
      ++it->second.first;
  }
  std::vector<std::pair<int, std::pair<int, int>>> order(info.begin(), info.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.second.second < b.second.second;
  });
  std::unordered_map<int, int> remap;
  for (std::size_t r = 0; r < order.size(); ++r)
    remap.emplace(order[r].first, static_cast<int>(r));
  for (auto& l : assign.labels)
    if (l >= 0) l = remap.at(l);
  assign.n_clusters = static_cast<int>(order.size());
  assign.outlier_fraction = outlier_fraction(assign);
}

}  // namespace topiclab
