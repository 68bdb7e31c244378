#include "topiclab/topicrep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "topiclab/errors.hpp"

namespace topiclab {

ClassTermMatrix ctfidf(const Corpus& corpus, const ClusterAssignment& assign) {
  if (assign.labels.size() != corpus.n_docs())
    throw InvalidArgument("ctfidf: assignment length does not match corpus");
  if (assign.n_clusters < 1)
    throw InvalidArgument("ctfidf: all documents are noise");

  const int classes = assign.n_clusters;
  const int vocab = static_cast<int>(corpus.vocab_size());

  ClassTermMatrix ctm;
  ctm.tf = Eigen::MatrixXd::Zero(classes, vocab);
  ctm.class_sizes.assign(classes, 0);
  for (std::size_t d = 0; d < corpus.n_docs(); ++d) {
    const int c = assign.labels[d];
    if (c < 0) continue;
    ++ctm.class_sizes[c];
    for (int t : corpus.token_ids[d]) ctm.tf(c, t) += 1.0;
  }
  ctm.f_t = ctm.tf.colwise().sum();
  ctm.avg_words_per_class = ctm.tf.sum() / static_cast<double>(classes);
  return ctm;
}

Eigen::MatrixXd ctfidf_scores(const ClassTermMatrix& ctm) {
  const int classes = ctm.n_classes();
  const int vocab = static_cast<int>(ctm.tf.cols());
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(classes, vocab);
  for (int t = 0; t < vocab; ++t) {
    if (ctm.f_t(t) <= 0.0) continue;
    const double idf = std::log(1.0 + ctm.avg_words_per_class / ctm.f_t(t));
    for (int c = 0; c < classes; ++c) scores(c, t) = ctm.tf(c, t) * idf;
  }
  return scores;
}

TopicModelOutput extract_topics(const ClassTermMatrix& ctm, const Corpus& corpus,
                                const ClusterAssignment& assign, int n,
                                const std::string& model_tag) {
  const int classes = ctm.n_classes();
  const int vocab = static_cast<int>(ctm.tf.cols());
  const Eigen::MatrixXd scores = ctfidf_scores(ctm);

  std::vector<Topic> topics(classes);
  std::vector<int> order(vocab);
  for (int c = 0; c < classes; ++c) {
    topics[c].size = ctm.class_sizes[c];
    // terms present in this class, ranked by score then term id
    std::iota(order.begin(), order.end(), 0);
    auto cmp = [&](int a, int b) {
      if (scores(c, a) != scores(c, b)) return scores(c, a) > scores(c, b);
      return a < b;
    };
    int present = 0;
    for (int t = 0; t < vocab; ++t)
      if (ctm.tf(c, t) > 0.0) order[present++] = t;
    const int take = std::min(n, present);
    std::partial_sort(order.begin(), order.begin() + take,
                      order.begin() + present, cmp);
    for (int r = 0; r < take; ++r)
      topics[c].top_words.emplace_back(corpus.terms[order[r]],
                                       scores(c, order[r]));
  }

  // size-descending topic order; class labels are already size-ordered but a
  // reduce step may have disturbed that
  std::vector<int> topic_order(classes);
  std::iota(topic_order.begin(), topic_order.end(), 0);
  std::stable_sort(topic_order.begin(), topic_order.end(), [&](int a, int b) {
    return topics[a].size > topics[b].size;
  });
  std::vector<int> new_id(classes);
  for (int r = 0; r < classes; ++r) new_id[topic_order[r]] = r;

  TopicModelOutput out;
  out.model_tag = model_tag;
  out.topics.resize(classes);
  for (int c = 0; c < classes; ++c) {
    out.topics[new_id[c]] = std::move(topics[c]);
    out.topics[new_id[c]].topic_id = new_id[c];
  }
  out.doc_ids.reserve(corpus.n_docs());
  out.assignment.reserve(corpus.n_docs());
  for (std::size_t d = 0; d < corpus.n_docs(); ++d) {
    out.doc_ids.push_back(corpus.documents[d].id);
    const int l = assign.labels[d];
    out.assignment.push_back(l < 0 ? -1 : new_id[l]);
  }
  return out;
}

ReducedTopics reduce_topics(const ClassTermMatrix& ctm,
                            const ClusterAssignment& assign, int target) {
  if (target < 1) throw InvalidArgument("reduce_topics: target must be >= 1");
  if (target > ctm.n_classes())
    throw InvalidArgument("reduce_topics: target " + std::to_string(target) +
                          " exceeds current topic count " +
                          std::to_string(ctm.n_classes()));

  ReducedTopics cur{ctm, assign};
  while (cur.ctm.n_classes() > target) {
    const int classes = cur.ctm.n_classes();
    const Eigen::MatrixXd scores = ctfidf_scores(cur.ctm);
    Eigen::MatrixXd unit = scores;
    for (int c = 0; c < classes; ++c) {
      const double nm = unit.row(c).norm();
      if (nm > 0.0) unit.row(c) /= nm;
    }

    // smallest topic; ties resolved toward the larger class label
    int smallest = 0;
    for (int c = 1; c < classes; ++c)
      if (cur.ctm.class_sizes[c] <= cur.ctm.class_sizes[smallest]) smallest = c;

    // most similar other topic; ties toward the lower label
    int best = -1;
    double best_sim = -std::numeric_limits<double>::max();
    for (int c = 0; c < classes; ++c) {
      if (c == smallest) continue;
      const double sim = unit.row(smallest).dot(unit.row(c));
      if (sim > best_sim) {
        best_sim = sim;
        best = c;
      }
    }

    // merge `smallest` into `best`, drop its row, relabel
    const int keep = best < smallest ? best : best - 1;  // label after removal
    Eigen::MatrixXd tf(classes - 1, cur.ctm.tf.cols());
    std::vector<int> sizes(classes - 1);
    int row = 0;
    for (int c = 0; c < classes; ++c) {
      if (c == smallest) continue;
      tf.row(row) = cur.ctm.tf.row(c);
      sizes[row] = cur.ctm.class_sizes[c];
      ++row;
    }
    tf.row(keep) += cur.ctm.tf.row(smallest);
    sizes[keep] += cur.ctm.class_sizes[smallest];

    cur.ctm.tf = std::move(tf);
    cur.ctm.class_sizes = std::move(sizes);
    cur.ctm.f_t = cur.ctm.tf.colwise().sum();
    cur.ctm.avg_words_per_class =
        cur.ctm.tf.sum() / static_cast<double>(classes - 1);

    for (auto& l : cur.assign.labels) {
      if (l < 0) continue;
      if (l == smallest)
        l = keep;
      else if (l > smallest)
        l -= 1;
    }
    cur.assign.n_clusters = classes - 1;
  }
  cur.assign.outlier_fraction = outlier_fraction(cur.assign);
  return cur;
}

TopicHierarchy hierarchy(const ClassTermMatrix& ctm) {
  const int k = ctm.n_classes();
  if (k < 2) throw InvalidArgument("hierarchy: need at least 2 topics");

  const Eigen::MatrixXd scores = ctfidf_scores(ctm);
  Eigen::MatrixXd unit = scores;
  for (int c = 0; c < k; ++c) {
    const double nm = unit.row(c).norm();
    if (nm > 0.0) unit.row(c) /= nm;
  }

  // active cluster state: current distance matrix, node ids, sizes
  std::vector<int> node_id(k), size(k, 1);
  std::iota(node_id.begin(), node_id.end(), 0);
  Eigen::MatrixXd dist(k, k);
  for (int i = 0; i < k; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < k; ++j) {
      const double d = 1.0 - unit.row(i).dot(unit.row(j));
      dist(i, j) = dist(j, i) = std::max(d, 0.0);
    }
  }

  TopicHierarchy h;
  std::vector<bool> active(k, true);
  int next_node = k;
  for (int step = 0; step < k - 1; ++step) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i < k; ++i) {
      if (!active[i]) continue;
      for (int j = i + 1; j < k; ++j) {
        if (!active[j]) continue;
        if (dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }

    const int ni = size[bi], nj = size[bj];
    h.merges.push_back({std::min(node_id[bi], node_id[bj]),
                        std::max(node_id[bi], node_id[bj]), best, ni + nj});

    // ward update (Lance-Williams on squared distances) into slot bi
    for (int t = 0; t < k; ++t) {
      if (!active[t] || t == bi || t == bj) continue;
      const int nt = size[t];
      const double d2 =
          ((ni + nt) * dist(bi, t) * dist(bi, t) +
           (nj + nt) * dist(bj, t) * dist(bj, t) - nt * best * best) /
          static_cast<double>(ni + nj + nt);
      dist(bi, t) = dist(t, bi) = std::sqrt(std::max(d2, 0.0));
    }
    active[bj] = false;
    size[bi] = ni + nj;
    node_id[bi] = next_node++;
  }
  return h;
}

void save_hierarchy_csv(const TopicHierarchy& h, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open output file: " + path);
  f << "left,right,distance,size\n";
  char buf[64];
  for (const auto& m : h.merges) {
    std::snprintf(buf, sizeof(buf), "%.9g", m.distance);
    f << m.left << "," << m.right << "," << buf << "," << m.size << "\n";
  }
}

}  // namespace topiclab
