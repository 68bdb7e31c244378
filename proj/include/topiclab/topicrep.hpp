#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "topiclab/cluster.hpp"
#include "topiclab/corpus.hpp"
#include "topiclab/topics.hpp"

namespace topiclab {

// Per-cluster term counts with the quantities the c-TF-IDF formula needs.
// Noise documents (label -1) are excluded from every count. Row c corresponds
// to cluster label c of the assignment it was built from.
struct ClassTermMatrix {
  Eigen::MatrixXd tf;              // classes x vocab, raw term counts
  Eigen::VectorXd f_t;             // per-term frequency summed over classes
  double avg_words_per_class = 0.0;  // A in the scoring formula
  std::vector<int> class_sizes;    // documents per class

  int n_classes() const { return static_cast<int>(tf.rows()); }
};

ClassTermMatrix ctfidf(const Corpus& corpus, const ClusterAssignment& assign);

// W[c,t] = tf[c,t] * ln(1 + A / f_t)
Eigen::MatrixXd ctfidf_scores(const ClassTermMatrix& ctm);

// top-n terms per class by score (ties to the lower term id); topics ordered
// by size descending
TopicModelOutput extract_topics(const ClassTermMatrix& ctm, const Corpus& corpus,
                                const ClusterAssignment& assign, int n,
                                const std::string& model_tag);

// Iteratively merge the smallest topic into its most cosine-similar peer
// (L2-normalized c-TF-IDF score vectors) until `target` classes remain.
// Counts and scores are recomputed after every merge.
struct ReducedTopics {
  ClassTermMatrix ctm;
  ClusterAssignment assign;
};
ReducedTopics reduce_topics(const ClassTermMatrix& ctm,
                            const ClusterAssignment& assign, int target);

struct TopicHierarchy {
  struct Merge {
    int left, right;  // node ids; originals 0..K-1, merge i creates K+i
    double distance;
    int size;
  };
  std::vector<Merge> merges;
};

// Agglomerative ward linkage over the classes' c-TF-IDF vectors with cosine
// distance as the base dissimilarity (Lance-Williams recurrence on squared
// distances).
TopicHierarchy hierarchy(const ClassTermMatrix& ctm);

void save_hierarchy_csv(const TopicHierarchy& h, const std::string& path);

}  // namespace topiclab
