#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "topiclab/corpus.hpp"
#include "topiclab/topics.hpp"

namespace topiclab {

// Boolean presence counts over a reference corpus. With window == 0 the
// counting unit is the whole document; window w > 0 counts presence inside
// every length-w sliding window instead (a document shorter than w is one
// window).
class CooccurrenceStats {
 public:
  static CooccurrenceStats build(const Corpus& corpus, int window = 0);

  int n_units() const { return n_units_; }
  int doc_freq(const std::string& term) const;
  int pair_freq(const std::string& a, const std::string& b) const;

 private:
  int n_units_ = 0;
  std::unordered_map<std::string, int> term_ids_;
  std::vector<std::vector<int>> postings_;  // term id -> sorted unit ids
};

// NPMI(i,j) = ln((P_ij + eps) / (P_i * P_j)) / (-ln(P_ij + eps)); topic score
// is the mean over unordered pairs of its emitted top-n words, model score
// the mean over topics. Pairs with a zero marginal are pinned to -1.
double coherence_npmi(const TopicModelOutput& out, const CooccurrenceStats& stats,
                      int n = 5, double eps = 1e-12);

// unique words across all topics' top-n divided by the number emitted
double diversity(const TopicModelOutput& out, int n = 5);

struct EvalResult {
  double tc = 0.0;
  double td = 0.0;
  double outlier_frac = 0.0;
  int n_topics_effective = 0;
};

EvalResult evaluate(const TopicModelOutput& out, const CooccurrenceStats& stats,
                    int n = 5, double eps = 1e-12);

}  // namespace topiclab
