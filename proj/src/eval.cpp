#include "topiclab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "topiclab/errors.hpp"

namespace topiclab {

CooccurrenceStats CooccurrenceStats::build(const Corpus& corpus, int window) {
  if (corpus.n_docs() == 0) throw InvalidArgument("empty reference corpus");
  CooccurrenceStats stats;
  stats.term_ids_ = corpus.vocabulary;
  stats.postings_.resize(corpus.vocab_size());

  int unit = 0;
  std::unordered_set<int> seen;
  auto record = [&](auto begin, auto end) {
    seen.clear();
    for (auto it = begin; it != end; ++it)
      if (seen.insert(*it).second) stats.postings_[*it].push_back(unit);
    ++unit;
  };

  for (const auto& ids : corpus.token_ids) {
    if (window <= 0 || static_cast<int>(ids.size()) <= window) {
      record(ids.begin(), ids.end());
    } else {
      for (std::size_t start = 0; start + window <= ids.size(); ++start)
        record(ids.begin() + start, ids.begin() + start + window);
    }
  }
  stats.n_units_ = unit;
  return stats;
}

int CooccurrenceStats::doc_freq(const std::string& term) const {
  auto it = term_ids_.find(term);
  if (it == term_ids_.end()) return 0;
  return static_cast<int>(postings_[it->second].size());
}

int CooccurrenceStats::pair_freq(const std::string& a, const std::string& b) const {
  auto ia = term_ids_.find(a);
  auto ib = term_ids_.find(b);
  if (ia == term_ids_.end() || ib == term_ids_.end()) return 0;
  const auto& pa = postings_[ia->second];
  const auto& pb = postings_[ib->second];
  int count = 0;
  std::size_t x = 0, y = 0;
  while (x < pa.size() && y < pb.size()) {
    if (pa[x] < pb[y])
      ++x;
    else if (pa[x] > pb[y])
      ++y;
    else {
      ++count;
      ++x;
      ++y;
    }
  }
  return count;
}

double coherence_npmi(const TopicModelOutput& out, const CooccurrenceStats& stats,
                      int n, double eps) {
  if (out.topics.empty()) throw InvalidArgument("coherence: no topics");
  const double total = static_cast<double>(stats.n_units());

  double topic_sum = 0.0;
  for (const auto& topic : out.topics) {
    const int m = std::min<int>(n, static_cast<int>(topic.top_words.size()));
    if (m < 2)
      throw InvalidArgument("coherence: topic " + std::to_string(topic.topic_id) +
                            " has fewer than 2 top words");
    double pair_sum = 0.0;
    int pairs = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        const std::string& wi = topic.top_words[i].first;
        const std::string& wj = topic.top_words[j].first;
        const double pi = stats.doc_freq(wi) / total;
        const double pj = stats.doc_freq(wj) / total;
        double npmi;
        if (pi <= 0.0 || pj <= 0.0) {
          npmi = -1.0;  // never-observed words are maximally incoherent
        } else {
          const double pij = stats.pair_freq(wi, wj) / total + eps;
          npmi = std::log(pij / (pi * pj)) / (-std::log(pij));
          npmi = std::clamp(npmi, -1.0, 1.0);
        }
        pair_sum += npmi;
        ++pairs;
      }
    }
    topic_sum += pair_sum / pairs;
  }
  return topic_sum / static_cast<double>(out.topics.size());
}

double diversity(const TopicModelOutput& out, int n) {
  if (out.topics.empty()) throw InvalidArgument("diversity: no topics");
  std::set<std::string> unique;
  int emitted = 0;
  for (const auto& topic : out.topics) {
    const int m = std::min<int>(n, static_cast<int>(topic.top_words.size()));
    for (int i = 0; i < m; ++i) unique.insert(topic.top_words[i].first);
    emitted += m;
  }
  if (emitted == 0) return 0.0;
  return static_cast<double>(unique.size()) / static_cast<double>(emitted);
}

EvalResult evaluate(const TopicModelOutput& out, const CooccurrenceStats& stats,
                    int n, double eps) {
  EvalResult r;
  r.tc = coherence_npmi(out, stats, n, eps);
  r.td = diversity(out, n);
  std::size_t noise = 0;
  for (int l : out.assignment)
    if (l == -1) ++noise;
  r.outlier_frac = out.assignment.empty()
                       ? 0.0
                       : static_cast<double>(noise) / out.assignment.size();
  r.n_topics_effective = out.n_topics();
  return r;
}

}  // namespace topiclab
