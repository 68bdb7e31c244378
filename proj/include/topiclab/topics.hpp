#pragma once

#include <string>
#include <utility>
#include <vector>

namespace topiclab {

struct Topic {
  int topic_id = 0;
  std::vector<std::pair<std::string, double>> top_words;  // score non-increasing
  int size = 0;                                           // document count
};

// Shared output shape for every model (LDA and both BERTopic variants):
// ranked top words per topic plus a hard per-document assignment.
struct TopicModelOutput {
  std::vector<Topic> topics;       // ordered by size descending, ids contiguous
  std::vector<std::string> doc_ids;
  std::vector<int> assignment;     // per doc: topic id, or -1 = noise
  int n_requested = 0;             // 0 = free (no requested count)
  std::string model_tag;

  int n_topics() const { return static_cast<int>(topics.size()); }
};

// JSON dump: {model_tag, n_requested, topics: [{id, size, words: [[term, score]...]}],
//             assignment: [{doc, topic}...]}
void save_topics_json(const TopicModelOutput& out, const std::string& path);
TopicModelOutput load_topics_json(const std::string& path);

// CSV "doc_id,label"
void save_assignment_csv(const TopicModelOutput& out, const std::string& path);

}  // namespace topiclab
