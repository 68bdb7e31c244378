#include <fstream>
#include <json.hpp>

#include "topiclab/errors.hpp"
#include "topiclab/topics.hpp"

namespace topiclab {

using nlohmann::json;

void save_topics_json(const TopicModelOutput& out, const std::string& path) {
  json root;
  root["model_tag"] = out.model_tag;
  root["n_requested"] = out.n_requested;
  json topics = json::array();
  for (const auto& t : out.topics) {
    json words = json::array();
    for (const auto& [term, score] : t.top_words) words.push_back({term, score});
    topics.push_back({{"id", t.topic_id}, {"size", t.size}, {"words", words}});
  }
  root["topics"] = topics;
  json assignment = json::array();
  for (std::size_t i = 0; i < out.doc_ids.size(); ++i)
    assignment.push_back({{"doc", out.doc_ids[i]}, {"topic", out.assignment[i]}});
  root["assignment"] = assignment;

  std::ofstream f(path);
  if (!f) throw ParseError("cannot open output file: " + path);
  f << root.dump(2) << "\n";
}

TopicModelOutput load_topics_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open topics file: " + path);
  json root;
  try {
    f >> root;
  } catch (const json::exception& e) {
    throw ParseError("malformed topics file " + path + ": " + e.what());
  }
  TopicModelOutput out;
  try {
    out.model_tag = root.at("model_tag").get<std::string>();
    out.n_requested = root.value("n_requested", 0);
    for (const auto& t : root.at("topics")) {
      Topic topic;
      topic.topic_id = t.at("id").get<int>();
      topic.size = t.at("size").get<int>();
      for (const auto& w : t.at("words"))
        topic.top_words.emplace_back(w.at(0).get<std::string>(),
                                     w.at(1).get<double>());
      out.topics.push_back(std::move(topic));
    }
    if (root.contains("assignment")) {
      for (const auto& a : root.at("assignment")) {
        out.doc_ids.push_back(a.at("doc").get<std::string>());
        out.assignment.push_back(a.at("topic").get<int>());
      }
    }
  } catch (const json::exception& e) {
    throw ParseError("malformed topics file " + path + ": " + e.what());
  }
  return out;
}

void save_assignment_csv(const TopicModelOutput& out, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open output file: " + path);
  f << "doc_id,label\n";
  for (std::size_t i = 0; i < out.doc_ids.size(); ++i)
    f << out.doc_ids[i] << "," << out.assignment[i] << "\n";
}

}  // namespace topiclab
