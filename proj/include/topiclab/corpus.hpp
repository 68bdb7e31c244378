#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace topiclab {

struct RawDocument {
  std::string id;
  std::string text;
  std::optional<std::string> group;
};

struct Document {
  std::string id;
  std::vector<std::string> tokens;  // lowercase, [a-z]+ only, never empty
  std::optional<std::string> group;

  std::size_t length() const { return tokens.size(); }
};

struct Corpus {
  std::vector<Document> documents;
  std::unordered_map<std::string, int> vocabulary;  // term -> contiguous id
  std::vector<std::string> terms;                   // id -> term
  std::vector<int> doc_frequency;                   // id -> #docs containing term
  std::vector<std::vector<int>> token_ids;          // documents[i].tokens as ids

  std::size_t n_docs() const { return documents.size(); }
  std::size_t vocab_size() const { return terms.size(); }
  int term_id(const std::string& term) const {
    auto it = vocabulary.find(term);
    return it == vocabulary.end() ? -1 : it->second;
  }
};

struct StopwordList {
  std::unordered_set<std::string> words;
  std::string source_name;
};

// compiled-in ~300-word English list
StopwordList builtin_stopwords();
// one lowercase word per line
StopwordList load_stopwords(const std::string& path);

// Lowercase, then split on anything outside [a-z]; digits and punctuation
// vanish entirely, so tokens always match [a-z]+.
std::vector<std::string> tokenize(const std::string& text);

// Empty reason <=> document kept. Reasons: "placeholder", "empty".
struct PreprocessOutcome {
  std::optional<Document> doc;
  std::string reject_reason;
};

PreprocessOutcome preprocess(const RawDocument& raw, const StopwordList& stopwords,
                             bool remove_stopwords);

// Vocabulary ids are assigned in first-appearance order; doc_frequency counts
// presence, not multiplicity. min_df > 1 drops rare terms from the documents
// (documents emptied by the filter are dropped too).
Corpus build_corpus(std::vector<Document> docs, int min_df = 1);

// Uniform sample without replacement from documents whose length lies in
// [min_len, max_len]; result keeps original document order and is rebuilt as
// a fresh Corpus (own vocabulary).
Corpus sample_by_length(const Corpus& corpus, int min_len, int max_len, int n,
                        std::uint64_t seed);

// filter to documents with group == name (used by per-group experiment runs)
Corpus filter_by_group(const Corpus& corpus, const std::string& name);

// JSONL: {"id": str, "text": str, "group": str|null}
std::vector<RawDocument> load_raw_jsonl(const std::string& path);
// JSONL: {"id": str, "tokens": [str], "group": str|null}
void save_corpus_jsonl(const Corpus& corpus, const std::string& path);
Corpus load_corpus_jsonl(const std::string& path);

}  // namespace topiclab
