#include "topiclab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <json.hpp>

#include "topiclab/errors.hpp"
#include "topiclab/rng.hpp"

namespace topiclab {

using nlohmann::json;

namespace {

std::string lowercase_trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out;
  out.reserve(e - b);
  for (std::size_t i = b; i < e; ++i)
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
  return out;
}

bool is_placeholder(const std::string& raw_text) {
  static const std::unordered_set<std::string> placeholders = {"", "-", "none",
                                                              "n/a", "."};
  return placeholders.count(lowercase_trim(raw_text)) > 0;
}

}  // namespace

StopwordList load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open stopword file: " + path);
  StopwordList list;
  list.source_name = path;
  std::string line;
  while (std::getline(in, line)) {
    std::string w = lowercase_trim(line);
    if (!w.empty()) list.words.insert(w);
  }
  if (list.words.empty()) throw ParseError("stopword file is empty: " + path);
  return list;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalpha(c) && c < 128) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

PreprocessOutcome preprocess(const RawDocument& raw, const StopwordList& stopwords,
                             bool remove_stopwords) {
  PreprocessOutcome out;
  if (is_placeholder(raw.text)) {
    out.reject_reason = "placeholder";
    return out;
  }
  std::vector<std::string> tokens = tokenize(raw.text);
  if (remove_stopwords) {
    std::vector<std::string> kept;
    kept.reserve(tokens.size());
    for (auto& t : tokens)
      if (!stopwords.words.count(t)) kept.push_back(std::move(t));
    tokens = std::move(kept);
  }
  if (tokens.empty()) {
    out.reject_reason = "empty";
    return out;
  }
  out.doc = Document{raw.id, std::move(tokens), raw.group};
  return out;
}

Corpus build_corpus(std::vector<Document> docs, int min_df) {
  if (docs.empty()) throw InvalidArgument("empty document collection");

  if (min_df > 1) {
    // document frequency over the incoming docs, then drop rare terms
    std::unordered_map<std::string, int> df;
    for (const auto& d : docs) {
      std::unordered_set<std::string> seen;
      for (const auto& t : d.tokens)
        if (seen.insert(t).second) ++df[t];
    }
    std::vector<Document> kept;
    kept.reserve(docs.size());
    for (auto& d : docs) {
      std::vector<std::string> toks;
      toks.reserve(d.tokens.size());
      for (auto& t : d.tokens)
        if (df[t] >= min_df) toks.push_back(std::move(t));
      if (!toks.empty()) {
        d.tokens = std::move(toks);
        kept.push_back(std::move(d));
      }
    }
    if (kept.empty())
      throw InvalidArgument("min_df filter removed every document");
    docs = std::move(kept);
  }

  Corpus corpus;
  corpus.documents = std::move(docs);
  corpus.token_ids.reserve(corpus.documents.size());
  for (const auto& d : corpus.documents) {
    std::vector<int> ids;
    ids.reserve(d.tokens.size());
    for (const auto& t : d.tokens) {
      auto [it, inserted] =
          corpus.vocabulary.emplace(t, static_cast<int>(corpus.terms.size()));
      if (inserted) {
        corpus.terms.push_back(t);
        corpus.doc_frequency.push_back(0);
      }
      ids.push_back(it->second);
    }
    corpus.token_ids.push_back(std::move(ids));
  }
  for (const auto& ids : corpus.token_ids) {
    std::unordered_set<int> seen(ids.begin(), ids.end());
    for (int t : seen) ++corpus.doc_frequency[t];
  }
  return corpus;
}

Corpus sample_by_length(const Corpus& corpus, int min_len, int max_len, int n,
                        std::uint64_t seed) {
  std::vector<int> qualifying;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    const int len = static_cast<int>(corpus.documents[i].length());
    if (len >= min_len && len <= max_len) qualifying.push_back(static_cast<int>(i));
  }
  if (n > static_cast<int>(qualifying.size()))
    throw InvalidArgument("insufficient documents in length band [" +
                          std::to_string(min_len) + "," + std::to_string(max_len) +
                          "]: requested " + std::to_string(n) + ", available " +
                          std::to_string(qualifying.size()));

  Rng rng(seed);
  // partial Fisher-Yates: first n slots hold the sample
  for (int i = 0; i < n; ++i) {
    const std::uint64_t j =
        static_cast<std::uint64_t>(i) + rng.uniform_int(qualifying.size() - i);
    std::swap(qualifying[i], qualifying[j]);
  }
  qualifying.resize(n);
  std::sort(qualifying.begin(), qualifying.end());

  std::vector<Document> sampled;
  sampled.reserve(n);
  for (int idx : qualifying) sampled.push_back(corpus.documents[idx]);
  return build_corpus(std::move(sampled));
}

Corpus filter_by_group(const Corpus& corpus, const std::string& name) {
  std::vector<Document> kept;
  for (const auto& d : corpus.documents)
    if (d.group && *d.group == name) kept.push_back(d);
  if (kept.empty()) throw InvalidArgument("no documents in group: " + name);
  return build_corpus(std::move(kept));
}

std::vector<RawDocument> load_raw_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input file: " + path);
  std::vector<RawDocument> docs;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("malformed JSON at line " + std::to_string(lineno) + ": " +
                           e.what(),
                       lineno);
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("text"))
      throw ParseError("line " + std::to_string(lineno) +
                           ": expected object with \"id\" and \"text\"",
                       lineno);
    RawDocument d;
    try {
      d.id = obj.at("id").get<std::string>();
      d.text = obj.at("text").get<std::string>();
      if (obj.contains("group") && !obj.at("group").is_null())
        d.group = obj.at("group").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
    if (!seen_ids.insert(d.id).second)
      throw ParseError("line " + std::to_string(lineno) + ": duplicate id \"" +
                           d.id + "\"",
                       lineno);
    docs.push_back(std::move(d));
  }
  return docs;
}

void save_corpus_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  for (const auto& d : corpus.documents) {
    json obj;
    obj["id"] = d.id;
    obj["tokens"] = d.tokens;
    if (d.group)
      obj["group"] = *d.group;
    else
      obj["group"] = nullptr;
    out << obj.dump() << "\n";
  }
}

Corpus load_corpus_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path);
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("malformed JSON at line " + std::to_string(lineno) + ": " +
                           e.what(),
                       lineno);
    }
    Document d;
    try {
      d.id = obj.at("id").get<std::string>();
      d.tokens = obj.at("tokens").get<std::vector<std::string>>();
      if (obj.contains("group") && !obj.at("group").is_null())
        d.group = obj.at("group").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
    if (d.tokens.empty())
      throw ParseError("line " + std::to_string(lineno) + ": document \"" + d.id +
                           "\" has no tokens",
                       lineno);
    docs.push_back(std::move(d));
  }
  if (docs.empty()) throw ParseError("corpus file has no documents: " + path);
  return build_corpus(std::move(docs));
}

}  // namespace topiclab
