#include "topiclab/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "topiclab/errors.hpp"
#include "topiclab/rng.hpp"

namespace topiclab {

namespace {

// +-1 feature vector for one term, derived from the term string alone
void term_sign_vector(const std::string& term, std::uint64_t seed, int dim,
                      std::vector<float>& out) {
  out.resize(dim);
  Rng rng(derive_seed(seed, term));
  int j = 0;
  while (j < dim) {
    std::uint64_t bits = rng.next_u64();
    for (int b = 0; b < 64 && j < dim; ++b, ++j)
      out[j] = (bits >> b) & 1 ? 1.0f : -1.0f;
  }
}

}  // namespace

EmbeddingMatrix fallback_embed(const Corpus& corpus, const FallbackEmbedderConfig& cfg) {
  if (corpus.n_docs() == 0) throw InvalidArgument("empty corpus");
  if (cfg.dim < 2) throw InvalidArgument("embedding dim must be >= 2");

  const int n = static_cast<int>(corpus.n_docs());
  const double n_docs = static_cast<double>(n);

  EmbeddingMatrix emb;
  emb.vectors.resize(n, cfg.dim);
  emb.provenance = "fallback";
  emb.doc_ids.reserve(n);

  std::vector<float> sign;
  std::vector<double> acc(cfg.dim);
  for (int d = 0; d < n; ++d) {
    emb.doc_ids.push_back(corpus.documents[d].id);

    // term counts in ascending term-id order for a fixed summation order
    std::map<int, int> counts;
    for (int t : corpus.token_ids[d]) ++counts[t];

    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& [tid, count] : counts) {
      double w = static_cast<double>(count);
      if (cfg.weighting == FallbackEmbedderConfig::Weighting::tfidf) {
        const double df = static_cast<double>(corpus.doc_frequency[tid]);
        w *= std::log((1.0 + n_docs) / (1.0 + df)) + 1.0;
      }
      term_sign_vector(corpus.terms[tid], cfg.seed, cfg.dim, sign);
      for (int j = 0; j < cfg.dim; ++j) acc[j] += w * sign[j];
    }

    double norm_sq = 0.0;
    for (double v : acc) norm_sq += v * v;
    const double inv = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 0.0;
    for (int j = 0; j < cfg.dim; ++j)
      emb.vectors(d, j) = static_cast<float>(acc[j] * inv);
  }
  return emb;
}

void save_embeddings_binary(const EmbeddingMatrix& emb, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open output file: " + path);
  f.write("TFE1", 4);
  const std::uint32_t rows = static_cast<std::uint32_t>(emb.rows());
  const std::uint32_t dim = static_cast<std::uint32_t>(emb.dim());
  f.write(reinterpret_cast<const char*>(&rows), 4);
  f.write(reinterpret_cast<const char*>(&dim), 4);
  for (int i = 0; i < emb.rows(); ++i)
    for (int j = 0; j < emb.dim(); ++j) {
      const float v = emb.vectors(i, j);
      f.write(reinterpret_cast<const char*>(&v), 4);
    }
  for (const auto& id : emb.doc_ids) {
    const std::uint32_t len = static_cast<std::uint32_t>(id.size());
    f.write(reinterpret_cast<const char*>(&len), 4);
    f.write(id.data(), len);
  }
  if (!f) throw ParseError("write failed: " + path);
}

void save_embeddings_csv(const EmbeddingMatrix& emb, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open output file: " + path);
  f << "id";
  for (int j = 0; j < emb.dim(); ++j) f << ",v" << j;
  f << "\n";
  std::ostringstream row;
  for (int i = 0; i < emb.rows(); ++i) {
    row.str("");
    row << emb.doc_ids[i];
    for (int j = 0; j < emb.dim(); ++j) row << "," << emb.vectors(i, j);
    f << row.str() << "\n";
  }
}

namespace {

EmbeddingMatrix read_binary(std::ifstream& f, const std::string& path) {
  char magic[4];
  f.read(magic, 4);
  std::uint32_t rows = 0, dim = 0;
  f.read(reinterpret_cast<char*>(&rows), 4);
  f.read(reinterpret_cast<char*>(&dim), 4);
  if (!f) throw ParseError("truncated header in " + path);
  if (dim == 0) throw InvalidArgument("embedding file has dim 0: " + path);
  if (rows == 0) throw InvalidArgument("embedding file has no rows: " + path);

  EmbeddingMatrix emb;
  emb.vectors.resize(rows, dim);
  std::vector<float> row(dim);
  for (std::uint32_t i = 0; i < rows; ++i) {
    f.read(reinterpret_cast<char*>(row.data()), 4ull * dim);
    if (!f)
      throw ParseError("truncated payload at row " + std::to_string(i) + " in " +
                       path);
    for (std::uint32_t j = 0; j < dim; ++j) emb.vectors(i, j) = row[j];
  }
  for (std::uint32_t i = 0; i < rows; ++i) {
    std::uint32_t len = 0;
    f.read(reinterpret_cast<char*>(&len), 4);
    if (!f || len > (1u << 20))
      throw ParseError("truncated id table at row " + std::to_string(i) + " in " +
                       path);
    std::string id(len, '\0');
    f.read(id.data(), len);
    if (!f)
      throw ParseError("truncated id table at row " + std::to_string(i) + " in " +
                       path);
    emb.doc_ids.push_back(std::move(id));
  }
  emb.provenance = path;
  return emb;
}

EmbeddingMatrix read_csv(std::ifstream& f, const std::string& path) {
  std::string header;
  if (!std::getline(f, header)) throw ParseError("empty embedding file: " + path);
  std::size_t cols = std::count(header.begin(), header.end(), ',');
  if (cols == 0 || header.substr(0, 2) != "id")
    throw ParseError("bad embedding CSV header in " + path);
  const int dim = static_cast<int>(cols);

  std::vector<std::string> ids;
  std::vector<float> values;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    if (!std::getline(ss, field, ','))
      throw ParseError("bad CSV row at line " + std::to_string(lineno), lineno);
    ids.push_back(field);
    int got = 0;
    while (std::getline(ss, field, ',')) {
      try {
        values.push_back(std::stof(field));
      } catch (const std::exception&) {
        throw ParseError("bad float at line " + std::to_string(lineno) + ": " +
                             field,
                         lineno);
      }
      ++got;
    }
    if (got != dim)
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                           std::to_string(dim) + " values, got " +
                           std::to_string(got),
                       lineno);
  }
  if (ids.empty()) throw ParseError("embedding CSV has no rows: " + path);

  EmbeddingMatrix emb;
  emb.vectors.resize(static_cast<int>(ids.size()), dim);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (int j = 0; j < dim; ++j)
      emb.vectors(static_cast<int>(i), j) = values[i * dim + j];
  emb.doc_ids = std::move(ids);
  emb.provenance = path;
  return emb;
}

}  // namespace

EmbeddingMatrix load_embeddings(const std::string& path, const Corpus& corpus) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open embedding file: " + path);
  char magic[5] = {0};
  f.read(magic, 4);
  f.seekg(0);
  EmbeddingMatrix raw = std::memcmp(magic, "TFE1", 4) == 0 ? read_binary(f, path)
                                                           : read_csv(f, path);

  if (!raw.vectors.allFinite())
    throw ParseError("embedding file contains non-finite values: " + path);

  std::unordered_map<std::string, int> row_of;
  for (int i = 0; i < raw.rows(); ++i) row_of.emplace(raw.doc_ids[i], i);

  std::vector<std::string> missing;
  for (const auto& d : corpus.documents)
    if (!row_of.count(d.id)) missing.push_back(d.id);
  if (!missing.empty()) {
    std::string msg = "embedding file " + path + " is missing " +
                      std::to_string(missing.size()) + " corpus id(s), first: " +
                      missing.front();
    throw IdMismatch(msg, std::move(missing));
  }

  EmbeddingMatrix emb;
  emb.vectors.resize(static_cast<int>(corpus.n_docs()), raw.dim());
  emb.doc_ids.reserve(corpus.n_docs());
  for (std::size_t i = 0; i < corpus.n_docs(); ++i) {
    const auto& id = corpus.documents[i].id;
    emb.vectors.row(static_cast<int>(i)) = raw.vectors.row(row_of.at(id));
    emb.doc_ids.push_back(id);
  }
  emb.provenance = path;
  return emb;
}

}  // namespace topiclab
