#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "topiclab/corpus.hpp"

namespace topiclab {

struct EmbeddingMatrix {
  Eigen::MatrixXf vectors;           // rows = documents
  std::vector<std::string> doc_ids;  // row order
  std::string provenance;

  int rows() const { return static_cast<int>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }
};

struct FallbackEmbedderConfig {
  int dim = 256;
  std::uint64_t seed = 33;
  enum class Weighting { tf, tfidf };
  Weighting weighting = Weighting::tfidf;
};

// Hashed sign-random projection of each document's (tf or tf-idf weighted)
// bag of words. The +-1 feature vector of a term is generated from a seed
// derived from the term *string*, so adding vocabulary never changes the
// vectors of existing terms. Rows are L2-normalized.
EmbeddingMatrix fallback_embed(const Corpus& corpus, const FallbackEmbedderConfig& cfg);

// Reads a "TFE1" binary file or an "id,v0,..." CSV (detected by content) and
// reorders rows into corpus document order. Ids present in the file but not
// in the corpus are ignored; corpus ids missing from the file are an error.
EmbeddingMatrix load_embeddings(const std::string& path, const Corpus& corpus);

// binary format: "TFE1" | u32 rows | u32 dim | row-major little-endian f32 |
// per row: u32 byte length + UTF-8 id
void save_embeddings_binary(const EmbeddingMatrix& emb, const std::string& path);
void save_embeddings_csv(const EmbeddingMatrix& emb, const std::string& path);

}  // namespace topiclab
