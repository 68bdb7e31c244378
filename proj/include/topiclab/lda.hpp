#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "topiclab/corpus.hpp"
#include "topiclab/topics.hpp"

namespace topiclab {

struct LdaParams {
  int k_topics = 10;
  double alpha = -1.0;  // -1: 50 / k_topics
  double beta = 0.01;
  int n_iterations = 500;
  std::uint64_t seed = 33;
};

struct LdaResult {
  TopicModelOutput output;
  Eigen::MatrixXd phi;    // k x V, rows sum to 1
  Eigen::MatrixXd theta;  // docs x k, rows sum to 1
  std::vector<double> loglik_history;  // collapsed log-likelihood per sweep
};

// Collapsed Gibbs sampling. Top words per topic ranked by phi with ties going
// to the lower term id; each document is assigned its argmax theta topic,
// ties to the lower topic id.
LdaResult lda_fit(const Corpus& corpus, const LdaParams& params, int top_n = 5);

}  // namespace topiclab
