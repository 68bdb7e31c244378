#include "topiclab/lda.hpp"

#include <algorithm>
#include <cmath>

#include "topiclab/errors.hpp"
#include "topiclab/rng.hpp"

namespace topiclab {

LdaResult lda_fit(const Corpus& corpus, const LdaParams& params, int top_n) {
  const int n_docs = static_cast<int>(corpus.n_docs());
  const int vocab = static_cast<int>(corpus.vocab_size());
  const int k = params.k_topics;
  if (n_docs == 0) throw InvalidArgument("lda: empty corpus");
  if (k < 1) throw InvalidArgument("lda: k_topics must be >= 1");
  for (int d = 0; d < n_docs; ++d)
    if (corpus.token_ids[d].empty())
      throw InvalidArgument("lda: document \"" + corpus.documents[d].id +
                            "\" has no tokens");

  const double alpha = params.alpha > 0.0 ? params.alpha : 50.0 / k;
  const double beta = params.beta;
  const double v_beta = vocab * beta;

  // count tables; n_kw is term-major so the resampling scan over topics is
  // a contiguous walk
  std::vector<int> n_dk(static_cast<std::size_t>(n_docs) * k, 0);
  std::vector<int> n_kw(static_cast<std::size_t>(vocab) * k, 0);
  std::vector<int> n_k(k, 0);

  std::vector<std::vector<int>> z(n_docs);
  Rng rng(params.seed);
  for (int d = 0; d < n_docs; ++d) {
    const auto& tokens = corpus.token_ids[d];
    z[d].resize(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const int topic = static_cast<int>(rng.uniform_int(k));
      z[d][i] = topic;
      ++n_dk[static_cast<std::size_t>(d) * k + topic];
      ++n_kw[static_cast<std::size_t>(tokens[i]) * k + topic];
      ++n_k[topic];
    }
  }

  LdaResult result;
  std::vector<double> weights(k);
  for (int iter = 0; iter < params.n_iterations; ++iter) {
    for (int d = 0; d < n_docs; ++d) {
      const auto& tokens = corpus.token_ids[d];
      int* doc_counts = n_dk.data() + static_cast<std::size_t>(d) * k;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const int w = tokens[i];
        const int old = z[d][i];
        int* term_counts = n_kw.data() + static_cast<std::size_t>(w) * k;
        --doc_counts[old];
        --term_counts[old];
        --n_k[old];

        double total = 0.0;
        for (int t = 0; t < k; ++t) {
          total += (doc_counts[t] + alpha) * (term_counts[t] + beta) /
                   (n_k[t] + v_beta);
          weights[t] = total;
        }
        const double u = rng.uniform() * total;
        int chosen = k - 1;
        for (int t = 0; t < k; ++t) {
          if (u < weights[t]) {
            chosen = t;
            break;
          }
        }
        z[d][i] = chosen;
        ++doc_counts[chosen];
        ++term_counts[chosen];
        ++n_k[chosen];
      }
    }

    // collapsed log-likelihood (topic-word part plus doc-topic part);
    // zero-count cells contribute lgamma(prior), folded in per nonzero cell
    const double lg_beta = std::lgamma(beta);
    const double lg_alpha = std::lgamma(alpha);
    double ll = k * std::lgamma(v_beta);
    for (int t = 0; t < k; ++t) ll -= std::lgamma(n_k[t] + v_beta);
    for (int w = 0; w < vocab; ++w) {
      const int* term_counts = n_kw.data() + static_cast<std::size_t>(w) * k;
      for (int t = 0; t < k; ++t)
        if (term_counts[t] > 0)
          ll += std::lgamma(term_counts[t] + beta) - lg_beta;
    }
    ll += n_docs * std::lgamma(k * alpha);
    for (int d = 0; d < n_docs; ++d) {
      const int* doc_counts = n_dk.data() + static_cast<std::size_t>(d) * k;
      const double len = static_cast<double>(corpus.token_ids[d].size());
      for (int t = 0; t < k; ++t)
        if (doc_counts[t] > 0)
          ll += std::lgamma(doc_counts[t] + alpha) - lg_alpha;
      ll -= std::lgamma(len + k * alpha);
    }
    result.loglik_history.push_back(ll);
  }

  // phi/theta from the final state
  result.phi.resize(k, vocab);
  for (int t = 0; t < k; ++t)
    for (int w = 0; w < vocab; ++w)
      result.phi(t, w) =
          (n_kw[static_cast<std::size_t>(w) * k + t] + beta) / (n_k[t] + v_beta);
  result.theta.resize(n_docs, k);
  for (int d = 0; d < n_docs; ++d) {
    const double len = static_cast<double>(corpus.token_ids[d].size());
    for (int t = 0; t < k; ++t)
      result.theta(d, t) =
          (n_dk[static_cast<std::size_t>(d) * k + t] + alpha) / (len + k * alpha);
  }

  // hard document assignment: argmax theta, ties to the lower topic id
  std::vector<int> doc_topic(n_docs);
  std::vector<int> sizes(k, 0);
  for (int d = 0; d < n_docs; ++d) {
    int best = 0;
    for (int t = 1; t < k; ++t)
      if (result.theta(d, t) > result.theta(d, best)) best = t;
    doc_topic[d] = best;
    ++sizes[best];
  }

  // top words by phi, ties to the lower term id
  std::vector<Topic> topics(k);
  std::vector<int> term_order(vocab);
  for (int t = 0; t < k; ++t) {
    topics[t].topic_id = t;
    topics[t].size = sizes[t];
    const int take = std::min(top_n, vocab);
    for (int w = 0; w < vocab; ++w) term_order[w] = w;
    std::partial_sort(term_order.begin(), term_order.begin() + take,
                      term_order.end(), [&](int a, int b) {
                        if (result.phi(t, a) != result.phi(t, b))
                          return result.phi(t, a) > result.phi(t, b);
                        return a < b;
                      });
    for (int r = 0; r < take; ++r)
      topics[t].top_words.emplace_back(corpus.terms[term_order[r]],
                                       result.phi(t, term_order[r]));
  }

  // order topics by size descending (ties keep lower original topic id)
  std::vector<int> topic_order(k);
  for (int t = 0; t < k; ++t) topic_order[t] = t;
  std::stable_sort(topic_order.begin(), topic_order.end(),
                   [&](int a, int b) { return sizes[a] > sizes[b]; });
  std::vector<int> new_id(k);
  for (int r = 0; r < k; ++r) new_id[topic_order[r]] = r;

  TopicModelOutput& out = result.output;
  out.model_tag = "lda";
  out.n_requested = k;
  out.topics.resize(k);
  for (int t = 0; t < k; ++t) {
    out.topics[new_id[t]] = std::move(topics[t]);
    out.topics[new_id[t]].topic_id = new_id[t];
  }
  out.doc_ids.reserve(n_docs);
  out.assignment.reserve(n_docs);
  for (int d = 0; d < n_docs; ++d) {
    out.doc_ids.push_back(corpus.documents[d].id);
    out.assignment.push_back(new_id[doc_topic[d]]);
  }
  return result;
}

}  // namespace topiclab
