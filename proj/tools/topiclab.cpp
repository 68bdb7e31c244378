// topiclab: preprocess / embed / fit / eval / experiment front door.
// Exit codes: 0 ok, 1 fatal, 2 partial (some experiment cells failed),
// 3 usage or spec error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "topiclab/cluster.hpp"
#include "topiclab/corpus.hpp"
#include "topiclab/embedding.hpp"
#include "topiclab/errors.hpp"
#include "topiclab/eval.hpp"
#include "topiclab/harness.hpp"
#include "topiclab/lda.hpp"
#include "topiclab/rng.hpp"
#include "topiclab/topicrep.hpp"
#include "topiclab/topics.hpp"
#include "topiclab/umap.hpp"

using namespace topiclab;

namespace {

void print_resolved(const std::map<std::string, std::string>& params) {
  std::cout << "resolved parameters:\n";
  for (const auto& [key, value] : params)
    std::cout << "  " << key << "=" << value << "\n";
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct PreprocessArgs {
  std::string input, output;
  std::string stopwords_path;
  bool keep_stopwords = false;
  int min_df = 1;
};

int cmd_preprocess(const PreprocessArgs& a) {
  print_resolved({{"input", a.input},
                  {"output", a.output},
                  {"stopwords", a.stopwords_path.empty() ? "builtin"
                                                         : a.stopwords_path},
                  {"remove_stopwords", a.keep_stopwords ? "false" : "true"},
                  {"min_df", std::to_string(a.min_df)}});
  const std::vector<RawDocument> raw = load_raw_jsonl(a.input);
  const StopwordList stop = a.stopwords_path.empty()
                                ? builtin_stopwords()
                                : load_stopwords(a.stopwords_path);
  std::vector<Document> docs;
  std::map<std::string, int> rejected;
  for (const auto& r : raw) {
    PreprocessOutcome out = preprocess(r, stop, !a.keep_stopwords);
    if (out.doc)
      docs.push_back(std::move(*out.doc));
    else
      rejected[out.reject_reason] += 1;
  }
  if (docs.empty())
    throw Error("empty corpus: every document was rejected by preprocessing");
  const Corpus corpus = build_corpus(std::move(docs), a.min_df);
  if (corpus.n_docs() == 0)
    throw Error("empty corpus: no documents survived the min_df filter");
  save_corpus_jsonl(corpus, a.output);
  std::cout << "kept " << corpus.n_docs() << " of " << raw.size()
            << " documents, vocabulary " << corpus.vocab_size() << " terms\n";
  for (const auto& [reason, count] : rejected)
    std::cout << "rejected " << count << " (" << reason << ")\n";
  return 0;
}

struct EmbedArgs {
  std::string corpus, output;
  std::string format = "binary";
  std::string weighting = "tfidf";
  int dim = 256;
  std::uint64_t seed = 33;
};

int cmd_embed(const EmbedArgs& a) {
  print_resolved({{"corpus", a.corpus},
                  {"output", a.output},
                  {"format", a.format},
                  {"dim", std::to_string(a.dim)},
                  {"weighting", a.weighting},
                  {"seed", std::to_string(a.seed)}});
  const Corpus corpus = load_corpus_jsonl(a.corpus);
  FallbackEmbedderConfig cfg;
  cfg.dim = a.dim;
  cfg.seed = a.seed;
  cfg.weighting = a.weighting == "tf" ? FallbackEmbedderConfig::Weighting::tf
                                      : FallbackEmbedderConfig::Weighting::tfidf;
  const EmbeddingMatrix emb = fallback_embed(corpus, cfg);
  if (a.format == "csv")
    save_embeddings_csv(emb, a.output);
  else
    save_embeddings_binary(emb, a.output);
  std::cout << "wrote " << emb.rows() << " x " << emb.dim() << " embeddings ("
            << emb.provenance << ")\n";
  return 0;
}

struct FitArgs {
  std::string corpus, model = "bertopic-hdbscan";
  std::string embeddings;  // empty: fallback embedder
  std::string topics_out = "topics.json", assignment_out = "assignment.csv";
  int n_topics = 0;  // 0: free (HDBSCAN only)
  std::uint64_t seed = 33;
  int dim = 256;
  std::string weighting = "tfidf";
  UmapParams umap;
  HdbscanParams hdbscan;
  std::string kmeans_mode = "thesis";
  int kmeans_base_k = 50;
  LdaParams lda;
  int top_n = 5;
  int window = 0;
};

int cmd_fit(const FitArgs& a) {
  std::map<std::string, std::string> resolved = {
      {"corpus", a.corpus},
      {"model", a.model},
      {"embeddings", a.embeddings.empty() ? "fallback" : a.embeddings},
      {"n_topics", a.n_topics > 0 ? std::to_string(a.n_topics) : "free"},
      {"seed", std::to_string(a.seed)},
      {"topics_out", a.topics_out},
      {"assignment_out", a.assignment_out},
      {"top_n", std::to_string(a.top_n)},
      {"window", std::to_string(a.window)}};

  const Corpus corpus = load_corpus_jsonl(a.corpus);
  TopicModelOutput out;

  if (a.model == "lda") {
    if (a.n_topics <= 0)
      throw InvalidArgument("lda requires --n-topics >= 1");
    LdaParams lp = a.lda;
    lp.k_topics = a.n_topics;
    lp.seed = derive_seed(a.seed, "lda");
    resolved["alpha"] =
        fmt6(lp.alpha < 0 ? 50.0 / lp.k_topics : lp.alpha);
    resolved["beta"] = fmt6(lp.beta);
    resolved["iterations"] = std::to_string(lp.n_iterations);
    print_resolved(resolved);
    out = lda_fit(corpus, lp, a.top_n).output;
  } else if (a.model == "bertopic-hdbscan" || a.model == "bertopic-kmeans") {
    EmbeddingMatrix embedded;
    if (!a.embeddings.empty()) {
      embedded = load_embeddings(a.embeddings, corpus);
    } else {
      FallbackEmbedderConfig cfg;
      cfg.dim = a.dim;
      cfg.seed = derive_seed(a.seed, "embed");
      cfg.weighting = a.weighting == "tf"
                          ? FallbackEmbedderConfig::Weighting::tf
                          : FallbackEmbedderConfig::Weighting::tfidf;
      embedded = fallback_embed(corpus, cfg);
      resolved["dim"] = std::to_string(a.dim);
      resolved["weighting"] = a.weighting;
    }
    UmapParams up = a.umap;
    up.seed = derive_seed(a.seed, "umap");
    resolved["umap.n_neighbors"] = std::to_string(up.n_neighbors);
    resolved["umap.n_components"] = std::to_string(up.n_components);
    resolved["umap.min_dist"] = fmt6(up.min_dist);
    resolved["umap.n_epochs"] = std::to_string(up.n_epochs);

    ClusterAssignment assign;
    if (a.model == "bertopic-hdbscan") {
      resolved["hdbscan.min_cluster_size"] =
          std::to_string(a.hdbscan.min_cluster_size);
      resolved["hdbscan.min_samples"] = std::to_string(
          a.hdbscan.min_samples < 0 ? a.hdbscan.min_cluster_size
                                    : a.hdbscan.min_samples);
      print_resolved(resolved);
      const EmbeddingMatrix reduced = umap_reduce(embedded, up);
      assign = hdbscan(reduced.vectors, a.hdbscan).assign;
    } else {
      const int requested = a.n_topics > 0 ? a.n_topics : a.kmeans_base_k;
      KMeansParams kp;
      kp.k = std::min<int>(a.kmeans_mode == "thesis"
                               ? std::max(a.kmeans_base_k, requested)
                               : requested,
                           static_cast<int>(corpus.n_docs()));
      kp.seed = derive_seed(a.seed, "kmeans");
      resolved["kmeans.mode"] = a.kmeans_mode;
      resolved["kmeans.k"] = std::to_string(kp.k);
      print_resolved(resolved);
      const EmbeddingMatrix reduced = umap_reduce(embedded, up);
      assign = kmeans(reduced.vectors, kp).assign;
    }
    const ClassTermMatrix ctm = ctfidf(corpus, assign);
    const int target =
        a.n_topics > 0 ? std::min(a.n_topics, ctm.n_classes()) : ctm.n_classes();
    if (target < ctm.n_classes()) {
      const ReducedTopics red = reduce_topics(ctm, assign, target);
      out = extract_topics(red.ctm, corpus, red.assign, a.top_n, a.model);
    } else {
      out = extract_topics(ctm, corpus, assign, a.top_n, a.model);
    }
    out.n_requested = a.n_topics;
  } else {
    throw InvalidArgument("unknown model: " + a.model);
  }

  save_topics_json(out, a.topics_out);
  save_assignment_csv(out, a.assignment_out);
  const CooccurrenceStats stats = CooccurrenceStats::build(corpus, a.window);
  const EvalResult ev = evaluate(out, stats, a.top_n);
  std::cout << "model=" << a.model << " n_topics=" << ev.n_topics_effective
            << " tc=" << fmt6(ev.tc) << " td=" << fmt6(ev.td)
            << " outlier_fraction=" << fmt6(ev.outlier_frac) << "\n";
  return 0;
}

struct EvalArgs {
  std::string corpus, topics;
  int top_n = 5;
  int window = 0;
};

int cmd_eval(const EvalArgs& a) {
  print_resolved({{"corpus", a.corpus},
                  {"topics", a.topics},
                  {"top_n", std::to_string(a.top_n)},
                  {"window", std::to_string(a.window)}});
  const Corpus corpus = load_corpus_jsonl(a.corpus);
  const TopicModelOutput out = load_topics_json(a.topics);
  const CooccurrenceStats stats = CooccurrenceStats::build(corpus, a.window);
  const EvalResult ev = evaluate(out, stats, a.top_n);
  std::cout << "model=" << out.model_tag << " n_topics=" << ev.n_topics_effective
            << " tc=" << fmt6(ev.tc) << " td=" << fmt6(ev.td)
            << " outlier_fraction=" << fmt6(ev.outlier_frac) << "\n";
  return 0;
}

struct ExperimentArgs {
  std::string spec_path, which = "comparison", outdir = "report";
  std::string corpus_override;
  int jobs = 0;
  std::int64_t seed_override = -1;
};

int cmd_experiment(const ExperimentArgs& a) {
  ExperimentSpec spec = load_experiment_spec(a.spec_path);
  if (!a.corpus_override.empty()) spec.corpus_path = a.corpus_override;
  if (a.seed_override >= 0)
    spec.base_seed = static_cast<std::uint64_t>(a.seed_override);
  if (spec.corpus_path.empty())
    throw SpecError("no corpus: set corpus_path in the spec or pass --corpus");

  std::cout << "spec_hash=" << spec_hash(spec) << "\n";
  std::cout << "resolved_spec=" << resolved_spec_json(spec) << "\n";
  const Corpus corpus = load_corpus_jsonl(spec.corpus_path);

  std::vector<std::string> written;
  std::size_t n_failures = 0;
  auto report_failures = [&](const std::vector<CellFailure>& fs) {
    n_failures += fs.size();
    for (const auto& f : fs)
      std::cerr << "warning: cell failed: model=" << f.model
                << " corpus=" << f.corpus << " n_topics=" << f.n_topics
                << " run=" << f.run << ": " << f.message << "\n";
  };

  if (a.which == "comparison") {
    const ComparisonResult res = run_comparison(spec, corpus, a.jobs);
    report_failures(res.failures);
    written = write_comparison_report(res, spec, a.outdir);
  } else if (a.which == "doclen") {
    const DocLengthResult res = run_doc_length(spec, corpus, a.jobs);
    report_failures(res.short_band.failures);
    report_failures(res.long_band.failures);
    written = write_doclen_report(res, spec, a.outdir);
  } else if (a.which == "outliers") {
    const OutlierSweepResult res = run_outlier_sweep(spec, corpus, a.jobs);
    report_failures(res.failures);
    written = write_outlier_report(res, spec, a.outdir);
  } else if (a.which == "non-outlier") {
    const NonOutlierResult res = run_non_outlier(spec, corpus, a.jobs);
    report_failures(res.full.failures);
    report_failures(res.filtered.failures);
    written = write_non_outlier_report(res, spec, a.outdir);
  } else {
    throw InvalidArgument("unknown experiment: " + a.which);
  }

  for (const auto& path : written) std::cout << "wrote " << path << "\n";
  if (n_failures > 0) {
    std::cerr << n_failures << " cell(s) failed; reports are partial\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topic modeling workbench: embedding-cluster pipeline, LDA "
               "baseline, and experiment harness"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* sp = app.add_subcommand("preprocess",
                                "tokenize raw JSONL documents into a corpus file");
  sp->add_option("--input", pre.input, "raw JSONL: {id, text, group}")
      ->required();
  sp->add_option("--output", pre.output, "corpus JSONL path")->required();
  sp->add_option("--stopwords", pre.stopwords_path,
                 "stopword file, one word per line (default: built-in list)");
  sp->add_flag("--keep-stopwords", pre.keep_stopwords,
               "skip stopword removal");
  sp->add_option("--min-df", pre.min_df,
                 "drop terms appearing in fewer documents")
      ->capture_default_str();

  EmbedArgs emb;
  auto* se = app.add_subcommand(
      "embed", "generate hashed random-projection document embeddings");
  se->add_option("--corpus", emb.corpus, "corpus JSONL")->required();
  se->add_option("--output", emb.output, "embedding file path")->required();
  se->add_option("--format", emb.format, "binary | csv")
      ->check(CLI::IsMember({"binary", "csv"}))
      ->capture_default_str();
  se->add_option("--dim", emb.dim, "embedding dimension")->capture_default_str();
  se->add_option("--weighting", emb.weighting, "tf | tfidf")
      ->check(CLI::IsMember({"tf", "tfidf"}))
      ->capture_default_str();
  se->add_option("--seed", emb.seed, "random seed")->capture_default_str();

  FitArgs fit;
  auto* sf = app.add_subcommand("fit", "fit one model once and dump its topics");
  sf->add_option("--corpus", fit.corpus, "corpus JSONL")->required();
  sf->add_option("--model", fit.model,
                 "lda | bertopic-hdbscan | bertopic-kmeans")
      ->check(CLI::IsMember({"lda", "bertopic-hdbscan", "bertopic-kmeans"}))
      ->capture_default_str();
  sf->add_option("--embeddings", fit.embeddings,
                 "embedding file (default: generate fallback embeddings)");
  sf->add_option("--n-topics", fit.n_topics,
                 "requested topic count (0 = whatever clustering finds)")
      ->capture_default_str();
  sf->add_option("--seed", fit.seed, "master seed; stage seeds derive from it")
      ->capture_default_str();
  sf->add_option("--dim", fit.dim, "fallback embedding dimension")
      ->capture_default_str();
  sf->add_option("--weighting", fit.weighting, "fallback weighting: tf | tfidf")
      ->check(CLI::IsMember({"tf", "tfidf"}))
      ->capture_default_str();
  sf->add_option("--n-neighbors", fit.umap.n_neighbors, "UMAP neighbors")
      ->capture_default_str();
  sf->add_option("--n-components", fit.umap.n_components, "UMAP output dims")
      ->capture_default_str();
  sf->add_option("--min-dist", fit.umap.min_dist, "UMAP minimum distance")
      ->capture_default_str();
  sf->add_option("--n-epochs", fit.umap.n_epochs, "UMAP optimization epochs")
      ->capture_default_str();
  sf->add_option("--min-cluster-size", fit.hdbscan.min_cluster_size,
                 "HDBSCAN minimum cluster size")
      ->capture_default_str();
  sf->add_option("--min-samples", fit.hdbscan.min_samples,
                 "HDBSCAN min_samples (-1: equal to min cluster size)")
      ->capture_default_str();
  sf->add_option("--kmeans-mode", fit.kmeans_mode,
                 "thesis (k = max(base-k, requested), then merge) | direct")
      ->check(CLI::IsMember({"thesis", "direct"}))
      ->capture_default_str();
  sf->add_option("--kmeans-base-k", fit.kmeans_base_k,
                 "base cluster count for thesis mode")
      ->capture_default_str();
  sf->add_option("--alpha", fit.lda.alpha,
                 "LDA document-topic prior (-1: 50/K)")
      ->capture_default_str();
  sf->add_option("--beta", fit.lda.beta, "LDA topic-word prior")
      ->capture_default_str();
  sf->add_option("--iterations", fit.lda.n_iterations, "LDA Gibbs sweeps")
      ->capture_default_str();
  sf->add_option("--top-n", fit.top_n, "words per topic")->capture_default_str();
  sf->add_option("--window", fit.window,
                 "co-occurrence window (0 = whole document)")
      ->capture_default_str();
  sf->add_option("--topics-out", fit.topics_out, "topic dump path")
      ->capture_default_str();
  sf->add_option("--assignment-out", fit.assignment_out, "assignment CSV path")
      ->capture_default_str();

  EvalArgs eva;
  auto* sv = app.add_subcommand("eval",
                                "score a topic dump against a reference corpus");
  sv->add_option("--corpus", eva.corpus, "reference corpus JSONL")->required();
  sv->add_option("--topics", eva.topics, "topic dump JSON")->required();
  sv->add_option("--top-n", eva.top_n, "words per topic to score")
      ->capture_default_str();
  sv->add_option("--window", eva.window,
                 "co-occurrence window (0 = whole document)")
      ->capture_default_str();

  ExperimentArgs exp;
  auto* sx = app.add_subcommand("experiment", "run an experiment suite");
  sx->add_option("--spec", exp.spec_path, "experiment spec JSON")->required();
  sx->add_option("--which", exp.which,
                 "comparison | doclen | outliers | non-outlier")
      ->check(CLI::IsMember({"comparison", "doclen", "outliers", "non-outlier"}))
      ->capture_default_str();
  sx->add_option("--outdir", exp.outdir, "report directory")
      ->capture_default_str();
  sx->add_option("--corpus", exp.corpus_override,
                 "corpus JSONL (overrides the spec)");
  sx->add_option("--jobs", exp.jobs, "worker threads (0 = all cores)")
      ->capture_default_str();
  sx->add_option("--seed", exp.seed_override,
                 "override the spec's base seed (-1: keep)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (sp->parsed()) return cmd_preprocess(pre);
    if (se->parsed()) return cmd_embed(emb);
    if (sf->parsed()) return cmd_fit(fit);
    if (sv->parsed()) return cmd_eval(eva);
    if (sx->parsed()) return cmd_experiment(exp);
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 3;
}
