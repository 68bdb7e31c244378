#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topiclab/cluster.hpp"
#include "topiclab/corpus.hpp"
#include "topiclab/umap.hpp"

namespace topiclab {

struct EmbeddingSpec {
  std::string type = "fallback";  // "fallback" | "file"
  std::string path;
  int dim = 256;
  std::string weighting = "tfidf";  // "tf" | "tfidf"
};

struct KMeansSpec {
  std::string mode = "thesis";  // "thesis": k = max(base_k, requested), then
                                // merge down; "direct": k = requested
  int base_k = 50;
  int max_iters = 300;
  double tol = 1e-4;
};

struct LdaSpec {
  double alpha = -1.0;  // -1: 50/K
  double beta = 0.01;
  int n_iterations = 500;
};

struct EvalSpec {
  int top_n = 5;
  int window = 0;
  bool exclude_outliers = false;  // drop noise docs from the reference corpus
};

struct DocLengthSpec {
  int short_min = 10, short_max = 25;
  int long_min = 60, long_max = 100;
  int sample_n = 800;
};

struct ExperimentSpec {
  std::string corpus_path;
  std::vector<std::string> models = {"lda", "bertopic-hdbscan", "bertopic-kmeans"};
  std::vector<int> topic_counts = {5, 10, 15, 20, 25, 30};
  int runs = 3;
  std::uint64_t base_seed = 33;
  bool per_group = false;
  EmbeddingSpec embedding;
  UmapParams umap;  // the seed field is ignored; stage seeds derive per run
  HdbscanParams hdbscan;
  KMeansSpec kmeans;
  LdaSpec lda;
  EvalSpec eval;
  DocLengthSpec doc_length;
  std::vector<std::pair<int, int>> outlier_grid = {
      {5, 5}, {10, 2}, {40, 2}, {80, 2}, {120, 1}};
};

// JSON with exactly the fields above; unknown keys are rejected by name
ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::string& path);
// canonical (sorted-key, fully resolved) one-line JSON, and its fnv1a hash
std::string resolved_spec_json(const ExperimentSpec& spec);
std::string spec_hash(const ExperimentSpec& spec);

struct ReportRow {
  std::string model, corpus;
  int n_topics = 0;  // requested
  int run = 0;
  std::uint64_t run_seed = 0;
  double tc = 0.0, td = 0.0, outlier_frac = 0.0;
  int n_topics_effective = 0;
  double wall_ms = 0.0;
};

struct AggregateRow {
  std::string model, corpus;
  double tc = 0.0, td = 0.0, outlier_frac = 0.0;
  int n_cells = 0;
};

struct CellFailure {
  std::string model, corpus;
  int n_topics = 0;
  int run = 0;
  std::string message;
};

struct ChainTiming {
  std::string corpus;
  int run = 0;
  double wall_ms = 0.0;  // embed + reduce, shared by the BERTopic cells
};

struct ComparisonResult {
  std::vector<ReportRow> rows;            // sorted (model, corpus, n_topics, run)
  std::vector<AggregateRow> aggregates;   // mean per model x corpus
  std::vector<CellFailure> failures;
  std::vector<ChainTiming> chain_timings;
};

// one row per (model, corpus-or-group, n_topics, run); cell seed =
// base_seed + run, stage seeds derived from it by name
ComparisonResult run_comparison(const ExperimentSpec& spec, const Corpus& corpus,
                                int jobs);

struct DeltaRow {
  std::string model;
  double tc_long = 0.0, tc_short = 0.0, tc_delta = 0.0;
  double td_long = 0.0, td_short = 0.0, td_delta = 0.0;
};

struct DocLengthResult {
  ComparisonResult short_band, long_band;
  std::vector<DeltaRow> deltas;  // tc_delta = tc_short - tc_long
};

DocLengthResult run_doc_length(const ExperimentSpec& spec, const Corpus& corpus,
                               int jobs);

struct OutlierRow {
  int min_cluster_size = 0, min_samples = 0;
  int run = 0;
  std::uint64_t run_seed = 0;
  double outlier_frac = 0.0, tc = 0.0, td = 0.0;
  int n_topics_effective = 0;
  double wall_ms = 0.0;
};

struct OutlierSweepResult {
  std::vector<OutlierRow> rows;
  std::vector<OutlierRow> aggregates;  // mean per grid point (run = -1)
  std::vector<CellFailure> failures;
};

OutlierSweepResult run_outlier_sweep(const ExperimentSpec& spec,
                                     const Corpus& corpus, int jobs);

struct NonOutlierDelta {
  std::string model;
  double tc_full = 0.0, tc_filtered = 0.0, tc_delta = 0.0;
  double td_full = 0.0, td_filtered = 0.0, td_delta = 0.0;
};

struct NonOutlierResult {
  double initial_outlier_fraction = 0.0;
  int kept_docs = 0;
  ComparisonResult full, filtered;
  std::vector<NonOutlierDelta> deltas;  // filtered - full
};

NonOutlierResult run_non_outlier(const ExperimentSpec& spec, const Corpus& corpus,
                                 int jobs);

// Writers emit CSV/Markdown/plot-data under outdir and return the paths
// written. Every file starts with "# spec_hash=..." and "# resolved_spec=..."
// comment lines; wall times go to timings.csv only, keeping the main reports
// byte-identical across runs.
std::vector<std::string> write_comparison_report(const ComparisonResult& result,
                                                 const ExperimentSpec& spec,
                                                 const std::string& outdir);
std::vector<std::string> write_doclen_report(const DocLengthResult& result,
                                             const ExperimentSpec& spec,
                                             const std::string& outdir);
std::vector<std::string> write_outlier_report(const OutlierSweepResult& result,
                                              const ExperimentSpec& spec,
                                              const std::string& outdir);
std::vector<std::string> write_non_outlier_report(const NonOutlierResult& result,
                                                  const ExperimentSpec& spec,
                                                  const std::string& outdir);

}  // namespace topiclab
