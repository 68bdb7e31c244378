#include "topiclab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include "topiclab/embedding.hpp"
#include "topiclab/errors.hpp"
#include "topiclab/eval.hpp"
#include "topiclab/lda.hpp"
#include "topiclab/rng.hpp"
#include "topiclab/topicrep.hpp"

namespace topiclab {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void run_jobs(std::vector<std::function<void()>>& jobs, int workers) {
  if (workers <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    workers = hc > 0 ? static_cast<int>(hc) : 1;
  }
  workers = std::min<int>(workers, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    for (auto& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      jobs[i]();
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int i = 0; i < workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

bool wants_model(const ExperimentSpec& spec, const std::string& model) {
  return std::find(spec.models.begin(), spec.models.end(), model) !=
         spec.models.end();
}

// evaluation against the shared reference stats, or against a noise-filtered
// rebuild when the spec asks for outlier exclusion
EvalResult eval_cell(const TopicModelOutput& out, const Corpus& corpus,
                     const CooccurrenceStats& shared, const EvalSpec& es) {
  bool has_noise = false;
  for (int l : out.assignment)
    if (l == -1) {
      has_noise = true;
      break;
    }
  if (es.exclude_outliers && has_noise) {
    std::vector<Document> kept;
    for (std::size_t i = 0; i < corpus.n_docs(); ++i)
      if (out.assignment[i] != -1) kept.push_back(corpus.documents[i]);
    const Corpus sub = build_corpus(std::move(kept));
    const CooccurrenceStats stats = CooccurrenceStats::build(sub, es.window);
    return evaluate(out, stats, es.top_n);
  }
  return evaluate(out, shared, es.top_n);
}

// reduce (when needed) + extract for one requested topic count
TopicModelOutput topics_for_count(const ClassTermMatrix& ctm,
                                  const ClusterAssignment& assign,
                                  const Corpus& corpus, int requested, int top_n,
                                  const std::string& tag) {
  const int target = std::min(requested, ctm.n_classes());
  TopicModelOutput out;
  if (target == ctm.n_classes()) {
    out = extract_topics(ctm, corpus, assign, top_n, tag);
  } else {
    const ReducedTopics reduced = reduce_topics(ctm, assign, target);
    out = extract_topics(reduced.ctm, corpus, reduced.assign, top_n, tag);
  }
  out.n_requested = requested;
  return out;
}

struct LabelResult {
  std::vector<ReportRow> rows;
  std::vector<CellFailure> failures;
  std::vector<ChainTiming> chain_timings;
};

// all cells for one corpus variant (one `corpus` column value)
LabelResult run_label(const ExperimentSpec& spec, const Corpus& corpus,
                      const std::string& label, int jobs) {
  const bool use_hdbscan = wants_model(spec, "bertopic-hdbscan");
  const bool use_kmeans = wants_model(spec, "bertopic-kmeans");
  const bool use_lda = wants_model(spec, "lda");
  const bool use_bertopic = use_hdbscan || use_kmeans;

  const CooccurrenceStats shared_stats =
      CooccurrenceStats::build(corpus, spec.eval.window);

  // file embeddings are run-independent; load them once per variant
  EmbeddingMatrix file_emb;
  if (use_bertopic && spec.embedding.type == "file")
    file_emb = load_embeddings(spec.embedding.path, corpus);

  struct JobResult {
    std::vector<ReportRow> rows;
    std::vector<CellFailure> failures;
    std::vector<ChainTiming> chain_timings;
  };

  std::vector<std::function<void()>> tasks;
  std::vector<JobResult> results;

  // one BERTopic job per run: the embed+reduce chain is shared by both
  // cluster models and every topic count
  if (use_bertopic) {
    for (int run = 0; run < spec.runs; ++run) {
      results.emplace_back();
      const std::size_t slot = results.size() - 1;
      tasks.push_back([&, run, slot] {
        JobResult& res = results[slot];
        const std::uint64_t cell_seed = spec.base_seed + run;
        auto fail_all = [&](const std::string& msg) {
          for (const char* model : {"bertopic-hdbscan", "bertopic-kmeans"}) {
            if (!wants_model(spec, model)) continue;
            for (int n : spec.topic_counts)
              res.failures.push_back({model, label, n, run, msg});
          }
        };

        EmbeddingMatrix reduced;
        try {
          const auto chain_start = Clock::now();
          EmbeddingMatrix embedded;
          if (spec.embedding.type == "file") {
            embedded = file_emb;
          } else {
            FallbackEmbedderConfig cfg;
            cfg.dim = spec.embedding.dim;
            cfg.seed = derive_seed(cell_seed, "embed");
            cfg.weighting = spec.embedding.weighting == "tf"
                                ? FallbackEmbedderConfig::Weighting::tf
                                : FallbackEmbedderConfig::Weighting::tfidf;
            embedded = fallback_embed(corpus, cfg);
          }
          UmapParams up = spec.umap;
          up.seed = derive_seed(cell_seed, "umap");
          reduced = umap_reduce(embedded, up);
          res.chain_timings.push_back({label, run, ms_since(chain_start)});
        } catch (const Error& e) {
          fail_all(std::string("embedding/reduction failed: ") + e.what());
          return;
        }

        if (wants_model(spec, "bertopic-hdbscan")) {
          const std::string model = "bertopic-hdbscan";
          try {
            const auto fit_start = Clock::now();
            const HdbscanResult fit = hdbscan(reduced.vectors, spec.hdbscan);
            const ClassTermMatrix ctm = ctfidf(corpus, fit.assign);
            double fit_ms = ms_since(fit_start);
            for (int n : spec.topic_counts) {
              try {
                const auto cell_start = Clock::now();
                const TopicModelOutput out = topics_for_count(
                    ctm, fit.assign, corpus, n, spec.eval.top_n, model);
                const EvalResult ev =
                    eval_cell(out, corpus, shared_stats, spec.eval);
                res.rows.push_back({model, label, n, run, cell_seed, ev.tc,
                                    ev.td, ev.outlier_frac,
                                    ev.n_topics_effective,
                                    ms_since(cell_start) + fit_ms});
                fit_ms = 0.0;  // charge the shared fit to the first cell
              } catch (const Error& e) {
                res.failures.push_back({model, label, n, run, e.what()});
              }
            }
          } catch (const Error& e) {
            for (int n : spec.topic_counts)
              res.failures.push_back({model, label, n, run, e.what()});
          }
        }

        if (wants_model(spec, "bertopic-kmeans")) {
          const std::string model = "bertopic-kmeans";
          const int n_docs = static_cast<int>(corpus.n_docs());
          // distinct k values to fit, depending on the topic-count mode
          std::map<int, std::pair<ClusterAssignment, ClassTermMatrix>> fits;
          std::map<int, double> fit_ms;
          for (int n : spec.topic_counts) {
            const int k = std::min(spec.kmeans.mode == "thesis"
                                       ? std::max(spec.kmeans.base_k, n)
                                       : n,
                                   n_docs);
            if (fits.count(k)) continue;
            try {
              const auto fit_start = Clock::now();
              KMeansParams kp;
              kp.k = k;
              kp.max_iters = spec.kmeans.max_iters;
              kp.tol = spec.kmeans.tol;
              kp.seed = derive_seed(cell_seed, "kmeans");
              const KMeansResult fit = kmeans(reduced.vectors, kp);
              fits.emplace(k,
                           std::make_pair(fit.assign, ctfidf(corpus, fit.assign)));
              fit_ms[k] = ms_since(fit_start);
            } catch (const Error& e) {
              fits.erase(k);
              fit_ms.erase(k);
              // remember the failure against every count that needs this k
              for (int n2 : spec.topic_counts) {
                const int k2 = std::min(spec.kmeans.mode == "thesis"
                                            ? std::max(spec.kmeans.base_k, n2)
                                            : n2,
                                        n_docs);
                if (k2 == k)
                  res.failures.push_back({model, label, n2, run, e.what()});
              }
            }
          }
          for (int n : spec.topic_counts) {
            const int k = std::min(spec.kmeans.mode == "thesis"
                                       ? std::max(spec.kmeans.base_k, n)
                                       : n,
                                   n_docs);
            auto it = fits.find(k);
            if (it == fits.end()) continue;  // failure already recorded
            try {
              const auto cell_start = Clock::now();
              const TopicModelOutput out =
                  topics_for_count(it->second.second, it->second.first, corpus,
                                   n, spec.eval.top_n, model);
              const EvalResult ev = eval_cell(out, corpus, shared_stats, spec.eval);
              res.rows.push_back({model, label, n, run, cell_seed, ev.tc, ev.td,
                                  ev.outlier_frac, ev.n_topics_effective,
                                  ms_since(cell_start) + fit_ms[k]});
              fit_ms[k] = 0.0;
            } catch (const Error& e) {
              res.failures.push_back({model, label, n, run, e.what()});
            }
          }
        }
      });
    }
  }

  // LDA: one job per (topic count, run); each is a full fit
  if (use_lda) {
    for (int n : spec.topic_counts) {
      for (int run = 0; run < spec.runs; ++run) {
        results.emplace_back();
        const std::size_t slot = results.size() - 1;
        tasks.push_back([&, n, run, slot] {
          JobResult& res = results[slot];
          const std::uint64_t cell_seed = spec.base_seed + run;
          try {
            const auto cell_start = Clock::now();
            LdaParams lp;
            lp.k_topics = n;
            lp.alpha = spec.lda.alpha;
            lp.beta = spec.lda.beta;
            lp.n_iterations = spec.lda.n_iterations;
            lp.seed = derive_seed(cell_seed, "lda");
            const LdaResult fit = lda_fit(corpus, lp, spec.eval.top_n);
            const EvalResult ev =
                eval_cell(fit.output, corpus, shared_stats, spec.eval);
            res.rows.push_back({"lda", label, n, run, cell_seed, ev.tc, ev.td,
                                ev.outlier_frac, ev.n_topics_effective,
                                ms_since(cell_start)});
          } catch (const Error& e) {
            res.failures.push_back({"lda", label, n, run, e.what()});
          }
        });
      }
    }
  }

  run_jobs(tasks, jobs);

  LabelResult out;
  for (auto& res : results) {
    out.rows.insert(out.rows.end(), res.rows.begin(), res.rows.end());
    out.failures.insert(out.failures.end(), res.failures.begin(),
                        res.failures.end());
    out.chain_timings.insert(out.chain_timings.end(), res.chain_timings.begin(),
                             res.chain_timings.end());
  }
  return out;
}

void sort_rows(std::vector<ReportRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.model != b.model) return a.model < b.model;
    if (a.corpus != b.corpus) return a.corpus < b.corpus;
    if (a.n_topics != b.n_topics) return a.n_topics < b.n_topics;
    return a.run < b.run;
  });
}

void sort_failures(std::vector<CellFailure>& fs) {
  std::sort(fs.begin(), fs.end(), [](const CellFailure& a, const CellFailure& b) {
    if (a.model != b.model) return a.model < b.model;
    if (a.corpus != b.corpus) return a.corpus < b.corpus;
    if (a.n_topics != b.n_topics) return a.n_topics < b.n_topics;
    return a.run < b.run;
  });
}

std::vector<AggregateRow> aggregate_rows(const std::vector<ReportRow>& rows) {
  std::map<std::pair<std::string, std::string>, AggregateRow> agg;
  for (const auto& r : rows) {
    AggregateRow& a = agg[{r.model, r.corpus}];
    a.model = r.model;
    a.corpus = r.corpus;
    a.tc += r.tc;
    a.td += r.td;
    a.outlier_frac += r.outlier_frac;
    a.n_cells += 1;
  }
  std::vector<AggregateRow> out;
  for (auto& [key, a] : agg) {
    a.tc /= a.n_cells;
    a.td /= a.n_cells;
    a.outlier_frac /= a.n_cells;
    out.push_back(a);
  }
  return out;
}

ComparisonResult finish_comparison(LabelResult&& partial) {
  ComparisonResult result;
  result.rows = std::move(partial.rows);
  result.failures = std::move(partial.failures);
  result.chain_timings = std::move(partial.chain_timings);
  sort_rows(result.rows);
  sort_failures(result.failures);
  result.aggregates = aggregate_rows(result.rows);
  return result;
}

std::vector<DeltaRow> doclen_deltas(const ComparisonResult& short_band,
                                    const ComparisonResult& long_band) {
  std::map<std::string, std::pair<double, int>> tc_s, tc_l, td_s, td_l;
  for (const auto& r : short_band.rows) {
    tc_s[r.model].first += r.tc;
    tc_s[r.model].second += 1;
    td_s[r.model].first += r.td;
    td_s[r.model].second += 1;
  }
  for (const auto& r : long_band.rows) {
    tc_l[r.model].first += r.tc;
    tc_l[r.model].second += 1;
    td_l[r.model].first += r.td;
    td_l[r.model].second += 1;
  }
  std::vector<DeltaRow> deltas;
  for (const auto& [model, sum] : tc_s) {
    if (!tc_l.count(model) || sum.second == 0 || tc_l[model].second == 0) continue;
    DeltaRow d;
    d.model = model;
    d.tc_short = sum.first / sum.second;
    d.tc_long = tc_l[model].first / tc_l[model].second;
    d.tc_delta = d.tc_short - d.tc_long;
    d.td_short = td_s[model].first / td_s[model].second;
    d.td_long = td_l[model].first / td_l[model].second;
    d.td_delta = d.td_short - d.td_long;
    deltas.push_back(d);
  }
  return deltas;
}

}  // namespace

ComparisonResult run_comparison(const ExperimentSpec& spec, const Corpus& corpus,
                                int jobs) {
  LabelResult all = run_label(spec, corpus, "all", jobs);
  if (spec.per_group) {
    std::set<std::string> groups;
    for (const auto& d : corpus.documents)
      if (d.group) groups.insert(*d.group);
    for (const auto& g : groups) {
      const Corpus sub = filter_by_group(corpus, g);
      LabelResult part = run_label(spec, sub, g, jobs);
      all.rows.insert(all.rows.end(), part.rows.begin(), part.rows.end());
      all.failures.insert(all.failures.end(), part.failures.begin(),
                          part.failures.end());
      all.chain_timings.insert(all.chain_timings.end(),
                               part.chain_timings.begin(),
                               part.chain_timings.end());
    }
  }
  return finish_comparison(std::move(all));
}

DocLengthResult run_doc_length(const ExperimentSpec& spec, const Corpus& corpus,
                               int jobs) {
  const DocLengthSpec& dl = spec.doc_length;
  const Corpus short_corpus =
      sample_by_length(corpus, dl.short_min, dl.short_max, dl.sample_n,
                       derive_seed(spec.base_seed, "sample-short"));
  const Corpus long_corpus =
      sample_by_length(corpus, dl.long_min, dl.long_max, dl.sample_n,
                       derive_seed(spec.base_seed, "sample-long"));

  DocLengthResult result;
  result.short_band =
      finish_comparison(run_label(spec, short_corpus, "short", jobs));
  result.long_band = finish_comparison(run_label(spec, long_corpus, "long", jobs));
  result.deltas = doclen_deltas(result.short_band, result.long_band);
  return result;
}

OutlierSweepResult run_outlier_sweep(const ExperimentSpec& spec,
                                     const Corpus& corpus, int jobs) {
  if (spec.outlier_grid.empty()) throw SpecError("outlier grid is empty");
  const CooccurrenceStats shared_stats =
      CooccurrenceStats::build(corpus, spec.eval.window);

  EmbeddingMatrix file_emb;
  if (spec.embedding.type == "file")
    file_emb = load_embeddings(spec.embedding.path, corpus);

  struct JobResult {
    std::vector<OutlierRow> rows;
    std::vector<CellFailure> failures;
  };
  std::vector<std::function<void()>> tasks;
  std::vector<JobResult> results;

  for (int run = 0; run < spec.runs; ++run) {
    results.emplace_back();
    const std::size_t slot = results.size() - 1;
    tasks.push_back([&, run, slot] {
      JobResult& res = results[slot];
      const std::uint64_t cell_seed = spec.base_seed + run;

      EmbeddingMatrix reduced;
      try {
        EmbeddingMatrix embedded;
        if (spec.embedding.type == "file") {
          embedded = file_emb;
        } else {
          FallbackEmbedderConfig cfg;
          cfg.dim = spec.embedding.dim;
          cfg.seed = derive_seed(cell_seed, "embed");
          cfg.weighting = spec.embedding.weighting == "tf"
                              ? FallbackEmbedderConfig::Weighting::tf
                              : FallbackEmbedderConfig::Weighting::tfidf;
          embedded = fallback_embed(corpus, cfg);
        }
        UmapParams up = spec.umap;
        up.seed = derive_seed(cell_seed, "umap");
        reduced = umap_reduce(embedded, up);
      } catch (const Error& e) {
        for (std::size_t g = 0; g < spec.outlier_grid.size(); ++g)
          res.failures.push_back({"bertopic-hdbscan", "all",
                                  static_cast<int>(g), run,
                                  std::string("embedding/reduction failed: ") +
                                      e.what()});
        return;
      }

      for (std::size_t g = 0; g < spec.outlier_grid.size(); ++g) {
        const auto [mcs, ms] = spec.outlier_grid[g];
        try {
          const auto cell_start = Clock::now();
          HdbscanParams hp;
          hp.min_cluster_size = mcs;
          hp.min_samples = ms;
          const HdbscanResult fit = hdbscan(reduced.vectors, hp);
          const ClassTermMatrix ctm = ctfidf(corpus, fit.assign);
          const TopicModelOutput out = extract_topics(
              ctm, corpus, fit.assign, spec.eval.top_n, "bertopic-hdbscan");
          const EvalResult ev = eval_cell(out, corpus, shared_stats, spec.eval);
          res.rows.push_back({mcs, ms, run, cell_seed, ev.outlier_frac, ev.tc,
                              ev.td, ev.n_topics_effective,
                              ms_since(cell_start)});
        } catch (const Error& e) {
          res.failures.push_back({"bertopic-hdbscan", "all",
                                  static_cast<int>(g), run, e.what()});
        }
      }
    });
  }
  run_jobs(tasks, jobs);

  OutlierSweepResult out;
  for (auto& res : results) {
    out.rows.insert(out.rows.end(), res.rows.begin(), res.rows.end());
    out.failures.insert(out.failures.end(), res.failures.begin(),
                        res.failures.end());
  }

  // keep grid order primary so the sweep reads top to bottom like the table
  auto grid_index = [&](const OutlierRow& r) {
    for (std::size_t g = 0; g < spec.outlier_grid.size(); ++g)
      if (spec.outlier_grid[g].first == r.min_cluster_size &&
          spec.outlier_grid[g].second == r.min_samples)
        return g;
    return spec.outlier_grid.size();
  };
  std::sort(out.rows.begin(), out.rows.end(),
            [&](const OutlierRow& a, const OutlierRow& b) {
              const auto ga = grid_index(a), gb = grid_index(b);
              if (ga != gb) return ga < gb;
              return a.run < b.run;
            });
  sort_failures(out.failures);

  for (std::size_t g = 0; g < spec.outlier_grid.size(); ++g) {
    OutlierRow agg;
    agg.min_cluster_size = spec.outlier_grid[g].first;
    agg.min_samples = spec.outlier_grid[g].second;
    agg.run = -1;
    int n = 0;
    for (const auto& r : out.rows) {
      if (r.min_cluster_size != agg.min_cluster_size ||
          r.min_samples != agg.min_samples)
        continue;
      agg.outlier_frac += r.outlier_frac;
      agg.tc += r.tc;
      agg.td += r.td;
      agg.n_topics_effective += r.n_topics_effective;
      ++n;
    }
    if (n == 0) continue;
    agg.outlier_frac /= n;
    agg.tc /= n;
    agg.td /= n;
    agg.n_topics_effective /= n;
    out.aggregates.push_back(agg);
  }
  return out;
}

NonOutlierResult run_non_outlier(const ExperimentSpec& spec, const Corpus& corpus,
                                 int jobs) {
  // initial HDBSCAN fit with the run-0 seeds decides who is an outlier
  const std::uint64_t cell_seed = spec.base_seed;
  EmbeddingMatrix embedded;
  if (spec.embedding.type == "file") {
    embedded = load_embeddings(spec.embedding.path, corpus);
  } else {
    FallbackEmbedderConfig cfg;
    cfg.dim = spec.embedding.dim;
    cfg.seed = derive_seed(cell_seed, "embed");
    cfg.weighting = spec.embedding.weighting == "tf"
                        ? FallbackEmbedderConfig::Weighting::tf
                        : FallbackEmbedderConfig::Weighting::tfidf;
    embedded = fallback_embed(corpus, cfg);
  }
  UmapParams up = spec.umap;
  up.seed = derive_seed(cell_seed, "umap");
  const EmbeddingMatrix reduced = umap_reduce(embedded, up);
  const HdbscanResult initial = hdbscan(reduced.vectors, spec.hdbscan);

  std::vector<Document> kept;
  for (std::size_t i = 0; i < corpus.n_docs(); ++i)
    if (initial.assign.labels[i] != -1) kept.push_back(corpus.documents[i]);
  if (kept.empty())
    throw Error("non-outlier experiment: the initial fit labeled every document "
                "as noise");

  NonOutlierResult result;
  result.initial_outlier_fraction = initial.assign.outlier_fraction;
  result.kept_docs = static_cast<int>(kept.size());

  const Corpus filtered = build_corpus(std::move(kept));
  result.full = finish_comparison(run_label(spec, corpus, "full", jobs));
  result.filtered =
      finish_comparison(run_label(spec, filtered, "non-outlier", jobs));

  std::map<std::string, std::pair<double, int>> tc_f, tc_n, td_f, td_n;
  for (const auto& r : result.full.rows) {
    tc_f[r.model].first += r.tc;
    tc_f[r.model].second += 1;
    td_f[r.model].first += r.td;
    td_f[r.model].second += 1;
  }
  for (const auto& r : result.filtered.rows) {
    tc_n[r.model].first += r.tc;
    tc_n[r.model].second += 1;
    td_n[r.model].first += r.td;
    td_n[r.model].second += 1;
  }
  for (const auto& [model, sum] : tc_f) {
    if (!tc_n.count(model) || sum.second == 0 || tc_n[model].second == 0) continue;
    NonOutlierDelta d;
    d.model = model;
    d.tc_full = sum.first / sum.second;
    d.tc_filtered = tc_n[model].first / tc_n[model].second;
    d.tc_delta = d.tc_filtered - d.tc_full;
    d.td_full = td_f[model].first / td_f[model].second;
    d.td_filtered = td_n[model].first / td_n[model].second;
    d.td_delta = d.td_filtered - d.td_full;
    result.deltas.push_back(d);
  }
  return result;
}

}  // namespace topiclab
