#include <fstream>
#include <json.hpp>
#include <sstream>

#include "topiclab/errors.hpp"
#include "topiclab/harness.hpp"
#include "topiclab/rng.hpp"

namespace topiclab {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& section,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw SpecError("unknown key \"" + key + "\" in " + section);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw SpecError(std::string("wrong type for key \"") + key + "\"");
  }
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SpecError(std::string("spec is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SpecError("spec must be a JSON object");
  require_keys(root, "spec",
               {"corpus", "models", "topic_counts", "runs", "base_seed",
                "per_group", "embedding", "umap", "hdbscan", "kmeans", "lda",
                "eval", "doc_length", "outlier_grid"});

  ExperimentSpec spec;
  if (!root.contains("corpus"))
    throw SpecError("spec is missing required key \"corpus\"");
  spec.corpus_path = get_or<std::string>(root, "corpus", "");
  spec.models = get_or<std::vector<std::string>>(root, "models", spec.models);
  for (const auto& m : spec.models)
    if (m != "lda" && m != "bertopic-hdbscan" && m != "bertopic-kmeans")
      throw SpecError("unknown model \"" + m + "\"");
  if (spec.models.empty()) throw SpecError("\"models\" must be non-empty");
  spec.topic_counts =
      get_or<std::vector<int>>(root, "topic_counts", spec.topic_counts);
  if (spec.topic_counts.empty())
    throw SpecError("\"topic_counts\" must be non-empty");
  for (int t : spec.topic_counts)
    if (t < 1) throw SpecError("topic_counts entries must be >= 1");
  spec.runs = get_or<int>(root, "runs", spec.runs);
  if (spec.runs < 1) throw SpecError("\"runs\" must be >= 1");
  spec.base_seed = get_or<std::uint64_t>(root, "base_seed", spec.base_seed);
  spec.per_group = get_or<bool>(root, "per_group", spec.per_group);

  if (root.contains("embedding")) {
    const json& e = root.at("embedding");
    require_keys(e, "embedding", {"type", "path", "dim", "weighting"});
    spec.embedding.type = get_or<std::string>(e, "type", spec.embedding.type);
    if (spec.embedding.type != "fallback" && spec.embedding.type != "file")
      throw SpecError("embedding.type must be \"fallback\" or \"file\"");
    spec.embedding.path = get_or<std::string>(e, "path", "");
    if (spec.embedding.type == "file" && spec.embedding.path.empty())
      throw SpecError("embedding.type \"file\" requires embedding.path");
    spec.embedding.dim = get_or<int>(e, "dim", spec.embedding.dim);
    if (spec.embedding.dim < 2) throw SpecError("embedding.dim must be >= 2");
    spec.embedding.weighting =
        get_or<std::string>(e, "weighting", spec.embedding.weighting);
    if (spec.embedding.weighting != "tf" && spec.embedding.weighting != "tfidf")
      throw SpecError("embedding.weighting must be \"tf\" or \"tfidf\"");
  }

  if (root.contains("umap")) {
    const json& u = root.at("umap");
    require_keys(u, "umap",
                 {"n_neighbors", "n_components", "min_dist", "n_epochs", "metric"});
    spec.umap.n_neighbors = get_or<int>(u, "n_neighbors", spec.umap.n_neighbors);
    spec.umap.n_components =
        get_or<int>(u, "n_components", spec.umap.n_components);
    spec.umap.min_dist = get_or<float>(u, "min_dist", spec.umap.min_dist);
    spec.umap.n_epochs = get_or<int>(u, "n_epochs", spec.umap.n_epochs);
    const std::string metric = get_or<std::string>(
        u, "metric", spec.umap.metric == Metric::cosine ? "cosine" : "euclidean");
    if (metric == "cosine")
      spec.umap.metric = Metric::cosine;
    else if (metric == "euclidean")
      spec.umap.metric = Metric::euclidean;
    else
      throw SpecError("umap.metric must be \"cosine\" or \"euclidean\"");
    if (spec.umap.n_neighbors < 2) throw SpecError("umap.n_neighbors must be >= 2");
    if (spec.umap.n_components < 2)
      throw SpecError("umap.n_components must be >= 2");
    if (spec.umap.n_epochs < 1) throw SpecError("umap.n_epochs must be >= 1");
  }

  if (root.contains("hdbscan")) {
    const json& h = root.at("hdbscan");
    require_keys(h, "hdbscan", {"min_cluster_size", "min_samples"});
    spec.hdbscan.min_cluster_size =
        get_or<int>(h, "min_cluster_size", spec.hdbscan.min_cluster_size);
    spec.hdbscan.min_samples =
        get_or<int>(h, "min_samples", spec.hdbscan.min_samples);
    if (spec.hdbscan.min_cluster_size < 2)
      throw SpecError("hdbscan.min_cluster_size must be >= 2");
  }

  if (root.contains("kmeans")) {
    const json& m = root.at("kmeans");
    require_keys(m, "kmeans", {"mode", "base_k", "max_iters", "tol"});
    spec.kmeans.mode = get_or<std::string>(m, "mode", spec.kmeans.mode);
    if (spec.kmeans.mode != "thesis" && spec.kmeans.mode != "direct")
      throw SpecError("kmeans.mode must be \"thesis\" or \"direct\"");
    spec.kmeans.base_k = get_or<int>(m, "base_k", spec.kmeans.base_k);
    spec.kmeans.max_iters = get_or<int>(m, "max_iters", spec.kmeans.max_iters);
    spec.kmeans.tol = get_or<double>(m, "tol", spec.kmeans.tol);
    if (spec.kmeans.base_k < 1) throw SpecError("kmeans.base_k must be >= 1");
  }

  if (root.contains("lda")) {
    const json& l = root.at("lda");
    require_keys(l, "lda", {"alpha", "beta", "n_iterations"});
    spec.lda.alpha = get_or<double>(l, "alpha", spec.lda.alpha);
    spec.lda.beta = get_or<double>(l, "beta", spec.lda.beta);
    spec.lda.n_iterations = get_or<int>(l, "n_iterations", spec.lda.n_iterations);
    if (spec.lda.beta <= 0.0) throw SpecError("lda.beta must be > 0");
    if (spec.lda.n_iterations < 1)
      throw SpecError("lda.n_iterations must be >= 1");
  }

  if (root.contains("eval")) {
    const json& e = root.at("eval");
    require_keys(e, "eval", {"top_n", "window", "exclude_outliers"});
    spec.eval.top_n = get_or<int>(e, "top_n", spec.eval.top_n);
    spec.eval.window = get_or<int>(e, "window", spec.eval.window);
    spec.eval.exclude_outliers =
        get_or<bool>(e, "exclude_outliers", spec.eval.exclude_outliers);
    if (spec.eval.top_n < 2) throw SpecError("eval.top_n must be >= 2");
  }

  if (root.contains("doc_length")) {
    const json& d = root.at("doc_length");
    require_keys(d, "doc_length", {"short_band", "long_band", "sample_n"});
    if (d.contains("short_band")) {
      auto band = d.at("short_band").get<std::vector<int>>();
      if (band.size() != 2) throw SpecError("short_band must have 2 entries");
      spec.doc_length.short_min = band[0];
      spec.doc_length.short_max = band[1];
    }
    if (d.contains("long_band")) {
      auto band = d.at("long_band").get<std::vector<int>>();
      if (band.size() != 2) throw SpecError("long_band must have 2 entries");
      spec.doc_length.long_min = band[0];
      spec.doc_length.long_max = band[1];
    }
    spec.doc_length.sample_n =
        get_or<int>(d, "sample_n", spec.doc_length.sample_n);
    if (spec.doc_length.sample_n < 1)
      throw SpecError("doc_length.sample_n must be >= 1");
  }

  if (root.contains("outlier_grid")) {
    spec.outlier_grid.clear();
    for (const auto& entry : root.at("outlier_grid")) {
      auto pair = entry.get<std::vector<int>>();
      if (pair.size() != 2)
        throw SpecError("outlier_grid entries must be [min_cluster_size, min_samples]");
      spec.outlier_grid.emplace_back(pair[0], pair[1]);
    }
    if (spec.outlier_grid.empty())
      throw SpecError("\"outlier_grid\" must be non-empty");
  }
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SpecError("cannot open spec file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_experiment_spec(buf.str());
}

std::string resolved_spec_json(const ExperimentSpec& spec) {
  json root;  // nlohmann objects keep keys sorted, so this is canonical
  root["corpus"] = spec.corpus_path;
  root["models"] = spec.models;
  root["topic_counts"] = spec.topic_counts;
  root["runs"] = spec.runs;
  root["base_seed"] = spec.base_seed;
  root["per_group"] = spec.per_group;
  root["embedding"] = {{"type", spec.embedding.type},
                       {"path", spec.embedding.path},
                       {"dim", spec.embedding.dim},
                       {"weighting", spec.embedding.weighting}};
  root["umap"] = {
      {"n_neighbors", spec.umap.n_neighbors},
      {"n_components", spec.umap.n_components},
      {"min_dist", spec.umap.min_dist},
      {"n_epochs", spec.umap.n_epochs},
      {"metric", spec.umap.metric == Metric::cosine ? "cosine" : "euclidean"}};
  root["hdbscan"] = {{"min_cluster_size", spec.hdbscan.min_cluster_size},
                     {"min_samples", spec.hdbscan.min_samples > 0
                                         ? spec.hdbscan.min_samples
                                         : spec.hdbscan.min_cluster_size}};
  root["kmeans"] = {{"mode", spec.kmeans.mode},
                    {"base_k", spec.kmeans.base_k},
                    {"max_iters", spec.kmeans.max_iters},
                    {"tol", spec.kmeans.tol}};
  root["lda"] = {{"alpha", spec.lda.alpha},
                 {"beta", spec.lda.beta},
                 {"n_iterations", spec.lda.n_iterations}};
  root["eval"] = {{"top_n", spec.eval.top_n},
                  {"window", spec.eval.window},
                  {"exclude_outliers", spec.eval.exclude_outliers}};
  root["doc_length"] = {
      {"short_band", {spec.doc_length.short_min, spec.doc_length.short_max}},
      {"long_band", {spec.doc_length.long_min, spec.doc_length.long_max}},
      {"sample_n", spec.doc_length.sample_n}};
  json grid = json::array();
  for (const auto& [mcs, ms] : spec.outlier_grid) grid.push_back({mcs, ms});
  root["outlier_grid"] = grid;
  return root.dump();
}

std::string spec_hash(const ExperimentSpec& spec) {
  const std::uint64_t h = fnv1a64(resolved_spec_json(spec));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace topiclab
