#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "topiclab/errors.hpp"
#include "topiclab/harness.hpp"

namespace topiclab {

namespace {

namespace fs = std::filesystem;

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical on every platform
  if (!out) throw Error("cannot open output file: " + path.string());
  return out;
}

void write_header(std::ostream& out, const ExperimentSpec& spec) {
  out << "# spec_hash=" << spec_hash(spec) << "\n";
  out << "# resolved_spec=" << resolved_spec_json(spec) << "\n";
}

void write_rows_csv(std::ostream& out, const ComparisonResult& result) {
  out << "model,corpus,n_topics,run,run_seed,tc,td,outlier_frac,n_topics_effective\n";
  for (const auto& r : result.rows) {
    out << r.model << ',' << r.corpus << ',' << r.n_topics << ',' << r.run << ','
        << r.run_seed << ',' << fmt6(r.tc) << ',' << fmt6(r.td) << ','
        << fmt6(r.outlier_frac) << ',' << r.n_topics_effective << "\n";
  }
  for (const auto& a : result.aggregates) {
    out << a.model << ',' << a.corpus << ",all,mean,," << fmt6(a.tc) << ','
        << fmt6(a.td) << ',' << fmt6(a.outlier_frac) << ",\n";
  }
}

void write_failures_csv(std::ostream& out,
                        const std::vector<CellFailure>& failures) {
  out << "model,corpus,n_topics,run,message\n";
  for (const auto& f : failures) {
    std::string msg = f.message;
    for (char& c : msg)
      if (c == ',' || c == '\n') c = ';';
    out << f.model << ',' << f.corpus << ',' << f.n_topics << ',' << f.run << ','
        << msg << "\n";
  }
}

void write_timings_csv(std::ostream& out, const ComparisonResult& result) {
  out << "kind,model,corpus,n_topics,run,wall_ms\n";
  for (const auto& t : result.chain_timings)
    out << "chain,," << t.corpus << ",," << t.run << ',' << fmt6(t.wall_ms)
        << "\n";
  for (const auto& r : result.rows)
    out << "cell," << r.model << ',' << r.corpus << ',' << r.n_topics << ','
        << r.run << ',' << fmt6(r.wall_ms) << "\n";
}

// (mean, sample stddev) per (model, corpus, n_topics) across runs
void write_curves_csv(std::ostream& out, const ComparisonResult& result) {
  out << "model,corpus,n_topics,tc_mean,tc_stddev,td_mean,td_stddev\n";
  struct Acc {
    std::vector<double> tc, td;
  };
  std::map<std::tuple<std::string, std::string, int>, Acc> cells;
  for (const auto& r : result.rows) {
    Acc& a = cells[{r.model, r.corpus, r.n_topics}];
    a.tc.push_back(r.tc);
    a.td.push_back(r.td);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  };
  auto stddev = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
  };
  for (const auto& [key, acc] : cells) {
    out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key)
        << ',' << fmt6(mean(acc.tc)) << ',' << fmt6(stddev(acc.tc)) << ','
        << fmt6(mean(acc.td)) << ',' << fmt6(stddev(acc.td)) << "\n";
  }
}

void write_comparison_md(std::ostream& out, const ComparisonResult& result) {
  out << "\n# Model comparison\n";
  std::vector<std::string> corpora;
  for (const auto& a : result.aggregates)
    if (std::find(corpora.begin(), corpora.end(), a.corpus) == corpora.end())
      corpora.push_back(a.corpus);
  std::sort(corpora.begin(), corpora.end());
  for (const auto& corpus : corpora) {
    out << "\n## Corpus: " << corpus << "\n\n";
    out << "| model | TC | TD | outlier fraction | cells |\n";
    out << "|---|---:|---:|---:|---:|\n";
    for (const auto& a : result.aggregates) {
      if (a.corpus != corpus) continue;
      out << "| " << a.model << " | " << fmt6(a.tc) << " | " << fmt6(a.td)
          << " | " << fmt6(a.outlier_frac) << " | " << a.n_cells << " |\n";
    }
  }
  if (!result.failures.empty()) {
    out << "\n## Failed cells\n\n";
    out << "| model | corpus | n_topics | run | message |\n";
    out << "|---|---|---:|---:|---|\n";
    for (const auto& f : result.failures) {
      std::string msg = f.message;
      for (char& c : msg)
        if (c == '|' || c == '\n') c = ';';
      out << "| " << f.model << " | " << f.corpus << " | " << f.n_topics
          << " | " << f.run << " | " << msg << " |\n";
    }
  }
}

std::string emit(const ExperimentSpec& spec, const fs::path& path,
                 const std::function<void(std::ostream&)>& body) {
  std::ofstream out = open_out(path);
  write_header(out, spec);
  body(out);
  if (!out) throw Error("failed writing output file: " + path.string());
  return path.string();
}

}  // namespace

std::vector<std::string> write_comparison_report(const ComparisonResult& result,
                                                 const ExperimentSpec& spec,
                                                 const std::string& outdir) {
  fs::create_directories(outdir);
  const fs::path dir(outdir);
  std::vector<std::string> written;
  written.push_back(emit(spec, dir / "report.csv",
                         [&](std::ostream& o) { write_rows_csv(o, result); }));
  written.push_back(emit(spec, dir / "curves.csv",
                         [&](std::ostream& o) { write_curves_csv(o, result); }));
  written.push_back(
      emit(spec, dir / "report.md",
           [&](std::ostream& o) { write_comparison_md(o, result); }));
  written.push_back(
      emit(spec, dir / "failures.csv",
           [&](std::ostream& o) { write_failures_csv(o, result.failures); }));
  written.push_back(emit(spec, dir / "timings.csv",
                         [&](std::ostream& o) { write_timings_csv(o, result); }));
  return written;
}

std::vector<std::string> write_doclen_report(const DocLengthResult& result,
                                             const ExperimentSpec& spec,
                                             const std::string& outdir) {
  fs::create_directories(outdir);
  const fs::path dir(outdir);
  std::vector<std::string> written;

  // both bands share one row file; the corpus column tells them apart
  written.push_back(emit(spec, dir / "doclen_report.csv", [&](std::ostream& o) {
    o << "model,corpus,n_topics,run,run_seed,tc,td,outlier_frac,n_topics_effective\n";
    for (const ComparisonResult* band : {&result.short_band, &result.long_band}) {
      for (const auto& r : band->rows)
        o << r.model << ',' << r.corpus << ',' << r.n_topics << ',' << r.run
          << ',' << r.run_seed << ',' << fmt6(r.tc) << ',' << fmt6(r.td) << ','
          << fmt6(r.outlier_frac) << ',' << r.n_topics_effective << "\n";
      for (const auto& a : band->aggregates)
        o << a.model << ',' << a.corpus << ",all,mean,," << fmt6(a.tc) << ','
          << fmt6(a.td) << ',' << fmt6(a.outlier_frac) << ",\n";
    }
  }));

  written.push_back(emit(spec, dir / "doclen_deltas.csv", [&](std::ostream& o) {
    o << "model,tc_long,tc_short,tc_delta,td_long,td_short,td_delta\n";
    for (const auto& d : result.deltas)
      o << d.model << ',' << fmt6(d.tc_long) << ',' << fmt6(d.tc_short) << ','
        << fmt6(d.tc_delta) << ',' << fmt6(d.td_long) << ',' << fmt6(d.td_short)
        << ',' << fmt6(d.td_delta) << "\n";
  }));

  written.push_back(emit(spec, dir / "doclen_report.md", [&](std::ostream& o) {
    o << "\n# Document length experiment\n\n";
    o << "| model | TC long | TC short | TC delta | TD long | TD short | TD delta |\n";
    o << "|---|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& d : result.deltas)
      o << "| " << d.model << " | " << fmt6(d.tc_long) << " | "
        << fmt6(d.tc_short) << " | " << fmt6(d.tc_delta) << " | "
        << fmt6(d.td_long) << " | " << fmt6(d.td_short) << " | "
        << fmt6(d.td_delta) << " |\n";
  }));

  written.push_back(emit(spec, dir / "doclen_failures.csv", [&](std::ostream& o) {
    std::vector<CellFailure> all = result.short_band.failures;
    all.insert(all.end(), result.long_band.failures.begin(),
               result.long_band.failures.end());
    write_failures_csv(o, all);
  }));

  written.push_back(emit(spec, dir / "doclen_timings.csv", [&](std::ostream& o) {
    o << "kind,model,corpus,n_topics,run,wall_ms\n";
    for (const ComparisonResult* band : {&result.short_band, &result.long_band}) {
      for (const auto& t : band->chain_timings)
        o << "chain,," << t.corpus << ",," << t.run << ',' << fmt6(t.wall_ms)
          << "\n";
      for (const auto& r : band->rows)
        o << "cell," << r.model << ',' << r.corpus << ',' << r.n_topics << ','
          << r.run << ',' << fmt6(r.wall_ms) << "\n";
    }
  }));
  return written;
}

std::vector<std::string> write_outlier_report(const OutlierSweepResult& result,
                                              const ExperimentSpec& spec,
                                              const std::string& outdir) {
  fs::create_directories(outdir);
  const fs::path dir(outdir);
  std::vector<std::string> written;

  written.push_back(emit(spec, dir / "outlier_sweep.csv", [&](std::ostream& o) {
    o << "min_cluster_size,min_samples,run,run_seed,outlier_frac,tc,td,n_topics_effective\n";
    for (const auto& r : result.rows)
      o << r.min_cluster_size << ',' << r.min_samples << ',' << r.run << ','
        << r.run_seed << ',' << fmt6(r.outlier_frac) << ',' << fmt6(r.tc) << ','
        << fmt6(r.td) << ',' << r.n_topics_effective << "\n";
    for (const auto& a : result.aggregates)
      o << a.min_cluster_size << ',' << a.min_samples << ",mean,,"
        << fmt6(a.outlier_frac) << ',' << fmt6(a.tc) << ',' << fmt6(a.td) << ','
        << fmt6(static_cast<double>(a.n_topics_effective)) << "\n";
  }));

  written.push_back(emit(spec, dir / "outlier_plot.csv", [&](std::ostream& o) {
    o << "outlier_frac,tc,td\n";
    for (const auto& a : result.aggregates)
      o << fmt6(a.outlier_frac) << ',' << fmt6(a.tc) << ',' << fmt6(a.td)
        << "\n";
  }));

  written.push_back(emit(spec, dir / "outlier_sweep.md", [&](std::ostream& o) {
    o << "\n# Outlier parameter sweep\n\n";
    o << "| min_cluster_size | min_samples | outlier fraction | TC | TD | topics |\n";
    o << "|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& a : result.aggregates)
      o << "| " << a.min_cluster_size << " | " << a.min_samples << " | "
        << fmt6(a.outlier_frac) << " | " << fmt6(a.tc) << " | " << fmt6(a.td)
        << " | " << a.n_topics_effective << " |\n";
  }));

  written.push_back(
      emit(spec, dir / "outlier_failures.csv",
           [&](std::ostream& o) { write_failures_csv(o, result.failures); }));

  written.push_back(emit(spec, dir / "outlier_timings.csv", [&](std::ostream& o) {
    o << "kind,min_cluster_size,min_samples,run,wall_ms\n";
    for (const auto& r : result.rows)
      o << "cell," << r.min_cluster_size << ',' << r.min_samples << ',' << r.run
        << ',' << fmt6(r.wall_ms) << "\n";
  }));
  return written;
}

std::vector<std::string> write_non_outlier_report(const NonOutlierResult& result,
                                                  const ExperimentSpec& spec,
                                                  const std::string& outdir) {
  fs::create_directories(outdir);
  const fs::path dir(outdir);
  std::vector<std::string> written;

  written.push_back(
      emit(spec, dir / "non_outlier_report.csv", [&](std::ostream& o) {
        o << "# initial_outlier_fraction=" << fmt6(result.initial_outlier_fraction)
          << "\n";
        o << "# kept_docs=" << result.kept_docs << "\n";
        o << "model,corpus,n_topics,run,run_seed,tc,td,outlier_frac,n_topics_effective\n";
        for (const ComparisonResult* part : {&result.full, &result.filtered}) {
          for (const auto& r : part->rows)
            o << r.model << ',' << r.corpus << ',' << r.n_topics << ',' << r.run
              << ',' << r.run_seed << ',' << fmt6(r.tc) << ',' << fmt6(r.td)
              << ',' << fmt6(r.outlier_frac) << ',' << r.n_topics_effective
              << "\n";
          for (const auto& a : part->aggregates)
            o << a.model << ',' << a.corpus << ",all,mean,," << fmt6(a.tc) << ','
              << fmt6(a.td) << ',' << fmt6(a.outlier_frac) << ",\n";
        }
      }));

  written.push_back(
      emit(spec, dir / "non_outlier_deltas.csv", [&](std::ostream& o) {
        o << "model,tc_full,tc_filtered,tc_delta,td_full,td_filtered,td_delta\n";
        for (const auto& d : result.deltas)
          o << d.model << ',' << fmt6(d.tc_full) << ',' << fmt6(d.tc_filtered)
            << ',' << fmt6(d.tc_delta) << ',' << fmt6(d.td_full) << ','
            << fmt6(d.td_filtered) << ',' << fmt6(d.td_delta) << "\n";
      }));

  written.push_back(
      emit(spec, dir / "non_outlier_report.md", [&](std::ostream& o) {
        o << "\n# Non-outlier experiment\n\n";
        o << "Initial outlier fraction: " << fmt6(result.initial_outlier_fraction)
          << "; documents kept: " << result.kept_docs << "\n\n";
        o << "| model | TC full | TC filtered | TC delta | TD full | TD filtered | TD delta |\n";
        o << "|---|---:|---:|---:|---:|---:|---:|\n";
        for (const auto& d : result.deltas)
          o << "| " << d.model << " | " << fmt6(d.tc_full) << " | "
            << fmt6(d.tc_filtered) << " | " << fmt6(d.tc_delta) << " | "
            << fmt6(d.td_full) << " | " << fmt6(d.td_filtered) << " | "
            << fmt6(d.td_delta) << " |\n";
      }));

  written.push_back(
      emit(spec, dir / "non_outlier_failures.csv", [&](std::ostream& o) {
        std::vector<CellFailure> all = result.full.failures;
        all.insert(all.end(), result.filtered.failures.begin(),
                   result.filtered.failures.end());
        write_failures_csv(o, all);
      }));

  written.push_back(
      emit(spec, dir / "non_outlier_timings.csv", [&](std::ostream& o) {
        o << "kind,model,corpus,n_topics,run,wall_ms\n";
        for (const ComparisonResult* part : {&result.full, &result.filtered}) {
          for (const auto& t : part->chain_timings)
            o << "chain,," << t.corpus << ",," << t.run << ','
              << fmt6(t.wall_ms) << "\n";
          for (const auto& r : part->rows)
            o << "cell," << r.model << ',' << r.corpus << ',' << r.n_topics
              << ',' << r.run << ',' << fmt6(r.wall_ms) << "\n";
        }
      }));
  return written;
}

}  // namespace topiclab
