#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frugal/eval_data.hpp"
#include "frugal/frugality.hpp"
#include "frugal/learners.hpp"

namespace frugal {

struct SweepSpec {
    double start = 0.0;
    double end = 1.0;
    double step = 0.05;

    std::vector<double> values() const;
};

// Shared configuration for the ingest/analyze/bench pipelines. Accepted as
// CLI flags or a JSON document; unknown JSON keys are rejected.
struct RunConfig {
    // ingest
    std::vector<std::string> inputs;  // eval CSV paths and/or http(s) URLs
    long max_missing = 10;
    ImputationConfig impute;
    long fetch_timeout_ms = 5000;

    // analyze
    std::string matrix_path;  // defaults to <output_dir>/matrix.json
    SweepSpec sweep;
    std::vector<double> heatmap_w = {0.1, 0.5, 1.0};
    ResourceKind resource_kind = ResourceKind::cpu_time_ms;
    int clusters = 0;  // 0 = choose k by silhouette
    std::string cluster_space = "latent";  // "latent" or "raw"
    int latent_k = 5;
    int n_representatives = 10;
    std::vector<std::string> exclude_algorithms;  // dropped before Pareto/ranking
    std::string meta_path;  // optional meta-feature CSV for cluster summaries

    // bench
    std::vector<std::string> datasets;  // dataset CSV paths
    std::vector<std::string> learners = learner_ids();
    EvalProtocol protocol;
    std::string class_column = "class";
    std::string bench_output;  // defaults to <output_dir>/bench.csv
    std::string meta_output;   // optional meta-feature CSV to write

    std::string output_dir = "out";
    std::uint64_t seed = 0;

    static RunConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

struct IngestSummary {
    long datasets = 0;
    long algorithms = 0;
    long pruned_algorithms = 0;
    long imputed_cells = 0;
    long duplicate_pairs = 0;
    std::string matrix_path;
    std::string report_path;
    std::string manifest_path;

    nlohmann::json to_json() const;
};

struct AnalyzeSummary {
    long datasets = 0;
    long algorithms = 0;
    std::optional<double> hopkins;  // absent when fewer than 4 datasets
    int k = 0;
    double silhouette_mean = 0.0;
    double explained_variance = 0.0;
    long files_written = 0;
    std::string manifest_path;

    nlohmann::json to_json() const;
};

struct BenchSummary {
    long rows_written = 0;
    std::vector<std::string> failures;  // "dataset: reason"
    std::string output_path;
    std::string manifest_path;

    nlohmann::json to_json() const;
};

// Reads, assembles, prunes and imputes the evaluation matrix; writes the
// matrix file, the pruning report and a manifest.
IngestSummary run_ingest(const RunConfig& config);

// Full frugal-lens analysis bundle: rank tables, curves, crossings,
// clustering, representatives, Pareto fronts, PCA view and ordered heat maps,
// with a manifest written last.
AnalyzeSummary run_analyze(const RunConfig& config);

// Metered evaluation of the learner suite; appends eval CSV rows. Failing
// datasets are reported and skipped.
BenchSummary run_bench(const RunConfig& config);

}  // namespace frugal
