// frugal - evaluate learning algorithms through a frugal lens.
//
// The CLI is a thin shell over the shared library's C API: flags (and an
// optional JSON config file) are merged into one config document, handed to
// frugal_ingest / frugal_analyze / frugal_bench, and the returned summary is
// printed. Exit codes: 0 success, 1 partial/processing failure, 2 usage or
// I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "frugal.h"
#include "json.hpp"

namespace {

using nlohmann::json;

int exit_code_for(int rc) {
    switch (rc) {
        case FRUGAL_OK: return 0;
        case FRUGAL_ERR_IO:
        case FRUGAL_ERR_ARGUMENT:
        case FRUGAL_ERR_CONFIG: return 2;
        default: return 1;
    }
}

struct CommonFlags {
    std::string config_path;
    std::string output_dir;
    std::optional<long> seed;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file; flags win on conflict");
    cmd->add_option("-o,--output-dir", flags.output_dir,
                    "output directory (default: $FRUGAL_OUT_DIR or ./out)");
    cmd->add_option("--seed", flags.seed, "master seed (default 0)");
}

json load_config(const CommonFlags& flags) {
    json config = json::object();
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) {
            std::cerr << "error: cannot read config file " << flags.config_path << "\n";
            std::exit(2);
        }
        try {
            in >> config;
        } catch (const json::parse_error& e) {
            std::cerr << "error: bad config file: " << e.what() << "\n";
            std::exit(2);
        }
    }
    if (!flags.output_dir.empty()) {
        config["output_dir"] = flags.output_dir;
    } else if (!config.contains("output_dir")) {
        if (const char* env = std::getenv("FRUGAL_OUT_DIR"); env && *env)
            config["output_dir"] = env;
    }
    if (flags.seed) config["seed"] = *flags.seed;
    return config;
}

int run(int (*fn)(const char*, char**), const json& config, const char* command) {
    char* summary = nullptr;
    const int rc = fn(config.dump().c_str(), &summary);
    if (summary) {
        std::cout << summary << "\n";
        frugal_string_free(summary);
    }
    if (rc != FRUGAL_OK)
        std::cerr << "error (" << command << "): " << frugal_last_error() << "\n";
    return exit_code_for(rc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frugal-lens evaluation of learning algorithms: frugality scores, "
                 "Pareto fronts, dataset clustering and ranked reports."};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand(
        "ingest", "Read evaluation records, prune and impute, write the matrix file");
    CommonFlags ingest_flags;
    add_common(ingest, ingest_flags);
    std::vector<std::string> inputs;
    std::optional<long> max_missing;
    std::optional<int> rank, max_iterations;
    std::optional<double> tolerance;
    std::optional<long> timeout_ms;
    std::string matrix_out;
    ingest->add_option("inputs", inputs, "eval CSV files and/or http(s) URLs");
    ingest->add_option("--max-missing", max_missing,
                       "prune algorithms with more missing cells than this (default 10)");
    ingest->add_option("--rank", rank, "imputation rank (default 5)");
    ingest->add_option("--tolerance", tolerance, "imputation tolerance (default 1e-6)");
    ingest->add_option("--max-iterations", max_iterations,
                       "imputation iteration cap (default 100)");
    ingest->add_option("--timeout-ms", timeout_ms, "HTTP timeout (default 5000)");
    ingest->add_option("--matrix", matrix_out, "matrix file to write (default <out>/matrix.json)");

    // analyze
    auto* analyze = app.add_subcommand(
        "analyze", "Rank tables, curves, clustering, Pareto fronts and heat maps");
    CommonFlags analyze_flags;
    add_common(analyze, analyze_flags);
    std::string matrix_in, cluster_space, clusters, meta_path;
    std::vector<double> sweep, heatmap_w;
    std::optional<int> latent_k, representatives;
    std::vector<std::string> exclude;
    analyze->add_option("--matrix", matrix_in, "matrix file (default <out>/matrix.json)");
    analyze->add_option("--sweep", sweep, "w sweep as START END STEP (default 0 1 0.05)")
        ->expected(3);
    analyze->add_option("--heatmap-w", heatmap_w, "heat map panels (default 0.1 0.5 1.0)");
    analyze->add_option("--clusters", clusters, "cluster count or 'auto' (default auto)");
    analyze->add_option("--cluster-space", cluster_space,
                        "feature space for clustering: latent|raw (default latent)");
    analyze->add_option("--latent-k", latent_k, "latent dimensions (default 5)");
    analyze->add_option("--representatives", representatives,
                        "medoid representatives to select (default 10)");
    analyze->add_option("--exclude", exclude, "algorithm ids to drop (e.g. baselines)");
    analyze->add_option("--meta", meta_path,
                        "meta-feature CSV for per-cluster property summaries");

    // bench
    auto* bench = app.add_subcommand(
        "bench", "Run the metered learner suite on local dataset CSVs");
    CommonFlags bench_flags;
    add_common(bench, bench_flags);
    std::vector<std::string> datasets, learners;
    std::string class_column, bench_out, meta_out, protocol_kind;
    std::optional<int> folds;
    std::optional<double> holdout;
    bench->add_option("datasets", datasets, "dataset CSV files");
    bench->add_option("--learners", learners,
                      "learners to run (default zeror stump naive_bayes hyperpipes)");
    bench->add_option("--class-column", class_column, "target column name (default 'class')");
    bench->add_option("--protocol", protocol_kind, "cv or holdout (default cv)");
    bench->add_option("--folds", folds, "cross-validation folds (default 10)");
    bench->add_option("--holdout-fraction", holdout, "held-out fraction (default 0.3)");
    bench->add_option("--bench-output", bench_out,
                      "eval CSV to append to (default <out>/bench.csv)");
    bench->add_option("--meta-out", meta_out, "also write per-dataset meta-features here");

    CLI11_PARSE(app, argc, argv);

    if (ingest->parsed()) {
        json config = load_config(ingest_flags);
        if (!inputs.empty()) config["inputs"] = inputs;
        if (max_missing) config["max_missing"] = *max_missing;
        if (rank) config["impute"]["rank"] = *rank;
        if (tolerance) config["impute"]["tolerance"] = *tolerance;
        if (max_iterations) config["impute"]["max_iterations"] = *max_iterations;
        if (timeout_ms) config["fetch_timeout_ms"] = *timeout_ms;
        if (!matrix_out.empty()) config["matrix"] = matrix_out;
        char* summary = nullptr;
        const int rc = frugal_ingest(config.dump().c_str(), &summary);
        if (rc == FRUGAL_OK && summary) {
            const json doc = json::parse(summary);
            std::cout << "ingested " << doc["datasets"] << " datasets x " << doc["algorithms"]
                      << " algorithms; pruned " << doc["pruned_algorithms"]
                      << " algorithms; imputed " << doc["imputed_cells"] << " cells";
            if (doc["duplicate_pairs"].get<long>() > 0)
                std::cout << "; averaged " << doc["duplicate_pairs"] << " duplicate pairs";
            std::cout << "\nmatrix: " << doc["matrix"].get<std::string>() << "\n";
            if (doc["algorithms"].get<long>() == 0)
                std::cerr << "warning: the matrix is empty (every algorithm was pruned)\n";
        }
        if (summary) frugal_string_free(summary);
        if (rc != FRUGAL_OK) std::cerr << "error (ingest): " << frugal_last_error() << "\n";
        return exit_code_for(rc);
    }

    if (analyze->parsed()) {
        json config = load_config(analyze_flags);
        if (!matrix_in.empty()) config["matrix"] = matrix_in;
        if (!sweep.empty())
            config["sweep"] = {{"start", sweep[0]}, {"end", sweep[1]}, {"step", sweep[2]}};
        if (!heatmap_w.empty()) config["heatmap_w"] = heatmap_w;
        if (!clusters.empty()) {
            if (clusters == "auto")
                config["clusters"] = "auto";
            else
                config["clusters"] = std::stoi(clusters);
        }
        if (!cluster_space.empty()) config["cluster_space"] = cluster_space;
        if (latent_k) config["latent_k"] = *latent_k;
        if (representatives) config["representatives"] = *representatives;
        if (!exclude.empty()) config["exclude"] = exclude;
        if (!meta_path.empty()) config["meta"] = meta_path;
        return run(frugal_analyze, config, "analyze");
    }

    // bench
    json config = load_config(bench_flags);
    if (!datasets.empty()) config["datasets"] = datasets;
    if (!learners.empty()) config["learners"] = learners;
    if (!class_column.empty()) config["class_column"] = class_column;
    if (!protocol_kind.empty()) config["protocol"]["kind"] = protocol_kind;
    if (folds) config["protocol"]["folds"] = *folds;
    if (holdout) {
        config["protocol"]["kind"] = "holdout";
        config["protocol"]["fraction"] = *holdout;
    }
    if (!bench_out.empty()) config["bench_output"] = bench_out;
    if (!meta_out.empty()) config["meta_output"] = meta_out;

    char* summary = nullptr;
    const int rc = frugal_bench(config.dump().c_str(), &summary);
    if (summary) {
        const json doc = json::parse(summary);
        std::cout << "wrote " << doc["rows_written"] << " evaluation rows to "
                  << doc["output"].get<std::string>() << "\n";
        for (const auto& failure : doc["failures"])
            std::cerr << "failed: " << failure.get<std::string>() << "\n";
        frugal_string_free(summary);
    }
    if (rc != FRUGAL_OK && rc != FRUGAL_ERR_PARTIAL)
        std::cerr << "error (bench): " << frugal_last_error() << "\n";
    return exit_code_for(rc);
}
