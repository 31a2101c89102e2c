#include "frugal/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "frugal/meta_space.hpp"
#include "frugal/pareto.hpp"
#include "frugal/report.hpp"
#include "frugal/text.hpp"

namespace fs = std::filesystem;

namespace frugal {

std::vector<double> SweepSpec::values() const {
    if (!(step > 0.0)) throw Error(ErrorKind::config, "sweep step must be positive");
    if (end < start) throw Error(ErrorKind::config, "sweep end must be >= start");
    std::vector<double> grid;
    const long count = static_cast<long>(std::floor((end - start) / step + 1e-9));
    for (long i = 0; i <= count; ++i) grid.push_back(start + static_cast<double>(i) * step);
    return grid;
}

namespace {

ResourceKind resource_kind_from_string(const std::string& name) {
    if (name == "cpu_time_ms") return ResourceKind::cpu_time_ms;
    if (name == "ram_hours") return ResourceKind::ram_hours;
    throw Error(ErrorKind::config, "unknown resource kind '" + name + "'");
}

std::string resource_kind_to_string(ResourceKind kind) {
    return kind == ResourceKind::cpu_time_ms ? "cpu_time_ms" : "ram_hours";
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
    RunConfig config;
    static const std::set<std::string> known = {
        "inputs", "max_missing", "impute", "fetch_timeout_ms", "matrix", "sweep",
        "heatmap_w", "resource_kind", "clusters", "cluster_space", "latent_k",
        "representatives", "exclude", "meta", "datasets", "learners", "protocol",
        "class_column", "bench_output", "meta_output", "output_dir", "seed"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!known.count(key))
            throw Error(ErrorKind::config, "unknown config key '" + key + "'");
    }
    auto get = [&](const char* key) { return doc.contains(key); };
    if (get("inputs")) config.inputs = doc["inputs"].get<std::vector<std::string>>();
    if (get("max_missing")) config.max_missing = doc["max_missing"].get<long>();
    if (get("impute")) {
        const auto& imp = doc["impute"];
        if (imp.contains("rank")) config.impute.rank = imp["rank"].get<int>();
        if (imp.contains("tolerance")) config.impute.tolerance = imp["tolerance"].get<double>();
        if (imp.contains("max_iterations"))
            config.impute.max_iterations = imp["max_iterations"].get<int>();
    }
    if (get("fetch_timeout_ms")) config.fetch_timeout_ms = doc["fetch_timeout_ms"].get<long>();
    if (get("matrix")) config.matrix_path = doc["matrix"].get<std::string>();
    if (get("sweep")) {
        const auto& sweep = doc["sweep"];
        if (sweep.contains("start")) config.sweep.start = sweep["start"].get<double>();
        if (sweep.contains("end")) config.sweep.end = sweep["end"].get<double>();
        if (sweep.contains("step")) config.sweep.step = sweep["step"].get<double>();
    }
    if (get("heatmap_w")) config.heatmap_w = doc["heatmap_w"].get<std::vector<double>>();
    if (get("resource_kind"))
        config.resource_kind = resource_kind_from_string(doc["resource_kind"].get<std::string>());
    if (get("clusters")) {
        if (doc["clusters"].is_string()) {
            if (doc["clusters"].get<std::string>() != "auto")
                throw Error(ErrorKind::config, "clusters must be an integer or \"auto\"");
            config.clusters = 0;
        } else {
            config.clusters = doc["clusters"].get<int>();
        }
    }
    if (get("cluster_space")) {
        config.cluster_space = doc["cluster_space"].get<std::string>();
        if (config.cluster_space != "latent" && config.cluster_space != "raw")
            throw Error(ErrorKind::config, "cluster_space must be \"latent\" or \"raw\"");
    }
    if (get("latent_k")) config.latent_k = doc["latent_k"].get<int>();
    if (get("representatives")) config.n_representatives = doc["representatives"].get<int>();
    if (get("exclude")) config.exclude_algorithms = doc["exclude"].get<std::vector<std::string>>();
    if (get("meta")) config.meta_path = doc["meta"].get<std::string>();
    if (get("datasets")) config.datasets = doc["datasets"].get<std::vector<std::string>>();
    if (get("learners")) config.learners = doc["learners"].get<std::vector<std::string>>();
    if (get("protocol")) {
        const auto& protocol = doc["protocol"];
        const std::string kind = protocol.value("kind", "cv");
        if (kind == "cv") {
            config.protocol.kind = EvalProtocol::Kind::cross_validation;
            if (protocol.contains("folds")) config.protocol.folds = protocol["folds"].get<int>();
        } else if (kind == "holdout") {
            config.protocol.kind = EvalProtocol::Kind::holdout;
            if (protocol.contains("fraction"))
                config.protocol.holdout_fraction = protocol["fraction"].get<double>();
        } else {
            throw Error(ErrorKind::config, "protocol kind must be \"cv\" or \"holdout\"");
        }
    }
    if (get("class_column")) config.class_column = doc["class_column"].get<std::string>();
    if (get("bench_output")) config.bench_output = doc["bench_output"].get<std::string>();
    if (get("meta_output")) config.meta_output = doc["meta_output"].get<std::string>();
    if (get("output_dir")) config.output_dir = doc["output_dir"].get<std::string>();
    if (get("seed")) config.seed = doc["seed"].get<std::uint64_t>();
    return config;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json protocol;
    if (this->protocol.kind == EvalProtocol::Kind::cross_validation)
        protocol = {{"kind", "cv"}, {"folds", this->protocol.folds}};
    else
        protocol = {{"kind", "holdout"}, {"fraction", this->protocol.holdout_fraction}};
    return nlohmann::json{
        {"inputs", inputs},
        {"max_missing", max_missing},
        {"impute",
         {{"rank", impute.rank},
          {"tolerance", impute.tolerance},
          {"max_iterations", impute.max_iterations}}},
        {"fetch_timeout_ms", fetch_timeout_ms},
        {"matrix", matrix_path},
        {"sweep", {{"start", sweep.start}, {"end", sweep.end}, {"step", sweep.step}}},
        {"heatmap_w", heatmap_w},
        {"resource_kind", resource_kind_to_string(resource_kind)},
        {"clusters", clusters},
        {"cluster_space", cluster_space},
        {"latent_k", latent_k},
        {"representatives", n_representatives},
        {"exclude", exclude_algorithms},
        {"meta", meta_path},
        {"datasets", datasets},
        {"learners", learners},
        {"protocol", protocol},
        {"class_column", class_column},
        {"bench_output", bench_output},
        {"meta_output", meta_output},
        {"output_dir", output_dir},
        {"seed", seed}};
}

nlohmann::json IngestSummary::to_json() const {
    return nlohmann::json{{"datasets", datasets},
                          {"algorithms", algorithms},
                          {"pruned_algorithms", pruned_algorithms},
                          {"imputed_cells", imputed_cells},
                          {"duplicate_pairs", duplicate_pairs},
                          {"matrix", matrix_path},
                          {"report", report_path},
                          {"manifest", manifest_path}};
}

nlohmann::json AnalyzeSummary::to_json() const {
    nlohmann::json doc{{"datasets", datasets},
                       {"algorithms", algorithms},
                       {"k", k},
                       {"silhouette_mean", silhouette_mean},
                       {"explained_variance", explained_variance},
                       {"files_written", files_written},
                       {"manifest", manifest_path}};
    doc["hopkins"] = hopkins ? nlohmann::json(*hopkins) : nlohmann::json();
    return doc;
}

nlohmann::json BenchSummary::to_json() const {
    return nlohmann::json{{"rows_written", rows_written},
                          {"failures", failures},
                          {"output", output_path},
                          {"manifest", manifest_path}};
}

namespace {

class Bundle {
public:
    Bundle(const std::string& dir, const std::string& command, std::uint64_t seed)
        : dir_(dir), command_(command), seed_(seed) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir);
    }

    std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

    void write(const std::string& name, const std::string& bytes, const std::string& kind) {
        const std::string full = path(name);
        std::ofstream out(full, std::ios::binary);
        if (!out) throw Error(ErrorKind::io, "cannot write " + full);
        out << bytes;
        files_.push_back({name, kind});
    }

    void note(const std::string& name, const std::string& kind) {
        files_.push_back({name, kind});
    }

    // The manifest is always the last file written; a bundle is valid iff
    // every file it declares exists.
    std::string finish() {
        nlohmann::json files = nlohmann::json::array();
        for (const auto& [name, kind] : files_)
            files.push_back({{"path", name}, {"kind", kind}});
        nlohmann::json doc{{"schema", "frugal-manifest/1"},
                           {"command", command_},
                           {"seed", seed_},
                           {"files", files}};
        const std::string manifest_name = "manifest_" + command_ + ".json";
        const std::string full = path(manifest_name);
        std::ofstream out(full, std::ios::binary);
        if (!out) throw Error(ErrorKind::io, "cannot write " + full);
        out << doc.dump(1) << "\n";
        return full;
    }

    long count() const { return static_cast<long>(files_.size()); }

private:
    std::string dir_;
    std::string command_;
    std::uint64_t seed_;
    std::vector<std::pair<std::string, std::string>> files_;
};

std::string w_tag(double w) { return fmt_double(w, 4); }

EvalMatrix exclude_algorithms(const EvalMatrix& matrix, const std::vector<std::string>& drop) {
    if (drop.empty()) return matrix;
    const std::set<std::string> dropped(drop.begin(), drop.end());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < matrix.cols(); ++c)
        if (!dropped.count(matrix.algorithms[static_cast<std::size_t>(c)])) keep.push_back(c);
    EvalMatrix out;
    out.datasets = matrix.datasets;
    out.auc.resize(matrix.rows(), static_cast<Eigen::Index>(keep.size()));
    out.train_ms.resize(matrix.rows(), static_cast<Eigen::Index>(keep.size()));
    out.test_ms.resize(matrix.rows(), static_cast<Eigen::Index>(keep.size()));
    out.mask.resize(matrix.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const Eigen::Index c = keep[i];
        out.algorithms.push_back(matrix.algorithms[static_cast<std::size_t>(c)]);
        out.auc.col(static_cast<Eigen::Index>(i)) = matrix.auc.col(c);
        out.train_ms.col(static_cast<Eigen::Index>(i)) = matrix.train_ms.col(c);
        out.test_ms.col(static_cast<Eigen::Index>(i)) = matrix.test_ms.col(c);
        out.mask.col(static_cast<Eigen::Index>(i)) = matrix.mask.col(c);
    }
    return out;
}

// Frugality scores for every cell at a fixed w.
Eigen::MatrixXd score_matrix(const EvalMatrix& matrix, double w) {
    Eigen::MatrixXd scores(matrix.rows(), matrix.cols());
    for (Eigen::Index r = 0; r < matrix.rows(); ++r)
        for (Eigen::Index c = 0; c < matrix.cols(); ++c)
            scores(r, c) = frug_score(matrix.auc(r, c), w,
                                      resource_total(matrix.train_ms(r, c), matrix.test_ms(r, c)));
    return scores;
}

}  // namespace

IngestSummary run_ingest(const RunConfig& config) {
    if (config.inputs.empty())
        throw Error(ErrorKind::argument, "ingest: no inputs given");

    std::vector<EvalRecord> records;
    for (const auto& input : config.inputs) {
        std::vector<EvalRecord> part;
        if (input.rfind("http://", 0) == 0 || input.rfind("https://", 0) == 0)
            part = fetch_remote_records(input, config.fetch_timeout_ms);
        else
            part = read_eval_csv_file(input);
        records.insert(records.end(), part.begin(), part.end());
    }

    BuildResult built = build_matrix(records);
    PruneResult pruned = prune_algorithms(built.matrix, config.max_missing);

    const long missing_before = pruned.matrix.num_missing();
    EvalMatrix complete = pruned.matrix;
    if (pruned.matrix.cols() > 0 && pruned.matrix.rows() > 0)
        complete = impute_matrix(pruned.matrix, config.impute);

    Bundle bundle(config.output_dir, "ingest", config.seed);
    IngestSummary summary;
    summary.matrix_path = config.matrix_path.empty() ? bundle.path("matrix.json")
                                                     : config.matrix_path;
    save_matrix(complete, summary.matrix_path);
    if (summary.matrix_path == bundle.path("matrix.json"))
        bundle.note("matrix.json", "matrix");
    bundle.write("pruning_report.csv", prune_report_csv(pruned.removed), "prune_report");

    summary.datasets = static_cast<long>(complete.datasets.size());
    summary.algorithms = static_cast<long>(complete.algorithms.size());
    summary.pruned_algorithms = static_cast<long>(pruned.removed.size());
    summary.imputed_cells = missing_before;
    summary.duplicate_pairs = static_cast<long>(built.duplicates.size());
    summary.report_path = bundle.path("pruning_report.csv");
    summary.manifest_path = bundle.finish();
    return summary;
}

AnalyzeSummary run_analyze(const RunConfig& config) {
    const std::string matrix_path = config.matrix_path.empty()
                                        ? (fs::path(config.output_dir) / "matrix.json").string()
                                        : config.matrix_path;
    EvalMatrix matrix = load_matrix(matrix_path);
    matrix = exclude_algorithms(matrix, config.exclude_algorithms);
    if (matrix.rows() == 0 || matrix.cols() == 0)
        throw Error(ErrorKind::argument, "analyze: the matrix is empty");
    if (!matrix.complete())
        throw Error(ErrorKind::precondition,
                    "analyze: matrix has unobserved cells; run ingest (which imputes) first");

    Bundle bundle(config.output_dir, "analyze", config.seed);
    AnalyzeSummary summary;
    summary.datasets = static_cast<long>(matrix.datasets.size());
    summary.algorithms = static_cast<long>(matrix.algorithms.size());

    // --- ranking stage ---------------------------------------------------
    const std::vector<double> grid = config.sweep.values();
    try {
        std::set<std::string> used_tags;
        for (double w : grid) {
            std::string tag = w_tag(w);
            while (!used_tags.insert(tag).second) tag += "_";
            const RankTable table = rank_algorithms(matrix, w);
            bundle.write("rank_w" + tag + ".csv", rank_table_csv(table), "rank_table");
            bundle.write("rank_w" + tag + ".json", rank_table_json(table).dump(1) + "\n",
                         "rank_table");
        }

        const auto curves = averaged_curves(matrix, grid);
        bundle.write("curves.csv", curves_csv(curves), "curves");
        std::string crossings = "algorithm_a,algorithm_b,w\n";
        for (std::size_t i = 0; i < curves.size(); ++i)
            for (std::size_t j = i + 1; j < curves.size(); ++j)
                if (auto w = crossing_w_lines(curves[i], curves[j]);
                    w && *w >= grid.front() && *w <= grid.back())
                    crossings += curves[i].algorithm_id + "," + curves[j].algorithm_id + "," +
                                 fmt_double(*w) + "\n";
        bundle.write("crossings.csv", crossings, "crossings");

        PlotSpec curve_spec;
        curve_spec.title = "Frugality curves (dataset averages)";
        curve_spec.x_label = "w";
        curve_spec.y_label = "frugality score";
        // readable legends cap the plotted curves; the CSV carries all of them
        std::vector<FrugalityCurve> plotted(curves.begin(),
                                            curves.begin() + std::min<std::size_t>(curves.size(), 10));
        bundle.write("curves.svg", emit_curves(plotted, curve_spec), "plot");
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("ranking stage: ") + e.what());
    }

    // --- structure stage --------------------------------------------------
    ClusterAssignment assignment;
    nlohmann::json structure;
    try {
        const Eigen::MatrixXd base_scores = score_matrix(matrix, 0.0);
        PointSet feature_space;
        feature_space.ids = matrix.datasets;
        double explained = 1.0;
        nlohmann::json latent_info;
        if (config.cluster_space == "latent") {
            const int k_latent = std::min<int>(
                config.latent_k,
                static_cast<int>(std::min(base_scores.rows(), base_scores.cols())));
            const LatentSpace latent = svd_latent(base_scores, k_latent);
            feature_space.coordinates = latent.u;
            explained = latent.explained_variance;
            bundle.write("latent.csv", latent_csv(latent, matrix.datasets), "latent_space");
            latent_info = {{"k", k_latent}, {"explained_variance", explained}};
        } else {
            feature_space.coordinates = base_scores;
        }
        summary.explained_variance = explained;

        // the dendrogram orders heat-map rows; taken on the raw feature space
        const Dendrogram dendrogram = matrix.rows() >= 2
                                          ? hierarchical_cluster(feature_space)
                                          : Dendrogram{{}, matrix.datasets};
        bundle.write("dendrogram.json", dendrogram_json(dendrogram).dump(1) + "\n",
                     "dendrogram");

        const PointSet standardized = standardize(feature_space);
        structure["feature_space"] = config.cluster_space;
        if (!latent_info.is_null()) structure["latent"] = latent_info;

        const Eigen::Index n = standardized.size();
        if (n >= 4 && standardized.dims() >= 1) {
            const int m = std::max(1, std::min(50, static_cast<int>(n / 10)));
            summary.hopkins = hopkins(standardized, m, config.seed);
            structure["hopkins"] = *summary.hopkins;
            structure["hopkins_m"] = m;
        } else {
            structure["hopkins"] = nullptr;
            structure["note"] = "hopkins skipped: fewer than 4 datasets";
        }

        int k = config.clusters;
        if (k == 0) {
            const int k_max = std::min<int>(6, static_cast<int>(n) - 1);
            if (k_max >= 2) {
                const KSelection selection =
                    choose_k_silhouette(standardized, 2, k_max, config.seed);
                k = selection.k_best;
                nlohmann::json per_k = nlohmann::json::array();
                for (const auto& [kk, s] : selection.per_k) per_k.push_back({kk, s});
                structure["k_selection"] = per_k;
            } else {
                k = 1;
            }
        }
        k = std::min<int>(k, static_cast<int>(n));
        structure["k"] = k;
        summary.k = k;

        assignment = kmeans(standardized, k, config.seed);
        bundle.write("clusters_kmeans.csv", assignment_csv(assignment), "assignment");
        const ClusterAssignment pam = pam_medoids(standardized, k, config.seed);
        bundle.write("clusters_pam.csv", assignment_csv(pam), "assignment");
        nlohmann::json medoids = nlohmann::json::array();
        for (const auto& id : pam.medoid_ids) medoids.push_back(id);
        structure["pam_medoids"] = medoids;

        if (k >= 2) {
            summary.silhouette_mean = silhouette(standardized, assignment).mean;
            structure["silhouette_mean"] = summary.silhouette_mean;
        }

        const int n_rep = std::min<int>(config.n_representatives, static_cast<int>(n));
        if (n_rep >= k) {
            const auto representatives =
                select_representatives(standardized, assignment, n_rep, config.seed);
            std::string csv = "cluster,dataset_id\n";
            for (const auto& id : representatives)
                csv += std::to_string(assignment.label_of(id)) + "," + id + "\n";
            bundle.write("representatives.csv", csv, "representatives");
        }

        if (standardized.dims() >= 2 && n >= 2) {
            const Eigen::MatrixXd pca = pca_project(standardized, 2);
            std::string csv = "dataset_id,pc1,pc2,cluster\n";
            for (Eigen::Index i = 0; i < n; ++i)
                csv += matrix.datasets[static_cast<std::size_t>(i)] + "," +
                       fmt_double(pca(i, 0)) + "," + fmt_double(pca(i, 1)) + "," +
                       std::to_string(assignment.labels[static_cast<std::size_t>(i)]) + "\n";
            bundle.write("pca.csv", csv, "pca");
            PlotSpec pca_spec;
            pca_spec.title = "Datasets, first two principal components";
            pca_spec.x_label = "PC1";
            pca_spec.y_label = "PC2";
            bundle.write("pca.svg", emit_scatter(pca, assignment.labels, pca_spec), "plot");
        }

        bundle.write("structure.json", structure.dump(1) + "\n", "structure");

        // --- pareto stage -------------------------------------------------
        std::string per_dataset = "cluster_or_dataset,algorithm_id,auc,time_ms,on_front\n";
        const auto dataset_fronts = per_dataset_fronts(matrix);
        for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
            const auto& id = matrix.datasets[static_cast<std::size_t>(r)];
            std::vector<ParetoPoint> points;
            for (Eigen::Index c = 0; c < matrix.cols(); ++c)
                points.push_back(
                    {matrix.algorithms[static_cast<std::size_t>(c)], matrix.auc(r, c),
                     resource_total(matrix.train_ms(r, c), matrix.test_ms(r, c))});
            append_front_csv(per_dataset, id, points, dataset_fronts.at(id));
        }
        bundle.write("pareto_datasets.csv", per_dataset, "pareto");

        const auto points = grand_mean_points(matrix);
        const ParetoFront front = pareto_front(points);
        std::string global_csv = "cluster_or_dataset,algorithm_id,auc,time_ms,on_front\n";
        append_front_csv(global_csv, "global", points, front);
        bundle.write("pareto_global.csv", global_csv, "pareto");
        PlotSpec pareto_spec;
        pareto_spec.title = "Pareto front, grand means over all datasets";
        pareto_spec.x_label = "AUC";
        pareto_spec.y_label = "train+test ms (log10)";
        pareto_spec.y_log10 = true;
        bundle.write("pareto_global.svg", emit_pareto(points, front, pareto_spec), "plot");

        const auto cluster_fronts = cluster_averaged_fronts(matrix, assignment);
        std::string cluster_csv = "cluster_or_dataset,algorithm_id,auc,time_ms,on_front\n";
        for (const auto& [cluster, cl_front] : cluster_fronts) {
            std::vector<ParetoPoint> cl_points;
            for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
                double auc_sum = 0.0, time_sum = 0.0;
                long members = 0;
                for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
                    if (assignment.labels[static_cast<std::size_t>(r)] != cluster) continue;
                    auc_sum += matrix.auc(r, c);
                    time_sum += resource_total(matrix.train_ms(r, c), matrix.test_ms(r, c));
                    ++members;
                }
                cl_points.push_back({matrix.algorithms[static_cast<std::size_t>(c)],
                                     auc_sum / static_cast<double>(members),
                                     time_sum / static_cast<double>(members)});
            }
            append_front_csv(cluster_csv, "cluster" + std::to_string(cluster), cl_points,
                             cl_front);
            PlotSpec spec;
            spec.title = "Pareto front, cluster " + std::to_string(cluster) + " averages";
            spec.x_label = "AUC";
            spec.y_label = "train+test ms (log10)";
            spec.y_log10 = true;
            bundle.write("pareto_cluster" + std::to_string(cluster) + ".svg",
                         emit_pareto(cl_points, cl_front, spec), "plot");
        }
        bundle.write("pareto_clusters.csv", cluster_csv, "pareto");

        const auto col_order = column_order(matrix);
        std::string order_csv = "position,algorithm_id,on_front\n";
        for (std::size_t i = 0; i < col_order.size(); ++i)
            order_csv += std::to_string(i + 1) + "," + col_order[i] + "," +
                         (front.contains(col_order[i]) ? "1" : "0") + "\n";
        bundle.write("column_order.csv", order_csv, "column_order");

        // --- heat maps ----------------------------------------------------
        // row and column orders are fixed from the w=0 analysis and reused
        // for every panel
        HeatmapSpec heat;
        heat.row_order = dendrogram.leaf_order;
        heat.col_order = col_order;
        heat.color_stops = HeatmapSpec::default_stops();
        std::set<std::string> used_heat_tags;
        for (double w : config.heatmap_w) {
            std::string tag = w_tag(w);
            while (!used_heat_tags.insert(tag).second) tag += "_";
            heat.title = "Frugality scores, w=" + tag;
            const Eigen::MatrixXd scores = score_matrix(matrix, w);
            bundle.write("heatmap_w" + tag + ".svg",
                         emit_heatmap(scores, matrix.datasets, matrix.algorithms, heat), "plot");
            std::string csv = "dataset_id";
            for (const auto& algorithm : heat.col_order) csv += "," + algorithm;
            csv += "\n";
            std::map<std::string, Eigen::Index> row_of, col_of;
            for (Eigen::Index r = 0; r < matrix.rows(); ++r)
                row_of[matrix.datasets[static_cast<std::size_t>(r)]] = r;
            for (Eigen::Index c = 0; c < matrix.cols(); ++c)
                col_of[matrix.algorithms[static_cast<std::size_t>(c)]] = c;
            for (const auto& dataset : heat.row_order) {
                csv += dataset;
                for (const auto& algorithm : heat.col_order)
                    csv += "," + fmt_double(scores(row_of[dataset], col_of[algorithm]));
                csv += "\n";
            }
            bundle.write("heatmap_w" + tag + ".csv", csv, "heatmap_data");
        }

        // --- cluster property summaries (optional meta join) ---------------
        if (!config.meta_path.empty()) {
            std::ifstream meta_in(config.meta_path, std::ios::binary);
            if (!meta_in) throw Error(ErrorKind::io, "cannot read " + config.meta_path);
            std::string line;
            std::vector<std::string> header;
            std::map<std::string, std::vector<double>> rows;
            while (std::getline(meta_in, line)) {
                const auto text = trim(line);
                if (text.empty()) continue;
                auto fields = split_csv_line(text);
                if (header.empty()) {
                    header.assign(fields.begin(), fields.end());
                    continue;
                }
                std::vector<double> values;
                for (std::size_t i = 1; i < fields.size(); ++i) {
                    double v = 0.0;
                    parse_double(fields[i], v);
                    values.push_back(v);
                }
                rows[fields[0]] = values;
            }
            std::string csv = "cluster,feature,mean,median\n";
            for (int cluster = 0; cluster < assignment.k; ++cluster) {
                for (std::size_t f = 1; f < header.size(); ++f) {
                    std::vector<double> values;
                    for (std::size_t i = 0; i < assignment.ids.size(); ++i) {
                        if (assignment.labels[i] != cluster) continue;
                        const auto it = rows.find(assignment.ids[i]);
                        if (it != rows.end() && f - 1 < it->second.size())
                            values.push_back(it->second[f - 1]);
                    }
                    if (values.empty()) continue;
                    std::sort(values.begin(), values.end());
                    const double mean =
                        std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(values.size());
                    const double median =
                        values.size() % 2 == 1
                            ? values[values.size() / 2]
                            : (values[values.size() / 2 - 1] + values[values.size() / 2]) / 2.0;
                    csv += std::to_string(cluster) + "," + header[f] + "," + fmt_double(mean) +
                           "," + fmt_double(median) + "\n";
                }
            }
            bundle.write("cluster_properties.csv", csv, "cluster_properties");
        }
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("analysis stage: ") + e.what());
    }

    summary.files_written = bundle.count();
    summary.manifest_path = bundle.finish();
    return summary;
}

BenchSummary run_bench(const RunConfig& config) {
    if (config.datasets.empty()) throw Error(ErrorKind::argument, "bench: no datasets given");
    for (const auto& learner : config.learners)
        make_learner(learner);  // validates the selection up front

    Bundle bundle(config.output_dir, "bench", config.seed);
    BenchSummary summary;
    summary.output_path =
        config.bench_output.empty() ? bundle.path("bench.csv") : config.bench_output;

    const bool fresh = !fs::exists(summary.output_path);
    std::ofstream out(summary.output_path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorKind::io, "cannot write " + summary.output_path);
    if (fresh) out << "algorithm_id,dataset_id,auc,train_ms,test_ms\n";

    std::string meta_csv = meta_features_csv_header();
    bool meta_ok = false;
    for (const auto& path : config.datasets) {
        try {
            const TabularDataset data = load_dataset_csv_file(path, config.class_column);
            std::vector<std::string> rows;
            for (const auto& learner : config.learners) {
                const MeteredEval eval =
                    metered_evaluate(learner, data, config.protocol, config.seed);
                const EvalRecord rec = eval.to_record();
                rows.push_back(rec.algorithm_id + "," + rec.dataset_id + "," +
                               fmt_double(rec.auc) + "," + fmt_double(rec.train_ms) + "," +
                               fmt_double(rec.test_ms) + "\n");
            }
            if (!config.meta_output.empty()) {
                meta_csv += meta_features_csv_row(data.name, extract_meta_features(data));
                meta_ok = true;
            }
            for (const auto& row : rows) out << row;
            summary.rows_written += static_cast<long>(rows.size());
        } catch (const Error& e) {
            summary.failures.push_back(path + ": " + e.what());
        }
    }
    out.close();
    if (summary.output_path == bundle.path("bench.csv")) bundle.note("bench.csv", "eval_csv");

    if (!config.meta_output.empty() && meta_ok) {
        std::ofstream meta_out(config.meta_output, std::ios::binary);
        if (!meta_out) throw Error(ErrorKind::io, "cannot write " + config.meta_output);
        meta_out << meta_csv;
        if (config.meta_output == bundle.path("meta_features.csv"))
            bundle.note("meta_features.csv", "meta_features");
    }
    summary.manifest_path = bundle.finish();
    return summary;
}

}  // namespace frugal
