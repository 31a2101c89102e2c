#pragma once

#include <Eigen/Dense>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "frugal/error.hpp"
#include "json.hpp"

namespace frugal {

// One (algorithm, dataset) performance measurement.
struct EvalRecord {
    std::string algorithm_id;
    std::string dataset_id;
    double auc = 0.0;       // in [0, 1]
    double train_ms = 0.0;  // >= 0
    double test_ms = 0.0;   // >= 0
};

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Dense algorithm x dataset evaluation matrix with a missingness mask.
// Rows are datasets, columns are algorithms; both axes sorted and unique.
struct EvalMatrix {
    std::vector<std::string> algorithms;
    std::vector<std::string> datasets;
    Eigen::MatrixXd auc;       // datasets x algorithms
    Eigen::MatrixXd train_ms;
    Eigen::MatrixXd test_ms;
    BoolMatrix mask;           // true = observed

    Eigen::Index rows() const { return auc.rows(); }
    Eigen::Index cols() const { return auc.cols(); }
    long num_missing() const { return static_cast<long>((!mask).count()); }
    bool complete() const { return mask.all(); }
};

struct ImputationConfig {
    int rank = 5;
    double tolerance = 1e-6;  // relative Frobenius change of the missing entries
    int max_iterations = 100;
};

struct DuplicateNote {
    std::string algorithm_id;
    std::string dataset_id;
    int count = 0;  // number of records collapsed into the cell
};

struct BuildResult {
    EvalMatrix matrix;
    std::vector<DuplicateNote> duplicates;
};

struct PruneEntry {
    std::string algorithm_id;
    long missing_count = 0;
};

struct PruneResult {
    EvalMatrix matrix;
    std::vector<PruneEntry> removed;  // by missing count descending
};

// CSV with header `algorithm_id,dataset_id,auc,train_ms,test_ms`.
// Empty input yields an empty list; malformed rows raise a parse error
// naming the 1-based line number.
std::vector<EvalRecord> parse_eval_csv(std::istream& in);
std::vector<EvalRecord> parse_eval_csv(std::string_view text);
std::vector<EvalRecord> read_eval_csv_file(const std::string& path);

// GET a JSON array of flat objects carrying the five EvalRecord fields.
std::vector<EvalRecord> fetch_remote_records(const std::string& url, long timeout_ms);
std::vector<EvalRecord> parse_records_json(const nlohmann::json& array);

// Axes are the sorted distinct ids. Duplicate (algorithm, dataset) pairs are
// averaged per field and reported.
BuildResult build_matrix(const std::vector<EvalRecord>& records);

// Drops every algorithm column with strictly more than max_missing
// unobserved cells. Idempotent.
PruneResult prune_algorithms(const EvalMatrix& matrix, long max_missing);

// Iterative SVD completion of a single real matrix: initialise missing cells
// with column means, then repeat (SVD, rank-`rank` rebuild, overwrite missing
// cells) until the relative Frobenius change of the missing entries drops
// below the tolerance. Observed cells pass through bit-exact. Row/column ids
// are only used for error messages and may be null.
Eigen::MatrixXd impute_iterative_svd(const Eigen::MatrixXd& values, const BoolMatrix& mask,
                                     const ImputationConfig& config,
                                     const std::vector<std::string>* row_ids = nullptr,
                                     const std::vector<std::string>* col_ids = nullptr);

// Applies impute_iterative_svd to the AUC matrix in raw space and to each
// time matrix in log10 space (re-exponentiated afterwards).
EvalMatrix impute_matrix(const EvalMatrix& matrix, const ImputationConfig& config);

std::vector<EvalRecord> matrix_to_records(const EvalMatrix& matrix);

std::string records_to_csv(const std::vector<EvalRecord>& records);

// `algorithm_id,missing_count` sorted by count descending.
std::string prune_report_csv(const std::vector<PruneEntry>& removed);

nlohmann::json matrix_to_json(const EvalMatrix& matrix);
EvalMatrix matrix_from_json(const nlohmann::json& doc);
void save_matrix(const EvalMatrix& matrix, const std::string& path);
EvalMatrix load_matrix(const std::string& path);

}  // namespace frugal
