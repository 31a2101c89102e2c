#include "frugal/eval_data.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "frugal/text.hpp"

namespace frugal {

namespace {

constexpr const char* kEvalHeader = "algorithm_id,dataset_id,auc,train_ms,test_ms";

// Floor applied to time cells before the log10 transform; zero timings would
// otherwise poison the SVD with -inf.
constexpr double kLogTimeFloorMs = 0.001;

[[noreturn]] void parse_fail(const std::string& what, std::size_t line) {
    throw Error(ErrorKind::parse, what + ", line " + std::to_string(line));
}

void validate_fields(EvalRecord& rec, const std::string& where,
                     ErrorKind kind) {
    if (rec.algorithm_id.empty()) throw Error(kind, "empty algorithm_id" + where);
    if (rec.dataset_id.empty()) throw Error(kind, "empty dataset_id" + where);
    if (!(rec.auc >= 0.0 && rec.auc <= 1.0))
        throw Error(kind, "auc out of range" + where);
    if (!(rec.train_ms >= 0.0) || !(rec.test_ms >= 0.0))
        throw Error(kind, "negative time" + where);
}

}  // namespace

std::vector<EvalRecord> parse_eval_csv(std::istream& in) {
    std::vector<EvalRecord> records;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0)
            line.erase(0, 3);
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        if (!saw_header) {
            if (text != kEvalHeader)
                parse_fail(std::string("expected header `") + kEvalHeader + "`", line_no);
            saw_header = true;
            continue;
        }
        const auto fields = split_csv_line(text);
        if (fields.size() != 5) parse_fail("wrong column count", line_no);
        EvalRecord rec;
        rec.algorithm_id = fields[0];
        rec.dataset_id = fields[1];
        if (!parse_double(fields[2], rec.auc)) parse_fail("non-numeric auc", line_no);
        if (!parse_double(fields[3], rec.train_ms)) parse_fail("non-numeric train_ms", line_no);
        if (!parse_double(fields[4], rec.test_ms)) parse_fail("non-numeric test_ms", line_no);
        validate_fields(rec, ", line " + std::to_string(line_no), ErrorKind::parse);
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<EvalRecord> parse_eval_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_eval_csv(in);
}

std::vector<EvalRecord> read_eval_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path);
    return parse_eval_csv(in);
}

std::vector<EvalRecord> parse_records_json(const nlohmann::json& array) {
    if (!array.is_array())
        throw Error(ErrorKind::decode, "expected a JSON array of records");
    std::vector<EvalRecord> records;
    records.reserve(array.size());
    for (std::size_t i = 0; i < array.size(); ++i) {
        const auto& obj = array[i];
        const std::string where = " at index " + std::to_string(i);
        if (!obj.is_object()) throw Error(ErrorKind::decode, "expected an object" + where);
        EvalRecord rec;
        auto str_field = [&](const char* key) -> std::string {
            if (!obj.contains(key) || !obj[key].is_string())
                throw Error(ErrorKind::decode,
                            std::string(key) + " must be a string" + where);
            return obj[key].get<std::string>();
        };
        auto num_field = [&](const char* key) -> double {
            if (!obj.contains(key) || !obj[key].is_number())
                throw Error(ErrorKind::decode,
                            std::string(key) + " must be a number" + where);
            return obj[key].get<double>();
        };
        rec.algorithm_id = str_field("algorithm_id");
        rec.dataset_id = str_field("dataset_id");
        rec.auc = num_field("auc");
        rec.train_ms = num_field("train_ms");
        rec.test_ms = num_field("test_ms");
        validate_fields(rec, where, ErrorKind::decode);
        records.push_back(std::move(rec));
    }
    return records;
}

BuildResult build_matrix(const std::vector<EvalRecord>& records) {
    std::vector<std::string> algorithms, datasets;
    for (const auto& rec : records) {
        algorithms.push_back(rec.algorithm_id);
        datasets.push_back(rec.dataset_id);
    }
    auto sort_unique = [](std::vector<std::string>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    sort_unique(algorithms);
    sort_unique(datasets);

    const Eigen::Index n_rows = static_cast<Eigen::Index>(datasets.size());
    const Eigen::Index n_cols = static_cast<Eigen::Index>(algorithms.size());

    EvalMatrix m;
    m.algorithms = algorithms;
    m.datasets = datasets;
    m.auc = Eigen::MatrixXd::Zero(n_rows, n_cols);
    m.train_ms = Eigen::MatrixXd::Zero(n_rows, n_cols);
    m.test_ms = Eigen::MatrixXd::Zero(n_rows, n_cols);
    m.mask = BoolMatrix::Constant(n_rows, n_cols, false);

    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n_rows, n_cols);
    auto index_of = [](const std::vector<std::string>& ids, const std::string& id) {
        return static_cast<Eigen::Index>(
            std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    for (const auto& rec : records) {
        const Eigen::Index r = index_of(datasets, rec.dataset_id);
        const Eigen::Index c = index_of(algorithms, rec.algorithm_id);
        m.auc(r, c) += rec.auc;
        m.train_ms(r, c) += rec.train_ms;
        m.test_ms(r, c) += rec.test_ms;
        counts(r, c) += 1;
        m.mask(r, c) = true;
    }

    BuildResult result;
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        for (Eigen::Index c = 0; c < n_cols; ++c) {
            const int n = counts(r, c);
            if (n == 0) continue;
            if (n > 1) {
                m.auc(r, c) /= n;
                m.train_ms(r, c) /= n;
                m.test_ms(r, c) /= n;
                result.duplicates.push_back({algorithms[static_cast<std::size_t>(c)],
                                             datasets[static_cast<std::size_t>(r)], n});
            }
        }
    }
    result.matrix = std::move(m);
    return result;
}

PruneResult prune_algorithms(const EvalMatrix& matrix, long max_missing) {
    std::vector<Eigen::Index> keep;
    PruneResult result;
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
        const long missing = static_cast<long>(matrix.rows()) -
                             static_cast<long>(matrix.mask.col(c).count());
        if (missing > max_missing) {
            result.removed.push_back({matrix.algorithms[static_cast<std::size_t>(c)], missing});
        } else {
            keep.push_back(c);
        }
    }
    std::stable_sort(result.removed.begin(), result.removed.end(),
                     [](const PruneEntry& a, const PruneEntry& b) {
                         if (a.missing_count != b.missing_count)
                             return a.missing_count > b.missing_count;
                         return a.algorithm_id < b.algorithm_id;
                     });

    EvalMatrix pruned;
    pruned.datasets = matrix.datasets;
    const Eigen::Index n_rows = matrix.rows();
    const Eigen::Index n_keep = static_cast<Eigen::Index>(keep.size());
    pruned.auc.resize(n_rows, n_keep);
    pruned.train_ms.resize(n_rows, n_keep);
    pruned.test_ms.resize(n_rows, n_keep);
    pruned.mask.resize(n_rows, n_keep);
    for (Eigen::Index i = 0; i < n_keep; ++i) {
        const Eigen::Index c = keep[static_cast<std::size_t>(i)];
        pruned.algorithms.push_back(matrix.algorithms[static_cast<std::size_t>(c)]);
        pruned.auc.col(i) = matrix.auc.col(c);
        pruned.train_ms.col(i) = matrix.train_ms.col(c);
        pruned.test_ms.col(i) = matrix.test_ms.col(c);
        pruned.mask.col(i) = matrix.mask.col(c);
    }
    result.matrix = std::move(pruned);
    return result;
}

Eigen::MatrixXd impute_iterative_svd(const Eigen::MatrixXd& values, const BoolMatrix& mask,
                                     const ImputationConfig& config,
                                     const std::vector<std::string>* row_ids,
                                     const std::vector<std::string>* col_ids) {
    const Eigen::Index n_rows = values.rows();
    const Eigen::Index n_cols = values.cols();
    if (mask.rows() != n_rows || mask.cols() != n_cols)
        throw Error(ErrorKind::argument, "mask shape does not match values");
    if (config.rank < 1 || config.rank > std::min(n_rows, n_cols))
        throw Error(ErrorKind::config, "imputation rank must be in [1, min(dims)]");
    if (!(config.tolerance > 0.0))
        throw Error(ErrorKind::config, "imputation tolerance must be positive");
    if (config.max_iterations < 1)
        throw Error(ErrorKind::config, "imputation max_iterations must be positive");

    if (mask.all()) return values;

    auto axis_name = [&](bool row, Eigen::Index i) -> std::string {
        const std::vector<std::string>* ids = row ? row_ids : col_ids;
        if (ids && static_cast<std::size_t>(i) < ids->size())
            return "'" + (*ids)[static_cast<std::size_t>(i)] + "'";
        return std::string(row ? "row " : "column ") + std::to_string(i);
    };
    for (Eigen::Index r = 0; r < n_rows; ++r)
        if (!mask.row(r).any())
            throw Error(ErrorKind::precondition,
                        "cannot impute: " + axis_name(true, r) + " has no observed cells");
    for (Eigen::Index c = 0; c < n_cols; ++c)
        if (!mask.col(c).any())
            throw Error(ErrorKind::precondition,
                        "cannot impute: " + axis_name(false, c) + " has no observed cells");

    std::vector<std::pair<Eigen::Index, Eigen::Index>> missing;
    for (Eigen::Index c = 0; c < n_cols; ++c)
        for (Eigen::Index r = 0; r < n_rows; ++r)
            if (!mask(r, c)) missing.emplace_back(r, c);

    // column-mean initialisation
    Eigen::MatrixXd work = values;
    for (Eigen::Index c = 0; c < n_cols; ++c) {
        double sum = 0.0;
        long n = 0;
        for (Eigen::Index r = 0; r < n_rows; ++r) {
            if (mask(r, c)) {
                sum += values(r, c);
                ++n;
            }
        }
        const double mean = sum / static_cast<double>(n);
        for (Eigen::Index r = 0; r < n_rows; ++r)
            if (!mask(r, c)) work(r, c) = mean;
    }

    const int rank = config.rank;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(work, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::MatrixXd rebuilt =
            svd.matrixU().leftCols(rank) *
            svd.singularValues().head(rank).asDiagonal() *
            svd.matrixV().leftCols(rank).transpose();

        double delta_sq = 0.0;
        double old_sq = 0.0;
        for (const auto& [r, c] : missing) {
            const double before = work(r, c);
            const double after = rebuilt(r, c);
            delta_sq += (after - before) * (after - before);
            old_sq += before * before;
            work(r, c) = after;
        }
        const double rel = std::sqrt(delta_sq) / (old_sq > 0.0 ? std::sqrt(old_sq) : 1.0);
        if (rel < config.tolerance) break;
    }
    return work;
}

EvalMatrix impute_matrix(const EvalMatrix& matrix, const ImputationConfig& config) {
    EvalMatrix out = matrix;
    if (matrix.rows() == 0 || matrix.cols() == 0) return out;
    out.auc = impute_iterative_svd(matrix.auc, matrix.mask, config,
                                   &matrix.datasets, &matrix.algorithms);
    auto impute_log_time = [&](const Eigen::MatrixXd& times) {
        Eigen::MatrixXd logs = times.unaryExpr(
            [](double t) { return std::log10(std::max(t, kLogTimeFloorMs)); });
        const Eigen::MatrixXd filled = impute_iterative_svd(
            logs, matrix.mask, config, &matrix.datasets, &matrix.algorithms);
        Eigen::MatrixXd result = times;  // observed cells pass through bit-exact
        for (Eigen::Index c = 0; c < matrix.cols(); ++c)
            for (Eigen::Index r = 0; r < matrix.rows(); ++r)
                if (!matrix.mask(r, c)) result(r, c) = std::pow(10.0, filled(r, c));
        return result;
    };
    out.train_ms = impute_log_time(matrix.train_ms);
    out.test_ms = impute_log_time(matrix.test_ms);
    out.mask = BoolMatrix::Constant(matrix.rows(), matrix.cols(), true);
    return out;
}

std::vector<EvalRecord> matrix_to_records(const EvalMatrix& matrix) {
    std::vector<EvalRecord> records;
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
            if (!matrix.mask(r, c)) continue;
            records.push_back({matrix.algorithms[static_cast<std::size_t>(c)],
                               matrix.datasets[static_cast<std::size_t>(r)],
                               matrix.auc(r, c), matrix.train_ms(r, c), matrix.test_ms(r, c)});
        }
    }
    return records;
}

std::string records_to_csv(const std::vector<EvalRecord>& records) {
    std::string out = std::string(kEvalHeader) + "\n";
    for (const auto& rec : records) {
        out += rec.algorithm_id + "," + rec.dataset_id + "," + fmt_double(rec.auc) + "," +
               fmt_double(rec.train_ms) + "," + fmt_double(rec.test_ms) + "\n";
    }
    return out;
}

std::string prune_report_csv(const std::vector<PruneEntry>& removed) {
    std::string out = "algorithm_id,missing_count\n";
    for (const auto& entry : removed)
        out += entry.algorithm_id + "," + std::to_string(entry.missing_count) + "\n";
    return out;
}

nlohmann::json matrix_to_json(const EvalMatrix& matrix) {
    nlohmann::json doc;
    doc["schema"] = "frugal-matrix/1";
    doc["algorithms"] = matrix.algorithms;
    doc["datasets"] = matrix.datasets;
    auto dump = [&](const Eigen::MatrixXd& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    doc["auc"] = dump(matrix.auc);
    doc["train_ms"] = dump(matrix.train_ms);
    doc["test_ms"] = dump(matrix.test_ms);
    nlohmann::json mask_rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) row.push_back(bool(matrix.mask(r, c)));
        mask_rows.push_back(std::move(row));
    }
    doc["mask"] = mask_rows;
    return doc;
}

EvalMatrix matrix_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("schema", "") != "frugal-matrix/1")
        throw Error(ErrorKind::decode, "not a frugal-matrix/1 document");
    EvalMatrix m;
    m.algorithms = doc.at("algorithms").get<std::vector<std::string>>();
    m.datasets = doc.at("datasets").get<std::vector<std::string>>();
    const Eigen::Index n_rows = static_cast<Eigen::Index>(m.datasets.size());
    const Eigen::Index n_cols = static_cast<Eigen::Index>(m.algorithms.size());
    auto load = [&](const char* key) {
        const auto& rows = doc.at(key);
        if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n_rows)
            throw Error(ErrorKind::decode, std::string("bad shape for ") + key);
        Eigen::MatrixXd out(n_rows, n_cols);
        for (Eigen::Index r = 0; r < n_rows; ++r) {
            const auto& row = rows[static_cast<std::size_t>(r)];
            if (static_cast<Eigen::Index>(row.size()) != n_cols)
                throw Error(ErrorKind::decode, std::string("bad shape for ") + key);
            for (Eigen::Index c = 0; c < n_cols; ++c)
                out(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
        return out;
    };
    m.auc = load("auc");
    m.train_ms = load("train_ms");
    m.test_ms = load("test_ms");
    const auto& mask_rows = doc.at("mask");
    if (static_cast<Eigen::Index>(mask_rows.size()) != n_rows)
        throw Error(ErrorKind::decode, "bad shape for mask");
    m.mask.resize(n_rows, n_cols);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        const auto& row = mask_rows[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != n_cols)
            throw Error(ErrorKind::decode, "bad shape for mask");
        for (Eigen::Index c = 0; c < n_cols; ++c)
            m.mask(r, c) = row[static_cast<std::size_t>(c)].get<bool>();
    }
    return m;
}

void save_matrix(const EvalMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path);
    out << matrix_to_json(matrix).dump(1) << "\n";
}

EvalMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("invalid matrix file: ") + e.what());
    }
    return matrix_from_json(doc);
}

}  // namespace frugal
