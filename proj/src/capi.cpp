#include "frugal.h"

#include <cstring>
#include <new>
#include <string>

#include "frugal/eval_data.hpp"
#include "frugal/frugality.hpp"
#include "frugal/pipeline.hpp"

using namespace frugal;

struct frugal_matrix {
    EvalMatrix m;
};

namespace {

thread_local std::string g_last_error;

int code_of(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::io: return FRUGAL_ERR_IO;
        case ErrorKind::parse: return FRUGAL_ERR_PARSE;
        case ErrorKind::decode: return FRUGAL_ERR_DECODE;
        case ErrorKind::transport: return FRUGAL_ERR_TRANSPORT;
        case ErrorKind::domain: return FRUGAL_ERR_DOMAIN;
        case ErrorKind::argument: return FRUGAL_ERR_ARGUMENT;
        case ErrorKind::precondition: return FRUGAL_ERR_PRECONDITION;
        case ErrorKind::config: return FRUGAL_ERR_CONFIG;
        case ErrorKind::protocol: return FRUGAL_ERR_PROTOCOL;
        case ErrorKind::metric: return FRUGAL_ERR_METRIC;
    }
    return FRUGAL_ERR_INTERNAL;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        g_last_error = e.what();
        return code_of(e.kind());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return FRUGAL_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return FRUGAL_ERR_INTERNAL;
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int require(bool ok, const char* message) {
    if (ok) return FRUGAL_OK;
    g_last_error = message;
    return FRUGAL_ERR_ARGUMENT;
}

RunConfig parse_config(const char* config_json) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
    }
    return RunConfig::from_json(doc);
}

}  // namespace

extern "C" {

const char* frugal_version(void) { return "0.1.0"; }

const char* frugal_last_error(void) { return g_last_error.c_str(); }

void frugal_string_free(char* s) { delete[] s; }

int frugal_matrix_read_eval_csv(const char* path, frugal_matrix** out) {
    if (int rc = require(path && out, "null argument")) return rc;
    return guarded([&] {
        const auto records = read_eval_csv_file(path);
        *out = new frugal_matrix{build_matrix(records).matrix};
        return FRUGAL_OK;
    });
}

int frugal_matrix_parse_eval_csv(const char* text, frugal_matrix** out) {
    if (int rc = require(text && out, "null argument")) return rc;
    return guarded([&] {
        const auto records = parse_eval_csv(std::string_view(text));
        *out = new frugal_matrix{build_matrix(records).matrix};
        return FRUGAL_OK;
    });
}

int frugal_matrix_fetch_json(const char* url, long timeout_ms, frugal_matrix** out) {
    if (int rc = require(url && out, "null argument")) return rc;
    return guarded([&] {
        const auto records = fetch_remote_records(url, timeout_ms);
        *out = new frugal_matrix{build_matrix(records).matrix};
        return FRUGAL_OK;
    });
}

int frugal_matrix_load(const char* path, frugal_matrix** out) {
    if (int rc = require(path && out, "null argument")) return rc;
    return guarded([&] {
        *out = new frugal_matrix{load_matrix(path)};
        return FRUGAL_OK;
    });
}

int frugal_matrix_save(const frugal_matrix* m, const char* path) {
    if (int rc = require(m && path, "null argument")) return rc;
    return guarded([&] {
        save_matrix(m->m, path);
        return FRUGAL_OK;
    });
}

void frugal_matrix_free(frugal_matrix* m) { delete m; }

long frugal_matrix_algorithms(const frugal_matrix* m) {
    return m ? static_cast<long>(m->m.algorithms.size()) : 0;
}

long frugal_matrix_datasets(const frugal_matrix* m) {
    return m ? static_cast<long>(m->m.datasets.size()) : 0;
}

long frugal_matrix_missing(const frugal_matrix* m) { return m ? m->m.num_missing() : 0; }

const char* frugal_matrix_algorithm_id(const frugal_matrix* m, long index) {
    if (!m || index < 0 || index >= static_cast<long>(m->m.algorithms.size())) return nullptr;
    return m->m.algorithms[static_cast<std::size_t>(index)].c_str();
}

const char* frugal_matrix_dataset_id(const frugal_matrix* m, long index) {
    if (!m || index < 0 || index >= static_cast<long>(m->m.datasets.size())) return nullptr;
    return m->m.datasets[static_cast<std::size_t>(index)].c_str();
}

int frugal_matrix_prune(const frugal_matrix* m, long max_missing, frugal_matrix** out,
                        char** report_csv) {
    if (int rc = require(m && out, "null argument")) return rc;
    return guarded([&] {
        PruneResult result = prune_algorithms(m->m, max_missing);
        if (report_csv) *report_csv = copy_string(prune_report_csv(result.removed));
        *out = new frugal_matrix{std::move(result.matrix)};
        return FRUGAL_OK;
    });
}

int frugal_matrix_impute(const frugal_matrix* m, int rank, double tolerance,
                         int max_iterations, frugal_matrix** out) {
    if (int rc = require(m && out, "null argument")) return rc;
    return guarded([&] {
        const ImputationConfig config{rank, tolerance, max_iterations};
        *out = new frugal_matrix{impute_matrix(m->m, config)};
        return FRUGAL_OK;
    });
}

int frugal_matrix_rank_csv(const frugal_matrix* m, double w, char** out_csv) {
    if (int rc = require(m && out_csv, "null argument")) return rc;
    return guarded([&] {
        *out_csv = copy_string(rank_table_csv(rank_algorithms(m->m, w)));
        return FRUGAL_OK;
    });
}

int frugal_score(double p, double w, double r, double* out) {
    if (int rc = require(out != nullptr, "null argument")) return rc;
    return guarded([&] {
        *out = frug_score(p, w, r);
        return FRUGAL_OK;
    });
}

int frugal_resource_total(double train_ms, double test_ms, double* out) {
    if (int rc = require(out != nullptr, "null argument")) return rc;
    return guarded([&] {
        *out = resource_total(train_ms, test_ms);
        return FRUGAL_OK;
    });
}

int frugal_ram_hours(double ram_gb, double cpu_hours, double* out) {
    if (int rc = require(out != nullptr, "null argument")) return rc;
    return guarded([&] {
        *out = ram_hours(ram_gb, cpu_hours);
        return FRUGAL_OK;
    });
}

int frugal_a3r(double sr_j, double sr_ref, double t_j, double t_ref, long n, double* out) {
    if (int rc = require(out != nullptr, "null argument")) return rc;
    return guarded([&] {
        *out = a3r(sr_j, sr_ref, t_j, t_ref, n);
        return FRUGAL_OK;
    });
}

int frugal_a3r_prime(double sr, double t, long n, double* out) {
    if (int rc = require(out != nullptr, "null argument")) return rc;
    return guarded([&] {
        *out = a3r_prime(sr, t, n);
        return FRUGAL_OK;
    });
}

int frugal_crossing_w(double p_a, double r_a, double p_b, double r_b, int* has, double* out) {
    if (int rc = require(has && out, "null argument")) return rc;
    return guarded([&] {
        const auto w = crossing_w(p_a, r_a, p_b, r_b);
        *has = w.has_value() ? 1 : 0;
        *out = w.value_or(0.0);
        return FRUGAL_OK;
    });
}

int frugal_zero_crossing_w(double p, double r, double* out) {
    if (int rc = require(out != nullptr, "null argument")) return rc;
    return guarded([&] {
        *out = zero_crossing_w(p, r);
        return FRUGAL_OK;
    });
}

int frugal_ingest(const char* config_json, char** summary_json) {
    if (int rc = require(config_json != nullptr, "null argument")) return rc;
    return guarded([&] {
        const IngestSummary summary = run_ingest(parse_config(config_json));
        if (summary_json) *summary_json = copy_string(summary.to_json().dump());
        return FRUGAL_OK;
    });
}

int frugal_analyze(const char* config_json, char** summary_json) {
    if (int rc = require(config_json != nullptr, "null argument")) return rc;
    return guarded([&] {
        const AnalyzeSummary summary = run_analyze(parse_config(config_json));
        if (summary_json) *summary_json = copy_string(summary.to_json().dump());
        return FRUGAL_OK;
    });
}

int frugal_bench(const char* config_json, char** summary_json) {
    if (int rc = require(config_json != nullptr, "null argument")) return rc;
    return guarded([&] {
        const BenchSummary summary = run_bench(parse_config(config_json));
        if (summary_json) *summary_json = copy_string(summary.to_json().dump());
        if (!summary.failures.empty()) {
            g_last_error = "some datasets failed; see the summary";
            return FRUGAL_ERR_PARTIAL;
        }
        return FRUGAL_OK;
    });
}

}  // extern "C"
