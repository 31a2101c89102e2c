/*
 * C API for the frugal evaluation toolkit.
 *
 * Every function returns FRUGAL_OK (0) or an error code; on failure a
 * human-readable message is available from frugal_last_error() until the
 * next call on the same thread. Handles are opaque and must be released
 * with their matching _free function. Strings returned through `char**`
 * out-parameters are owned by the caller and released with
 * frugal_string_free().
 */

#ifndef FRUGAL_H
#define FRUGAL_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define FRUGAL_OK 0
#define FRUGAL_ERR_IO 1
#define FRUGAL_ERR_PARSE 2
#define FRUGAL_ERR_DECODE 3
#define FRUGAL_ERR_TRANSPORT 4
#define FRUGAL_ERR_DOMAIN 5
#define FRUGAL_ERR_ARGUMENT 6
#define FRUGAL_ERR_PRECONDITION 7
#define FRUGAL_ERR_CONFIG 8
#define FRUGAL_ERR_PROTOCOL 9
#define FRUGAL_ERR_METRIC 10
#define FRUGAL_ERR_PARTIAL 11
#define FRUGAL_ERR_INTERNAL 12

const char* frugal_version(void);
const char* frugal_last_error(void);
void frugal_string_free(char* s);

/* ---- evaluation matrix ------------------------------------------------- */

typedef struct frugal_matrix frugal_matrix;

/* CSV with header algorithm_id,dataset_id,auc,train_ms,test_ms */
int frugal_matrix_read_eval_csv(const char* path, frugal_matrix** out);
int frugal_matrix_parse_eval_csv(const char* text, frugal_matrix** out);
/* GET a JSON array of objects with the same five fields */
int frugal_matrix_fetch_json(const char* url, long timeout_ms, frugal_matrix** out);
/* matrix.json as written by the ingest pipeline */
int frugal_matrix_load(const char* path, frugal_matrix** out);
int frugal_matrix_save(const frugal_matrix* m, const char* path);
void frugal_matrix_free(frugal_matrix* m);

long frugal_matrix_algorithms(const frugal_matrix* m);
long frugal_matrix_datasets(const frugal_matrix* m);
long frugal_matrix_missing(const frugal_matrix* m);
/* borrowed pointer, valid while the matrix lives; NULL when out of range */
const char* frugal_matrix_algorithm_id(const frugal_matrix* m, long index);
const char* frugal_matrix_dataset_id(const frugal_matrix* m, long index);

/* Remove algorithms with more than max_missing unobserved cells. report_csv
 * (optional) receives `algorithm_id,missing_count` sorted by count. */
int frugal_matrix_prune(const frugal_matrix* m, long max_missing, frugal_matrix** out,
                        char** report_csv);
/* Iterative SVD completion; AUC in raw space, times in log10 space. */
int frugal_matrix_impute(const frugal_matrix* m, int rank, double tolerance,
                         int max_iterations, frugal_matrix** out);
/* `rank,algorithm_id,score` for a complete matrix at trade-off weight w */
int frugal_matrix_rank_csv(const frugal_matrix* m, double w, char** out_csv);

/* ---- frugality score algebra ------------------------------------------- */

/* P - w / (1 + 1/R) */
int frugal_score(double p, double w, double r, double* out);
/* max(train_ms + test_ms, 0.001) */
int frugal_resource_total(double train_ms, double test_ms, double* out);
int frugal_ram_hours(double ram_gb, double cpu_hours, double* out);
int frugal_a3r(double sr_j, double sr_ref, double t_j, double t_ref, long n, double* out);
int frugal_a3r_prime(double sr, double t, long n, double* out);
/* *has is 0 when the curves are parallel or cross at negative w */
int frugal_crossing_w(double p_a, double r_a, double p_b, double r_b, int* has, double* out);
int frugal_zero_crossing_w(double p, double r, double* out);

/* ---- pipelines ----------------------------------------------------------
 *
 * Each takes a JSON configuration document (see README for the schema) and
 * returns a JSON summary. frugal_bench returns FRUGAL_ERR_PARTIAL when some
 * datasets failed but others were benchmarked.
 */

int frugal_ingest(const char* config_json, char** summary_json);
int frugal_analyze(const char* config_json, char** summary_json);
int frugal_bench(const char* config_json, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* FRUGAL_H */
