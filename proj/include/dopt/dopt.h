/* C interface to the dopt library: D-optimal comparison selection, evaluation
 * and verification. All handles are opaque; every call returns a status and
 * the message of the most recent failure on this thread is available from
 * dopt_last_error(). */
#ifndef DOPT_DOPT_H
#define DOPT_DOPT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DOPT_API __declspec(dllexport)
#else
#define DOPT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dopt_status {
  DOPT_OK = 0,
  DOPT_NOT_POSITIVE_DEFINITE = 1,
  DOPT_DEGENERATE_UPDATE = 2,
  DOPT_INDEX_OUT_OF_RANGE = 3,
  DOPT_ALREADY_SELECTED = 4,
  DOPT_INSTANCE_TOO_LARGE = 5,
  DOPT_EMPTY_HEAP = 6,
  DOPT_STALE_STAMP_CORRUPTION = 7,
  DOPT_DEGENERATE_LABEL_SET = 8,
  DOPT_PARSE_ERROR = 9,
  DOPT_DIMENSION_MISMATCH = 10,
  DOPT_INVALID_LABEL = 11,
  DOPT_IO_ERROR = 12,
  DOPT_INVALID_CONFIG = 13,
  DOPT_INVALID_ARGUMENT = 14,
  DOPT_INTERNAL_ERROR = 15
} dopt_status;

typedef enum dopt_format { DOPT_FORMAT_JSON = 0, DOPT_FORMAT_CSV = 1 } dopt_format;

typedef struct dopt_dataset dopt_dataset;
typedef struct dopt_report dopt_report;

typedef struct dopt_pair {
  uint32_t i;
  uint32_t j;
} dopt_pair;

/* Message for the last failing call on the calling thread; "" if none. */
DOPT_API const char* dopt_last_error(void);
DOPT_API const char* dopt_status_name(dopt_status status);
DOPT_API const char* dopt_version(void);

/* Datasets. */
DOPT_API dopt_status dopt_dataset_synthetic(size_t n, size_t d, double sigma_x, double sigma_beta,
                                            double c_a, uint64_t seed, dopt_dataset** out);
/* Row-major n x d features. */
DOPT_API dopt_status dopt_dataset_from_array(const double* features, size_t n, size_t d,
                                             dopt_dataset** out);
/* absolute_csv and comparisons_csv may be NULL. */
DOPT_API dopt_status dopt_dataset_load_csv(const char* features_csv, const char* absolute_csv,
                                           const char* comparisons_csv, dopt_dataset** out);
DOPT_API dopt_status dopt_dataset_shape(const dopt_dataset* dataset, size_t* n, size_t* d);
DOPT_API void dopt_dataset_free(dopt_dataset* dataset);

/* Greedy selection of k comparisons with the named variant (ng fg sg nl flp flm
 * slp slm). `absolute` lists samples already labeled (may be NULL when
 * n_absolute is 0). `out_pairs` must hold k entries; `out_objective`, if not
 * NULL, receives f(S) - f(empty). */
DOPT_API dopt_status dopt_select(const dopt_dataset* dataset, const char* algorithm,
                                 const size_t* absolute, size_t n_absolute, size_t k,
                                 double lambda, dopt_pair* out_pairs, double* out_objective);

/* Runs a command (select, bench, evaluate, verify) configured by a JSON
 * object; the command field in the config is overridden by `command`. */
DOPT_API dopt_status dopt_run(const char* command, const char* config_json, dopt_report** out);
/* 1 when the run succeeded (verify: every instance passed). */
DOPT_API int dopt_report_passed(const dopt_report* report);
/* Hex determinism hash; wall-time fields are excluded. Valid until the report is freed. */
DOPT_API const char* dopt_report_hash(const dopt_report* report);
/* Canonical JSON text. Valid until the report is freed. */
DOPT_API const char* dopt_report_json(const dopt_report* report);
DOPT_API const char* dopt_report_summary(const dopt_report* report);
DOPT_API dopt_status dopt_report_write(const dopt_report* report, dopt_format format,
                                       const char* path);
DOPT_API void dopt_report_free(dopt_report* report);

#ifdef __cplusplus
}
#endif

#endif /* DOPT_DOPT_H */
