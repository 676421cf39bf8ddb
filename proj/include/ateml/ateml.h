#ifndef ATEML_H
#define ATEML_H

#include <stddef.h>
#include <stdint.h>

#if defined(ATEML_BUILDING_LIBRARY)
#define ATEML_API __attribute__((visibility("default")))
#else
#define ATEML_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ateml_status {
  ATEML_OK = 0,
  ATEML_ERR_INVALID_ARGUMENT = 1,
  ATEML_ERR_FIT = 2,
  ATEML_ERR_NUMERIC = 3,
  ATEML_ERR_IO = 4,
  ATEML_ERR_INTERNAL = 5
} ateml_status;

typedef struct ateml_dataset ateml_dataset;
typedef struct ateml_result ateml_result;

ATEML_API const char* ateml_version(void);

/* Message of the last failed call on this thread; empty when none. */
ATEML_API const char* ateml_last_error(void);
/* The same failure as a JSON object with status, module and message. */
ATEML_API const char* ateml_last_error_json(void);

/* 0 selects all hardware threads. Results do not depend on this value. */
ATEML_API ateml_status ateml_set_threads(int threads);

/* x is row-major n x d. names may be NULL (x1..xd). */
ATEML_API ateml_status ateml_dataset_create(const double* x, const char* const* names, const double* treatment,
                                            const double* outcome, size_t n, size_t d, ateml_dataset** out);
/* covariates is a comma-separated list, or NULL/empty for all other columns. */
ATEML_API ateml_status ateml_dataset_from_csv(const char* path, const char* treatment, const char* outcome,
                                              const char* covariates, ateml_dataset** out);
ATEML_API size_t ateml_dataset_rows(const ateml_dataset* data);
ATEML_API size_t ateml_dataset_cols(const ateml_dataset* data);
ATEML_API void ateml_dataset_free(ateml_dataset* data);

/* config is key = value text; the data keys are ignored. */
ATEML_API ateml_status ateml_estimate(const ateml_dataset* data, const char* config, ateml_result** out);
ATEML_API double ateml_result_estimate(const ateml_result* r);
ATEML_API double ateml_result_se(const ateml_result* r);
ATEML_API double ateml_result_ci_lo(const ateml_result* r);
ATEML_API double ateml_result_ci_hi(const ateml_result* r);
ATEML_API const char* ateml_result_method(const ateml_result* r);
/* Full report JSON (without timings); free with ateml_string_free. */
ATEML_API ateml_status ateml_result_report(const ateml_result* r, char** json);
ATEML_API void ateml_result_free(ateml_result* r);

/* Runs the configured pipeline and writes the report to the configured output path. */
ATEML_API ateml_status ateml_run(const char* config, char** report_json, char** summary);
/* adjustments is comma-separated; NULL or empty gives unweighted SMDs only. */
ATEML_API ateml_status ateml_balance(const char* config, const char* adjustments, char** csv);
ATEML_API ateml_status ateml_simulate(const char* spec, const char* estimators, int replications, uint64_t seed,
                                      const char* config, char** csv);
/* n = 0 keeps the process's default sample size. */
ATEML_API ateml_status ateml_export_dgp(const char* spec, uint64_t seed, int64_t n, char** csv);
ATEML_API ateml_status ateml_dgp_catalog(char** names);

/* Round-trips config text through the parser: parse(text) serialized. */
ATEML_API ateml_status ateml_normalize_config(const char* config, char** out);

ATEML_API void ateml_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
