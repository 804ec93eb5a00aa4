/* SPDX-License-Identifier: Apache-2.0
 *
 * C interface of the steiner library.  All objects are opaque handles owned
 * by the caller and released with the matching *_free function.  Functions
 * return a steiner_status; on failure steiner_last_error() describes the
 * problem for the calling thread.
 */
#ifndef STEINER_STEINER_H
#define STEINER_STEINER_H

#include <stddef.h>
#include <stdint.h>

#if defined(STEINER_BUILDING_LIBRARY)
#define STEINER_API __attribute__((visibility("default")))
#else
#define STEINER_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum steiner_status {
  STEINER_OK = 0,
  STEINER_E_INVALID_ARGUMENT = 1,
  STEINER_E_CONFIG = 2,
  STEINER_E_NUMERICAL = 3,
  STEINER_E_HYPOTHESIS = 4,
  STEINER_E_STAGE = 5,
  STEINER_E_IO = 6,
  STEINER_E_INTERNAL = 7
} steiner_status;

typedef struct steiner_config steiner_config;
typedef struct steiner_manifest steiner_manifest;
typedef struct steiner_nonlinearity steiner_nonlinearity;
typedef struct steiner_report steiner_report;

STEINER_API const char* steiner_version(void);
STEINER_API const char* steiner_status_string(steiner_status status);
/* Message of the last failed call on this thread; "" when none. */
STEINER_API const char* steiner_last_error(void);

/* --- configuration ------------------------------------------------------ */

/* Parses config text.  Relative paths inside resolve against base_dir (may be NULL). */
STEINER_API steiner_status steiner_config_parse(const char* text, const char* base_dir, steiner_config** out);
STEINER_API steiner_status steiner_config_load(const char* path, steiner_config** out);
/* Number of issues recorded by the last failed parse on this thread. */
STEINER_API size_t steiner_config_issue_count(void);
/* Line (0 if none) and message of issue i of the last failed parse. */
STEINER_API steiner_status steiner_config_issue(size_t i, int* line, const char** message);
/* FNV-1a hash of the canonical config rendering, as 16 hex digits. */
STEINER_API const char* steiner_config_hash(const steiner_config* cfg);
STEINER_API void steiner_config_free(steiner_config* cfg);

/* --- orchestration ------------------------------------------------------ */

typedef struct steiner_run_options {
  const char* subcommand;   /* "solve", "star-check", "compare" or "sweep" */
  const char* out_dir;      /* NULL: use the config's [output] dir */
  int has_seed;
  uint64_t seed;
  int threads;              /* <= 1 runs sequentially */
  const char* sweep_param;  /* "eps", "tau" or "h"; NULL for "h" */
  const double* sweep_values;
  size_t sweep_count;
} steiner_run_options;

STEINER_API void steiner_run_options_init(steiner_run_options* opts);

/* Runs a subcommand.  Returns STEINER_OK whenever a manifest was produced,
 * even if the run itself failed; inspect steiner_manifest_exit_code. */
STEINER_API steiner_status steiner_run(const steiner_config* cfg, const steiner_run_options* opts,
                                       steiner_manifest** out);
/* 0 pass, 1 verification failed, 2 bad config/arguments, 3 stage failure, 4 I/O failure. */
STEINER_API int steiner_manifest_exit_code(const steiner_manifest* m);
STEINER_API int steiner_manifest_pass(const steiner_manifest* m);
STEINER_API const char* steiner_manifest_message(const steiner_manifest* m);
STEINER_API const char* steiner_manifest_json(const steiner_manifest* m);
STEINER_API void steiner_manifest_free(steiner_manifest* m);

/* --- nonlinearities ------------------------------------------------------ */

STEINER_API steiner_status steiner_nl_p_laplacian(double p, steiner_nonlinearity** out);
STEINER_API steiner_status steiner_nl_shifted_p(double p, double tau, steiner_nonlinearity** out);
STEINER_API steiner_status steiner_nl_tabulated(const double* t, const double* beta, size_t n,
                                                steiner_nonlinearity** out);
/* Moreau-Yosida regularization with ellipticity shift tau. */
STEINER_API steiner_status steiner_nl_regularize(const steiner_nonlinearity* base, double eps, double tau,
                                                 steiner_nonlinearity** out);
/* beta(t), A(t) = t beta(t) and B(t) = int_0^t beta; any output may be NULL. */
STEINER_API steiner_status steiner_nl_eval(const steiner_nonlinearity* nl, double t, double* beta, double* A,
                                           double* B);
/* A_eps(t) and the proximal point; only for handles made by steiner_nl_regularize. */
STEINER_API steiner_status steiner_nl_envelope(const steiner_nonlinearity* nl, double t, double* value,
                                               double* point);
STEINER_API void steiner_nl_free(steiner_nonlinearity* nl);

/* --- comparison ---------------------------------------------------------- */

/* Runs the mass comparison pipeline for a config without writing files. */
STEINER_API steiner_status steiner_compare(const steiner_config* cfg, steiner_report** out);
STEINER_API int steiner_report_pass(const steiner_report* r);
STEINER_API double steiner_report_worst_gap(const steiner_report* r);
STEINER_API double steiner_report_slack_budget(const steiner_report* r);
/* Rows j = 1..N and columns s-nodes of the gap V_j - U_j. */
STEINER_API size_t steiner_report_slices(const steiner_report* r);
STEINER_API size_t steiner_report_nodes(const steiner_report* r);
STEINER_API steiner_status steiner_report_gap(const steiner_report* r, size_t j, size_t i, double* value);
STEINER_API void steiner_report_free(steiner_report* r);

#ifdef __cplusplus
}
#endif

#endif /* STEINER_STEINER_H */
