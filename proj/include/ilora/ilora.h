/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the continual-learning laboratory.
 *
 * Every call returns an ilora_status. On failure the message and a
 * machine-readable kind for the calling thread are available through
 * ilora_last_error() / ilora_last_error_kind() until the next failing call
 * on that thread. Handles are opaque and owned by the caller; free them with
 * the matching *_free function (passing NULL is a no-op).
 */
#ifndef ILORA_H
#define ILORA_H

#include <stddef.h>
#include <stdint.h>

#if defined(ILORA_BUILDING_LIBRARY)
#define ILORA_API __attribute__((visibility("default")))
#else
#define ILORA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ilora_status {
    ILORA_OK = 0,
    ILORA_ERR_INTERNAL = 1,
    ILORA_ERR_CONFIG = 2,
    ILORA_ERR_MISSING = 3,
    ILORA_ERR_NUMERIC = 4,
    ILORA_ERR_INVALID_ARGUMENT = 5,
    ILORA_ERR_IO = 6,
    ILORA_ERR_DEGENERATE = 7,
    ILORA_ERR_UNDEFINED = 8
} ilora_status;

typedef enum ilora_role {
    ILORA_ROLE_WORKING = 0,
    ILORA_ROLE_LONGTERM = 1,
    ILORA_ROLE_BACKBONE = 2
} ilora_role;

typedef struct ilora_checkpoint ilora_checkpoint;
typedef struct ilora_results ilora_results;

ILORA_API const char* ilora_version(void);
ILORA_API const char* ilora_last_error(void);
/* One of: contract, config, missing_artifact, numeric, degenerate_input,
 * undefined_metric, oracle_failure, io, internal; "" when no error. */
ILORA_API const char* ilora_last_error_kind(void);
/* Process exit code for a status: 0, 2 (config / bad argument),
 * 3 (missing artifact), 4 (numeric failure) or 1 (anything else). */
ILORA_API int ilora_exit_code(ilora_status status);

/* ---- commands ---------------------------------------------------------- */

/* Runs the experiment described by a JSON config file. seed_override and
 * out_dir may be NULL; without out_dir the config's output_dir is used. */
ILORA_API ilora_status ilora_run(const char* config_path, const uint64_t* seed_override, const char* out_dir);

/* Writes the canonical echo of a config (defaults filled in) into buf.
 * *needed receives the size including the terminating NUL. buf may be NULL
 * when cap is 0. */
ILORA_API ilora_status ilora_config_echo(const char* config_path, const uint64_t* seed_override, char* buf,
                                         size_t cap, size_t* needed);

/* Writes the dataset CSV of the config's stream (anchor is task 0). */
ILORA_API ilora_status ilora_dump_stream(const char* config_path, const uint64_t* seed_override, const char* out_file);

/* Writes sweep_t{transition}.csv into run_dir. With grid == NULL an evenly
 * spaced grid of grid_len points on [0, 1] is used (21 when grid_len is 0). */
ILORA_API ilora_status ilora_sweep_lambda(const char* run_dir, uint32_t transition, const double* grid,
                                          size_t grid_len);

typedef struct ilora_probe_options {
    uint32_t transition; /* landscape: task whose memories span the plane */
    uint32_t points;     /* landscape: grid points per axis */
    double lo;           /* landscape: coefficient range */
    double hi;
} ilora_probe_options;

ILORA_API void ilora_probe_options_default(ilora_probe_options* opts);

/* kind: "wd", "cka" or "landscape". opts may be NULL for defaults. */
ILORA_API ilora_status ilora_probe(const char* run_dir, const char* kind, const ilora_probe_options* opts);

/* ---- checkpoints ------------------------------------------------------- */

ILORA_API ilora_status ilora_checkpoint_load(const char* path, ilora_checkpoint** out);
ILORA_API ilora_status ilora_checkpoint_save(const char* path, ilora_role role, uint32_t task_index, uint64_t seed,
                                             const double* params, size_t count);
ILORA_API size_t ilora_checkpoint_param_count(const ilora_checkpoint* ckpt);
ILORA_API const double* ilora_checkpoint_params(const ilora_checkpoint* ckpt);
ILORA_API uint32_t ilora_checkpoint_task_index(const ilora_checkpoint* ckpt);
ILORA_API uint64_t ilora_checkpoint_seed(const ilora_checkpoint* ckpt);
ILORA_API ilora_role ilora_checkpoint_role(const ilora_checkpoint* ckpt);
ILORA_API void ilora_checkpoint_free(ilora_checkpoint* ckpt);

/* ---- result matrices and metrics (t, j are 1-based) -------------------- */

ILORA_API ilora_status ilora_results_create(size_t tasks, ilora_results** out);
ILORA_API ilora_status ilora_results_load_csv(const char* path, ilora_results** out);
ILORA_API size_t ilora_results_tasks(const ilora_results* r);
ILORA_API ilora_status ilora_results_set(ilora_results* r, size_t t, size_t j, double accuracy);
ILORA_API ilora_status ilora_results_get(const ilora_results* r, size_t t, size_t j, double* out);
ILORA_API ilora_status ilora_results_acc(const ilora_results* r, size_t t, double* out);
/* ILORA_ERR_UNDEFINED for t < 2. */
ILORA_API ilora_status ilora_results_bwt(const ilora_results* r, size_t t, double* out);
ILORA_API void ilora_results_free(ilora_results* r);

/* ---- diagnostics on raw arrays ----------------------------------------- */

/* x is n×p and y is n×q, both row-major. */
ILORA_API ilora_status ilora_linear_cka(const double* x, size_t n, size_t p, const double* y, size_t q, double* out);
ILORA_API ilora_status ilora_weight_distance(const double* a, const double* b, size_t count, double* out);

#ifdef __cplusplus
}
#endif

#endif /* ILORA_H */
