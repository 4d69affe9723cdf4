/* SPDX-License-Identifier: Apache-2.0 */
/*
 * pmtune C API.
 *
 * All functions returning pmtune_status leave a message retrievable with
 * pmtune_last_error() (per thread) when they fail. Handles are opaque and
 * owned by the caller; free them with the matching *_free function.
 */
#ifndef PMTUNE_PMTUNE_H
#define PMTUNE_PMTUNE_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(PMTUNE_BUILDING_LIBRARY)
#    define PMTUNE_API __declspec(dllexport)
#  else
#    define PMTUNE_API __declspec(dllimport)
#  endif
#else
#  define PMTUNE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pmtune_status {
  PMTUNE_OK = 0,
  PMTUNE_E_DOMAIN = 1,      /* argument outside the mathematical domain */
  PMTUNE_E_NUMERICAL = 2,   /* quadrature, root finding or filter failure */
  PMTUNE_E_IO = 3,
  PMTUNE_E_CONFIG = 4,      /* unknown key, bad value, missing seed */
  PMTUNE_E_REDUCIBLE = 5,
  PMTUNE_E_PERIODIC = 6,
  PMTUNE_E_UNSUPPORTED = 7,
  PMTUNE_E_ASSERTION = 8,
  PMTUNE_E_INVALID_ARGUMENT = 9,  /* null pointer, buffer too small */
  PMTUNE_E_INTERNAL = 10
} pmtune_status;

typedef struct pmtune_config pmtune_config;
typedef struct pmtune_result pmtune_result;

PMTUNE_API const char* pmtune_version(void);
PMTUNE_API const char* pmtune_status_name(pmtune_status status);
/* Message of the last failed call on this thread; "" if none. */
PMTUNE_API const char* pmtune_last_error(void);

/* ---- configuration ---- */

PMTUNE_API pmtune_status pmtune_config_new(pmtune_config** out);
PMTUNE_API pmtune_status pmtune_config_load(const char* path, pmtune_config** out);
PMTUNE_API pmtune_status pmtune_config_parse(const char* text, pmtune_config** out);
PMTUNE_API void pmtune_config_free(pmtune_config* config);
PMTUNE_API pmtune_status pmtune_config_set(pmtune_config* config, const char* key, const char* value);
/* Effective value (explicit or default). Writes at most `size` bytes including
 * the terminator; *needed receives the full length plus one. */
PMTUNE_API pmtune_status pmtune_config_get(const pmtune_config* config, const char* key, char* buffer, size_t size,
                                           size_t* needed);

PMTUNE_API size_t pmtune_config_key_count(void);
PMTUNE_API const char* pmtune_config_key_name(size_t index);
/* NULL for mandatory keys. */
PMTUNE_API const char* pmtune_config_key_default(size_t index);
PMTUNE_API const char* pmtune_config_key_help(size_t index);

/* ---- commands ---- */

PMTUNE_API size_t pmtune_command_count(void);
PMTUNE_API const char* pmtune_command_name(size_t index);

typedef void (*pmtune_progress_fn)(const char* message, void* user_data);

/* Runs a command; outputs go to <outdir>/<command>/. Returns PMTUNE_OK when
 * the command ran to completion, whether or not its internal assertions held:
 * inspect pmtune_result_failure_count. */
PMTUNE_API pmtune_status pmtune_run(const char* command, const pmtune_config* config, pmtune_progress_fn progress,
                                    void* user_data, pmtune_result** out);
PMTUNE_API void pmtune_result_free(pmtune_result* result);
PMTUNE_API int pmtune_result_failure_count(const pmtune_result* result);
PMTUNE_API int pmtune_result_check_count(const pmtune_result* result);
/* Strings stay valid until the result is freed. */
PMTUNE_API const char* pmtune_result_failures_json(const pmtune_result* result);
PMTUNE_API const char* pmtune_result_summary_json(const pmtune_result* result);
PMTUNE_API const char* pmtune_result_output_dir(const pmtune_result* result);

/* ---- analytic quantities for Gaussian noise ---- */

typedef struct pmtune_functionals {
  double sigma;
  double mean_accept; /* pi_z(rho_z) */
  double inv_accept;  /* pi_z(1 / rho_z) */
  double phi1;
  double if_z;
} pmtune_functionals;

typedef struct pmtune_sandwich_row {
  double if_jump;
  double rct_lo, rct_hi;
  double sigma_lo, sigma_hi;
} pmtune_sandwich_row;

PMTUNE_API pmtune_status pmtune_mean_accept_z(double sigma, double* out);
PMTUNE_API pmtune_status pmtune_noise_functionals(double sigma, pmtune_functionals* out);
/* bound: urct1..urct4, lrct1, lrct2 or rct_perfect. if_param is ignored by
 * bounds without an inefficiency argument; pass INFINITY for the limit. */
PMTUNE_API pmtune_status pmtune_bound_rct(const char* bound, double sigma, double if_param, double* out);
PMTUNE_API pmtune_status pmtune_minimize_rct(const char* bound, double if_param, double sigma_lo, double sigma_hi,
                                             double* sigma_opt, double* value);
PMTUNE_API pmtune_status pmtune_sandwich(double if_jump, double sigma_lo, double sigma_hi, pmtune_sandwich_row* out);
PMTUNE_API pmtune_status pmtune_arif(double sigma, double l, double* out);
PMTUNE_API pmtune_status pmtune_psi(double sigma, double* out);

#ifdef __cplusplus
}
#endif

#endif /* PMTUNE_PMTUNE_H */
