/* C interface to the fixed-angle inverse scattering toolkit.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns an fa_status; on
 * failure fa_last_error() describes the problem (thread-local, valid until
 * the next call on the same thread). Strings returned through char** must be
 * released with fa_string_free.
 */
#ifndef FIXANGLE_FIXANGLE_H
#define FIXANGLE_FIXANGLE_H

#include <stddef.h>

#if defined(_WIN32)
#define FA_API __declspec(dllexport)
#else
#define FA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fa_status {
  FA_OK = 0,
  FA_ERR_CONFIG = 1,
  FA_ERR_INVALID_WAVENUMBER = 2,
  FA_ERR_RESONANT_LATTICE = 3,
  FA_ERR_GRID_MISMATCH = 4,
  FA_ERR_NO_CONTRACTION = 5,
  FA_ERR_DENSE_TOO_LARGE = 6,
  FA_ERR_DEGENERATE_FREQUENCY = 7,
  FA_ERR_ORACLE_FAILURE = 8,
  FA_ERR_NOT_CONVERGED = 9,
  FA_ERR_IO = 10,
  FA_ERR_INVALID_ARGUMENT = 11,
  FA_ERR_INTERNAL = 100
} fa_status;

typedef struct fa_config fa_config;
typedef struct fa_field fa_field;
typedef struct fa_dataset fa_dataset;
typedef struct fa_forward_result fa_forward_result;
typedef struct fa_recon fa_recon;

typedef struct fa_grid_info {
  int d;
  int n;
  double L;
  double R;
} fa_grid_info;

FA_API const char* fa_last_error(void);
FA_API const char* fa_status_name(fa_status status);
FA_API const char* fa_version(void);
/* JSON object with the library version and the versions of its numeric dependencies. */
FA_API fa_status fa_versions_json(char** out);
/* Worker count for data-parallel loops; results do not depend on it. */
FA_API void fa_set_threads(int n);
FA_API void fa_string_free(char* s);

/* ---- configuration ---- */
FA_API fa_status fa_config_parse(const char* json, fa_config** out);
FA_API fa_status fa_config_load(const char* path, fa_config** out);
/* Full resolved configuration; re-parses to an identical config. */
FA_API fa_status fa_config_to_json(const fa_config* cfg, char** out);
/* Newline-separated validation warnings (empty string if none). */
FA_API fa_status fa_config_warnings(const fa_config* cfg, char** out);
/* Copy of cfg with recon.m replaced. */
FA_API fa_status fa_config_with_m(const fa_config* cfg, int m, fa_config** out);
/* recon.ms list (may be empty). Writes up to capacity entries, returns count in *count. */
FA_API fa_status fa_config_recon_ms(const fa_config* cfg, int* ms, size_t capacity, size_t* count);
FA_API int fa_config_has_potential(const fa_config* cfg);
FA_API void fa_config_free(fa_config* cfg);

/* ---- fields ---- */
/* Potential from potential_path if set, else from the potential recipe. */
FA_API fa_status fa_field_potential(const fa_config* cfg, fa_field** out);
FA_API fa_status fa_field_from_values(const fa_grid_info* grid, const double* re, const double* im,
                                      fa_field** out);
FA_API fa_status fa_field_read(const char* stem, fa_field** out);
FA_API fa_status fa_field_write(const fa_field* f, const char* stem);
FA_API fa_status fa_field_info(const fa_field* f, fa_grid_info* grid, int* is_complex);
/* Copies N^d samples; im may be NULL. */
FA_API fa_status fa_field_values(const fa_field* f, double* re, double* im, size_t count);
FA_API fa_status fa_field_sobolev_norm(const fa_field* f, double alpha, double* out);
FA_API void fa_field_free(fa_field* f);

/* ---- forward problem ---- */
/* Solves at forward.k / forward.theta and evaluates the far field on
 * forward.omega_count directions. */
FA_API fa_status fa_forward(const fa_config* cfg, const fa_field* q, fa_forward_result** out);
FA_API fa_status fa_forward_scattered(const fa_forward_result* r, fa_field** out);
/* CSV omega_1,...,omega_d,re,im. */
FA_API fa_status fa_forward_far_field_csv(const fa_forward_result* r, char** out);
FA_API fa_status fa_forward_summary_json(const fa_forward_result* r, char** out);
FA_API void fa_forward_free(fa_forward_result* r);

/* ---- datasets ---- */
/* Tabulates u_inf(omega, +-theta0, k). solver_tol > 0 overrides solver.tol. */
FA_API fa_status fa_dataset_generate(const fa_config* cfg, const fa_field* q, double solver_tol,
                                     fa_dataset** out);
FA_API fa_status fa_dataset_read(const char* stem, fa_dataset** out);
FA_API fa_status fa_dataset_write(const fa_dataset* ds, const char* stem);
FA_API size_t fa_dataset_size(const fa_dataset* ds);
FA_API fa_status fa_dataset_gap(const fa_dataset* a, const fa_dataset* b, double* rel, double* max_abs);
FA_API void fa_dataset_free(fa_dataset* ds);

/* ---- Born approximation and reconstruction ---- */
/* Oracle is synthetic over q (oracle.backing = synthetic) or the dataset. */
FA_API fa_status fa_born(const fa_config* cfg, const fa_field* q, const fa_dataset* ds, fa_field** out,
                         char** summary_json);
/* On FA_ERR_NOT_CONVERGED *out is still set and holds the last iterate. */
FA_API fa_status fa_reconstruct(const fa_config* cfg, const fa_field* q, const fa_dataset* ds,
                                const fa_field* truth, fa_recon** out);
FA_API fa_status fa_recon_field(const fa_recon* r, fa_field** out);
FA_API fa_status fa_recon_born_field(const fa_recon* r, fa_field** out);
FA_API fa_status fa_recon_trace_jsonl(const fa_recon* r, char** out);
FA_API fa_status fa_recon_summary_json(const fa_recon* r, char** out);
FA_API int fa_recon_converged(const fa_recon* r);
FA_API void fa_recon_free(fa_recon* r);
FA_API fa_status fa_convergence_report(const fa_config* cfg, const fa_recon* const* runs, size_t count,
                                       const fa_field* truth, char** out);

/* ---- experiments ---- */
/* b may be NULL. Report JSON; FA_ERR_NOT_CONVERGED if any run failed to converge. */
FA_API fa_status fa_uniqueness(const fa_config* cfg, const fa_dataset* a, const fa_dataset* b, char** report_json);
/* f may be NULL: the potential recipe on pw.grid (or grid) is used. */
FA_API fa_status fa_pw_scan(const fa_config* cfg, const fa_field* f, char** csv, char** report_json);

FA_API fa_status fa_sha256_file(const char* path, char out[65]);

#ifdef __cplusplus
}
#endif

#endif /* FIXANGLE_FIXANGLE_H */
