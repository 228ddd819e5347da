/* dhl — C API for the degenerate Hessian / prescribed-curvature laboratory.
 *
 * All functions return a dhl_status; outputs go through pointers. Handles
 * are opaque and must be released with the matching free function. Error
 * details for the calling thread are available via dhl_last_error().
 */
#ifndef DHL_H_
#define DHL_H_

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dhl_status {
  DHL_OK = 0,
  DHL_ERROR_ARGUMENT = 1,
  DHL_ERROR_DOMAIN = 2,
  DHL_ERROR_PRECONDITION = 3,
  DHL_ERROR_NUMERIC = 4,
  DHL_ERROR_NONCONVERGENCE = 5,
  DHL_ERROR_VALIDATION = 6,
  DHL_ERROR_IO = 7,
  DHL_ERROR_VERIFICATION = 8
} dhl_status;

/* Stable name for a status code. */
const char* dhl_status_name(int status);

/* Message of the most recent failure on this thread ("" when none). */
const char* dhl_last_error(void);

/* CLI exit code for a status: 0 ok, 2 validation/usage, 3 nonconvergence
 * or numerical failure, 4 verification failure. */
int dhl_exit_code(int status);

/* --- pointwise algebra ---------------------------------------------------
 * Spectra are length-n arrays; matrices are row-major n*n, symmetric. */

dhl_status dhl_sigma(const double* lam, int n, int k, double* out);
dhl_status dhl_sigma_truncated(const double* lam, int n, int m, const int* zeroed,
                               int num_zeroed, double* out);

/* label: 0 interior, 1 boundary, 2 outside. */
dhl_status dhl_cone_status(const double* lam, int n, int k, double tol, int* label,
                           double* margin);

dhl_status dhl_sigma_gradient(const double* a, int n, int k, double* grad /* n*n */);

/* Descending eigenvalues; frame (n*n, columns = eigenvectors) may be NULL. */
dhl_status dhl_eigen_sym(const double* a, int n, double* lam, double* frame);

/* Principal curvatures (descending) of the graph with gradient du and
 * Hessian d2u; label/margin classify them at order k. */
dhl_status dhl_graph_curvature(const double* du, const double* d2u, int n, int k,
                               double* kappa, int* label, double* margin);

/* Hyperbolic (half-space) principal curvatures at height u > 0. */
dhl_status dhl_hyperbolic_curvature(double u, const double* du, const double* d2u, int n,
                                    int k, double* kappa, int* label, double* margin);

/* --- expressions ---------------------------------------------------------
 * Arithmetic over x1..x8 and u with +,-,*,/,^ and sqrt, abs, max, min, exp,
 * sin, cos, pow. */

typedef struct dhl_expr dhl_expr;

/* On syntax errors returns DHL_ERROR_VALIDATION and sets *error_offset to
 * the byte position (pass NULL to ignore). */
dhl_status dhl_expr_parse(const char* text, dhl_expr** out, long* error_offset);
dhl_status dhl_expr_eval(const dhl_expr* e, const double* x, int n, double u, double* out);

/* Canonical form; *needed receives the full length including the NUL. */
dhl_status dhl_expr_print(const dhl_expr* e, char* buf, size_t cap, size_t* needed);
void dhl_expr_free(dhl_expr* e);

/* --- configuration and runs ---------------------------------------------- */

typedef struct dhl_config dhl_config;

dhl_status dhl_config_load(const char* path, dhl_config** out);
dhl_status dhl_config_parse(const char* text, dhl_config** out);

/* Dotted override, e.g. dhl_config_set(cfg, "problem.resolution", "65"). */
dhl_status dhl_config_set(dhl_config* cfg, const char* key, const char* value);

/* Canonical serialization; *needed receives the full length incl. NUL. */
dhl_status dhl_config_write(const dhl_config* cfg, char* buf, size_t cap, size_t* needed);
void dhl_config_free(dhl_config* cfg);

/* Commands: "solve", "sweep", "verify", "geometry". out_dir NULL or ""
 * defers to the configuration. */
dhl_status dhl_run(const dhl_config* cfg, const char* command, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* DHL_H_ */
