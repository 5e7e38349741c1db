#ifndef DISTBEAM_H
#define DISTBEAM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum DbStatus {
  DB_STATUS_OK = 0,
  /*
   Argument outside its domain, malformed expression, and similar.
   */
  DB_STATUS_INVALID_ARGUMENT = 1,
  /*
   The interface system is singular for these parameters.
   */
  DB_STATUS_SINGULAR_PARAMETER = 2,
  /*
   Quadrature or linear algebra failed.
   */
  DB_STATUS_NUMERICAL = 3,
  DB_STATUS_NULL_POINTER = 4,
  /*
   A panic was caught at the boundary.
   */
  DB_STATUS_PANIC = 5,
} DbStatus;

/*
 Opaque problem handle.
 */
typedef struct DbProblem DbProblem;

/*
 Opaque solution handle.
 */
typedef struct DbSolution DbSolution;

/*
 One-sided values at the jump.
 */
typedef struct DbLimits {
  double u_minus;
  double u_plus;
  double du_minus;
  double du_plus;
} DbLimits;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len` bytes). Returns the full message length including the
 terminator, or 0 when there is no error.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
size_t db_last_error_message(char *buf, size_t len);

/*
 Builds a problem on `[0, 1]` with stiffness `a` / `b` and force `p1` / `p2`
 left / right of `x0`. `g_expr` is an expression in `x` (null means zero
 forcing). `n_sing` singularities are read from `sing_loc` and `sing_exp`.

 # Safety
 `g_expr` must be null or a NUL-terminated string; `sing_loc` and
 `sing_exp` must be valid for `n_sing` reads; `out` must be writable.
 */
enum DbStatus db_problem_new(double a,
                             double b,
                             double x0,
                             double p1,
                             double p2,
                             const char *g_expr,
                             const double *sing_loc,
                             const double *sing_exp,
                             size_t n_sing,
                             struct DbProblem **out);

/*
 # Safety
 `p` must be null or a handle from [`db_problem_new`] not yet freed.
 */
void db_problem_free(struct DbProblem *p);

/*
 Solves the problem in closed form.

 # Safety
 `p` must be a live problem handle and `out` writable.
 */
enum DbStatus db_solve(const struct DbProblem *p, struct DbSolution **out);

/*
 # Safety
 `s` must be null or a handle from [`db_solve`] not yet freed.
 */
void db_solution_free(struct DbSolution *s);

/*
 `u(x)`. `side < 0` evaluates the left branch, `side > 0` the right branch,
 `side == 0` picks by position (mean of the limits at `x0`).

 # Safety
 `s` must be a live solution handle and `out` writable.
 */
enum DbStatus db_solution_eval(const struct DbSolution *s, double x, int32_t side, double *out);

/*
 # Safety
 `s` must be a live solution handle and `out` writable.
 */
enum DbStatus db_solution_limits(const struct DbSolution *s, struct DbLimits *out);

/*
 Free homogeneous coefficients of the left and right branches.

 # Safety
 `s` must be a live solution handle; `c1` and `d1` writable.
 */
enum DbStatus db_solution_coefficients(const struct DbSolution *s, double *c1, double *d1);

/*
 `det H` and the scale used for the singularity test.

 # Safety
 `s` must be a live solution handle; `det` writable; `scale` may be null.
 */
enum DbStatus db_solution_det(const struct DbSolution *s, double *det, double *scale);

/*
 First `count` candidate singular constant forces, written to `out_p`.
 `out_z1` (may be null) receives 1 for roots between tangent poles and 0
 for cosine zeros.

 # Safety
 `out_p` must be valid for `count` writes, `out_z1` null or likewise.
 */
enum DbStatus db_pl_sequence(double a,
                             double b,
                             double x0,
                             size_t count,
                             double *out_p,
                             int32_t *out_z1);

/*
 `ν t sin s cos t + s sin t cos s`.
 */
double db_f_function(double s, double t, double nu);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISTBEAM_H */
