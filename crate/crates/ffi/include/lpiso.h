#ifndef LPISO_H
#define LPISO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Bumped on any incompatible change to the exported functions.
#define LPISO_ABI_VERSION 1

typedef enum LpisoOrbitClass {
  LPISO_ORBIT_CLASS_FULL_SUPPORT = 0,
  LPISO_ORBIT_CLASS_PARTIAL_SUPPORT = 1,
} LpisoOrbitClass;

typedef enum LpisoStatus {
  LPISO_STATUS_OK = 0,
  LPISO_STATUS_NULL_POINTER = 1,
  LPISO_STATUS_INVALID_UTF8 = 2,
  LPISO_STATUS_PARSE_ERROR = 3,
  LPISO_STATUS_DIMENSION_MISMATCH = 4,
  LPISO_STATUS_INVALID_INPUT = 5,
  LPISO_STATUS_INCOMPATIBLE_SPACES = 6,
  LPISO_STATUS_NOT_UNIT_NORM = 7,
  LPISO_STATUS_ORBIT_MISMATCH = 8,
  LPISO_STATUS_BUFFER_TOO_SMALL = 9,
  LPISO_STATUS_PANIC = 10,
} LpisoStatus;

typedef struct LpisoLamperti LpisoLamperti;

typedef struct LpisoStepFn LpisoStepFn;

typedef struct LpisoSumFn LpisoSumFn;

typedef struct LpisoSumIsometry LpisoSumIsometry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

uint32_t lpiso_abi_version(void);

// Message of the last failure on this thread, or null. Owned by the library;
// valid until the next failing call on the same thread.
const char *lpiso_last_error(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void lpiso_string_free(char *s);

// `values` holds `(n_breaks - 1) * dim` numbers, cell by cell.
//
// # Safety
// `breaks` and `values` must point to arrays of the stated lengths.
enum LpisoStatus lpiso_step_new(size_t dim,
                                const double *breaks,
                                size_t n_breaks,
                                const double *values,
                                struct LpisoStepFn **out);

// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum LpisoStatus lpiso_step_from_json(const char *json, struct LpisoStepFn **out);

// # Safety
// `f` must be a live handle; `out` must be writable.
enum LpisoStatus lpiso_step_to_json(const struct LpisoStepFn *f, char **out);

// # Safety
// `f` must be null or a handle not yet freed.
void lpiso_step_free(struct LpisoStepFn *f);

// # Safety
// `f` must be a live handle.
size_t lpiso_step_dim(const struct LpisoStepFn *f);

// # Safety
// `f` must be a live handle.
size_t lpiso_step_num_cells(const struct LpisoStepFn *f);

// Writes `f(x)` into `out[0..len]`; `len` must be at least the dimension.
//
// # Safety
// `f` must be a live handle and `out` must hold `len` doubles.
enum LpisoStatus lpiso_step_eval(const struct LpisoStepFn *f, double x, double *out, size_t len);

// `||f||_{L^p(X)}` with `X = l_q^d`.
//
// # Safety
// `f` must be a live handle; `out` must be writable.
enum LpisoStatus lpiso_step_norm(const struct LpisoStepFn *f, double p, double q, double *out);

// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum LpisoStatus lpiso_lamperti_from_json(const char *json, struct LpisoLamperti **out);

// # Safety
// `t` must be a live handle; `out` must be writable.
enum LpisoStatus lpiso_lamperti_to_json(const struct LpisoLamperti *t, char **out);

// # Safety
// `t` must be null or a handle not yet freed.
void lpiso_lamperti_free(struct LpisoLamperti *t);

// # Safety
// Handles must be live; `out` must be writable.
enum LpisoStatus lpiso_lamperti_apply(const struct LpisoLamperti *t,
                                      const struct LpisoStepFn *f,
                                      struct LpisoStepFn **out);

// `outer ∘ inner`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum LpisoStatus lpiso_lamperti_compose(const struct LpisoLamperti *outer,
                                        const struct LpisoLamperti *inner,
                                        struct LpisoLamperti **out);

// # Safety
// `t` must be a live handle; `out` must be writable.
enum LpisoStatus lpiso_lamperti_invert(const struct LpisoLamperti *t, struct LpisoLamperti **out);

// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum LpisoStatus lpiso_sum_from_json(const char *json, struct LpisoSumFn **out);

// # Safety
// `f` must be a live handle; `out` must be writable.
enum LpisoStatus lpiso_sum_to_json(const struct LpisoSumFn *f, char **out);

// # Safety
// `f` must be null or a handle not yet freed.
void lpiso_sum_free(struct LpisoSumFn *f);

// # Safety
// `f` must be a live handle; `out` must be writable.
enum LpisoStatus lpiso_sum_norm(const struct LpisoSumFn *f, double p, double *out);

// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum LpisoStatus lpiso_sum_isometry_from_json(const char *json, struct LpisoSumIsometry **out);

// # Safety
// `t` must be a live handle; `out` must be writable.
enum LpisoStatus lpiso_sum_isometry_to_json(const struct LpisoSumIsometry *t, char **out);

// # Safety
// `t` must be null or a handle not yet freed.
void lpiso_sum_isometry_free(struct LpisoSumIsometry *t);

// # Safety
// Handles must be live; `out` must be writable.
enum LpisoStatus lpiso_sum_isometry_apply(const struct LpisoSumIsometry *t,
                                          const struct LpisoSumFn *f,
                                          struct LpisoSumFn **out);

// `h(t, T) F`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum LpisoStatus lpiso_homotopy_apply(double t,
                                      const struct LpisoSumIsometry *op,
                                      const struct LpisoSumFn *f,
                                      double p,
                                      struct LpisoSumFn **out);

// # Safety
// Handles must be live; `out` must be writable.
enum LpisoStatus lpiso_lamperti_functional(const struct LpisoStepFn *f,
                                           const struct LpisoStepFn *g,
                                           double p,
                                           double q,
                                           double *out);

// # Safety
// `f` must be a live handle; `out` must be writable.
enum LpisoStatus lpiso_orbit_class(const struct LpisoStepFn *f,
                                   double p,
                                   enum LpisoOrbitClass *out);

// An isometry `T` with `T f = g`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum LpisoStatus lpiso_rearrangement_isometry(const struct LpisoStepFn *f,
                                              const struct LpisoStepFn *g,
                                              double p,
                                              struct LpisoLamperti **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LPISO_H */
