#ifndef FERMI_KLEIN_H
#define FERMI_KLEIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. `FK_VERIFICATION_FAILED` means the call completed and wrote
// its report, but at least one check failed.
typedef enum FkStatus {
  FK_OK = 0,
  FK_VERIFICATION_FAILED = 1,
  FK_INVALID_INPUT = 2,
  FK_NULL_POINTER = 3,
  FK_GRADING_NOT_INNER = 4,
  FK_NOT_EVEN = 5,
  FK_RANK_DEFICIENT = 6,
  FK_INTERNAL = 7,
} FkStatus;

// A graded algebra.
typedef struct FkAlgebra FkAlgebra;

// A state on an [`FkAlgebra`].
typedef struct FkState FkState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The message of the last failed call on this thread, or an empty string.
// Valid until the next call into this library from the same thread.
const char *fk_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void fk_string_free(char *s);

// Parses an algebra JSON document. A negative `tolerance_override` keeps the
// tolerance stored in the document.
//
// # Safety
// `json` must be a nul-terminated string and `out` a writable pointer.
enum FkStatus fk_algebra_from_json(const char *json,
                                   double tolerance_override,
                                   struct FkAlgebra **out);

// One of the built-in algebras (`m2`, `m2+m2`, `m3`, `car2`, ...).
//
// # Safety
// `name` must be a nul-terminated string and `out` a writable pointer.
enum FkStatus fk_algebra_builtin(const char *name, struct FkAlgebra **out);

// # Safety
// `alg` must come from this library and not have been freed already.
void fk_algebra_free(struct FkAlgebra *alg);

// Writes the algebra dimension and the size of its ambient matrices.
//
// # Safety
// `alg` must be a live handle; the outputs must be writable.
enum FkStatus fk_algebra_dim(const struct FkAlgebra *alg, size_t *dim, size_t *ambient_dim);

// Runs the structural validation and writes its JSON report.
//
// # Safety
// `alg` must be a live handle and `report` writable.
enum FkStatus fk_algebra_validate(const struct FkAlgebra *alg, char **report);

// A state given by its density matrix on the ambient space (`2·d·d` doubles).
//
// # Safety
// `alg` must be a live handle, `density` must hold `2·d·d` doubles where
// `d` is the ambient dimension, and `out` must be writable.
enum FkStatus fk_state_new(const struct FkAlgebra *alg,
                           const double *density,
                           struct FkState **out);

// The normalized trace on the algebra.
//
// # Safety
// `alg` must be a live handle and `out` writable.
enum FkStatus fk_state_trace(const struct FkAlgebra *alg, struct FkState **out);

// # Safety
// `state` must come from this library and not have been freed already.
void fk_state_free(struct FkState *state);

// Evaluates the state on an algebra element (`2·d·d` doubles).
//
// # Safety
// `state` must be a live handle, `x` must hold `2·d·d` doubles and the
// outputs must be writable.
enum FkStatus fk_state_evaluate(const struct FkState *state,
                                const double *x,
                                double *re,
                                double *im);

// Builds the GNS representation and writes its validation report; the GNS
// dimension and the central-support flag are written when the pointers are
// non-null.
//
// # Safety
// `state` must be a live handle and `report` writable.
enum FkStatus fk_state_gns(const struct FkState *state,
                           size_t *gns_dim,
                           bool *central_support,
                           char **report);

// Builds the Klein map for `n` copies of `alg` and writes the verification
// report. Fails with `FK_GRADING_NOT_INNER` for outer gradings.
//
// # Safety
// `alg` must be a live handle and `report` writable.
enum FkStatus fk_klein_verify(const struct FkAlgebra *alg, size_t n, uint64_t seed, char **report);

// The CAR(2) counterexample battery. A positive `noise` perturbs the
// annihilators with seeded Gaussian noise of that norm.
//
// # Safety
// `report` must be writable.
enum FkStatus fk_counterexample(double noise, uint64_t seed, char **report);

// Library version, static.
const char *fk_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* FERMI_KLEIN_H */
