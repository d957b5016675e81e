#ifndef COORBIT_H
#define COORBIT_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Dilation group family.
typedef enum CoorbitFamilyKind {
  COORBIT_FAMILY_KIND_SIMILITUDE = 0,
  COORBIT_FAMILY_KIND_DIAGONAL = 1,
  COORBIT_FAMILY_KIND_SHEARLET = 2,
  COORBIT_FAMILY_KIND_SCALAR = 3,
} CoorbitFamilyKind;

// Result code of every call.
typedef enum CoorbitStatus {
  COORBIT_STATUS_OK = 0,
  COORBIT_STATUS_NULL_POINTER = 1,
  COORBIT_STATUS_INVALID_ARGUMENT = 2,
  COORBIT_STATUS_OFF_ORBIT = 3,
  COORBIT_STATUS_GRID_MISMATCH = 4,
  COORBIT_STATUS_UNSUPPORTED = 5,
  COORBIT_STATUS_INSUFFICIENT_SAMPLES = 6,
  COORBIT_STATUS_IO = 7,
  COORBIT_STATUS_FORMAT = 8,
  COORBIT_STATUS_BUFFER_TOO_SMALL = 9,
  COORBIT_STATUS_PANIC = 10,
} CoorbitStatus;

// Sampled field on a square frequency grid.
typedef struct CoorbitField CoorbitField;

// Quadrature grid on the dilation group.
typedef struct CoorbitHGrid CoorbitHGrid;

// Heap string returned by the library; free with [`coorbit_string_free`].
typedef struct CoorbitString CoorbitString;

// Sampled wavelet transform.
typedef struct CoorbitTransform CoorbitTransform;

// Family descriptor; `shear_exponent` is read for the shearlet family only.
typedef struct CoorbitFamily {
  enum CoorbitFamilyKind kind;
  double shear_exponent;
} CoorbitFamily;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL
// terminated, truncated to `len`). Returns the full message length.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
uintptr_t coorbit_last_error(char *buf, uintptr_t len);

// Whether `(xi1, xi2)` lies in the open dual orbit.
//
// # Safety
// `out` must be valid for writes.
enum CoorbitStatus coorbit_in_orbit(struct CoorbitFamily fam, double xi1, double xi2, bool *out);

// Euclidean distance from `(xi1, xi2)` to the orbit complement.
//
// # Safety
// `out` must be valid for writes.
enum CoorbitStatus coorbit_dist_complement(struct CoorbitFamily fam,
                                           double xi1,
                                           double xi2,
                                           double *out);

// Auxiliary envelope function `A`; fails with `OffOrbit` off the orbit.
//
// # Safety
// `out` must be valid for writes.
enum CoorbitStatus coorbit_aux_a(struct CoorbitFamily fam, double xi1, double xi2, double *out);

// Samples the default bump wavelet (`order == 0`) or the moment wavelet
// of the given order on an `n x n` grid over `[-xi_max, xi_max)^2`.
//
// # Safety
// `out` must be valid for writes.
enum CoorbitStatus coorbit_field_wavelet(struct CoorbitFamily fam,
                                         uint32_t order,
                                         uintptr_t n,
                                         double xi_max,
                                         struct CoorbitField **out);

// Builds a frequency-domain field from `2 n^2` interleaved (re, im)
// values in row-major order.
//
// # Safety
// `values` must be valid for `2 n^2` reads and `out` for writes.
enum CoorbitStatus coorbit_field_from_values(uintptr_t n,
                                             double xi_max,
                                             const double *values,
                                             struct CoorbitField **out);

// Reads a field from a grid file sidecar.
//
// # Safety
// `path` must be a NUL-terminated string and `out` valid for writes.
enum CoorbitStatus coorbit_field_read(const char *path, struct CoorbitField **out);

// Writes a field as a grid file sidecar plus raw data.
//
// # Safety
// `field` must be a live handle and `path` a NUL-terminated string.
enum CoorbitStatus coorbit_field_write(const struct CoorbitField *field, const char *path);

// Samples per axis of the field's grid.
//
// # Safety
// `field` must be a live handle and `out` valid for writes.
enum CoorbitStatus coorbit_field_size(const struct CoorbitField *field, uintptr_t *out);

// L2 norm of the field.
//
// # Safety
// `field` must be a live handle and `out` valid for writes.
enum CoorbitStatus coorbit_field_l2_norm(const struct CoorbitField *field, double *out);

// Copies the frequency samples as interleaved (re, im) pairs; `len` is
// the capacity of `buf` in doubles and must be at least `2 n^2`.
//
// # Safety
// `field` must be a live handle and `buf` valid for `len` writes.
enum CoorbitStatus coorbit_field_values(const struct CoorbitField *field,
                                        double *buf,
                                        uintptr_t len);

// Releases a field handle; null is ignored.
//
// # Safety
// `field` must be null or a handle not yet freed.
void coorbit_field_free(struct CoorbitField *field);

// Default quadrature grid of a family.
//
// # Safety
// `out` must be valid for writes.
enum CoorbitStatus coorbit_hgrid_default(struct CoorbitFamily fam, struct CoorbitHGrid **out);

// Quadrature grid from JSON (`{"family": .., "a_min": ..}` or a full grid).
//
// # Safety
// `json` must be a NUL-terminated string and `out` valid for writes.
enum CoorbitStatus coorbit_hgrid_from_json(const char *json, struct CoorbitHGrid **out);

// Number of nodes of the grid.
//
// # Safety
// `hgrid` must be a live handle and `out` valid for writes.
enum CoorbitStatus coorbit_hgrid_len(const struct CoorbitHGrid *hgrid, uintptr_t *out);

// # Safety
// `hgrid` must be null or a handle not yet freed.
void coorbit_hgrid_free(struct CoorbitHGrid *hgrid);

// Calderon function of `psi` at `(xi1, xi2)` under the grid's quadrature.
//
// # Safety
// Handles must be live and `out` valid for writes.
enum CoorbitStatus coorbit_calderon(const struct CoorbitField *psi,
                                    const struct CoorbitHGrid *hgrid,
                                    double xi1,
                                    double xi2,
                                    double *out);

// Wavelet transform of `f` with respect to `psi`.
//
// # Safety
// Handles must be live and `out` valid for writes.
enum CoorbitStatus coorbit_cwt_analyze(const struct CoorbitField *f,
                                       const struct CoorbitField *psi,
                                       const struct CoorbitHGrid *hgrid,
                                       struct CoorbitTransform **out);

// Weighted mixed `L^{p,q}` norm of a transform. `p` and `q` accept
// `INFINITY`; `weight_json` is a dilation weight bundle such as
// `{"u":1}` or null for `w = 1`.
//
// # Safety
// `t` must be a live handle, `weight_json` null or NUL-terminated and
// `out` valid for writes.
enum CoorbitStatus coorbit_transform_mixed_norm(const struct CoorbitTransform *t,
                                                double p,
                                                double q,
                                                double s,
                                                const char *weight_json,
                                                double *out);

// # Safety
// `t` must be null or a handle not yet freed.
void coorbit_transform_free(struct CoorbitTransform *t);

// Runs one experiment by command name (`calderon`, `check-embeddedness`,
// `verify-decay`, `frame-test`, `counterexample`) with an optional JSON
// configuration. The report is returned as a JSON string and its exit
// code (0 when every check passes) in `exit_code`.
//
// # Safety
// `command` must be NUL-terminated, `config_json` null or NUL-terminated,
// and both out-pointers valid for writes.
enum CoorbitStatus coorbit_run_experiment(const char *command,
                                          const char *config_json,
                                          struct CoorbitString **report,
                                          int32_t *exit_code);

// Borrowed pointer to the string's NUL-terminated bytes; valid until the
// string is freed.
//
// # Safety
// `s` must be a live handle.
const char *coorbit_string_data(const struct CoorbitString *s);

// # Safety
// `s` must be null or a handle not yet freed.
void coorbit_string_free(struct CoorbitString *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COORBIT_H */
