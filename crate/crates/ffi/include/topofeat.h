#ifndef TOPOFEAT_H
#define TOPOFEAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TfStatus {
  TF_STATUS_OK = 0,
  TF_STATUS_NULL_POINTER = 1,
  TF_STATUS_INVALID_ARGUMENT = 2,
  TF_STATUS_IO = 3,
  TF_STATUS_DEGENERATE = 4,
  TF_STATUS_SIZE_CAP = 5,
  TF_STATUS_BUFFER_TOO_SMALL = 6,
  TF_STATUS_INTERNAL = 7,
} TfStatus;

typedef enum TfComplex {
  TF_COMPLEX_RIPS = 0,
  TF_COMPLEX_CECH = 1,
  TF_COMPLEX_ALPHA = 2,
} TfComplex;

/**
 * Opaque persistence diagram.
 */
typedef struct TfDiagram TfDiagram;

/**
 * Opaque point cloud.
 */
typedef struct TfPointCloud TfPointCloud;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *tf_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *tf_last_error_message(void);

/**
 * Builds a cloud from `n` interleaved `x, y` pairs.
 *
 * # Safety
 * `xy` must point to `2 * n` doubles (or may be NULL when `n == 0`); `out`
 * must be a valid pointer.
 */
enum TfStatus tf_pointcloud_new(const double *xy, uintptr_t n, struct TfPointCloud **out);

/**
 * Reads a `x y` per line text file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid.
 */
enum TfStatus tf_pointcloud_read(const char *path, struct TfPointCloud **out);

/**
 * # Safety
 * `out` must be valid.
 */
enum TfStatus tf_sample_disc(uintptr_t n, uint64_t seed, struct TfPointCloud **out);

/**
 * # Safety
 * `out` must be valid.
 */
enum TfStatus tf_sample_annulus(uintptr_t n,
                                double r_in,
                                double r_out,
                                uint64_t seed,
                                struct TfPointCloud **out);

/**
 * Number of points; 0 for NULL.
 *
 * # Safety
 * `pc` must be NULL or a live handle.
 */
uintptr_t tf_pointcloud_len(const struct TfPointCloud *pc);

/**
 * # Safety
 * `pc` must be a live handle; `x` and `y` must be valid.
 */
enum TfStatus tf_pointcloud_get(const struct TfPointCloud *pc, uintptr_t i, double *x, double *y);

/**
 * # Safety
 * `pc` must be NULL or a handle not freed before.
 */
void tf_pointcloud_free(struct TfPointCloud *pc);

/**
 * Persistence diagram up to dimension 1 of the chosen filtration (simplices
 * up to dimension 2, no value cap). `squared` reports Čech values as
 * squared radii.
 *
 * # Safety
 * `pc` must be a live handle; `out` must be valid.
 */
enum TfStatus tf_diagram_compute(const struct TfPointCloud *pc,
                                 enum TfComplex complex,
                                 bool squared,
                                 struct TfDiagram **out);

/**
 * Number of pairs; 0 for NULL.
 *
 * # Safety
 * `d` must be NULL or a live handle.
 */
uintptr_t tf_diagram_len(const struct TfDiagram *d);

/**
 * Pair `i` in (dim, birth, death) order; `death` is +inf for essential classes.
 *
 * # Safety
 * `d` must be a live handle; output pointers must be valid.
 */
enum TfStatus tf_diagram_get(const struct TfDiagram *d,
                             uintptr_t i,
                             uintptr_t *dim,
                             double *birth,
                             double *death);

/**
 * # Safety
 * `d` must be NULL or a handle not freed before.
 */
void tf_diagram_free(struct TfDiagram *d);

/**
 * Bottleneck distance in dimension `dim`.
 *
 * # Safety
 * `a`, `b` must be live handles; `out` must be valid.
 */
enum TfStatus tf_bottleneck(const struct TfDiagram *a,
                            const struct TfDiagram *b,
                            uintptr_t dim,
                            double *out);

/**
 * Constant-weight silhouettes of dimensions 0 and 1 into `buf`
 * (`2 * resolution` values).
 *
 * # Safety
 * `d` must be a live handle; `buf` must hold `len` doubles.
 */
enum TfStatus tf_silhouette_feature(const struct TfDiagram *d,
                                    uintptr_t resolution,
                                    double *buf,
                                    uintptr_t len);

/**
 * Number of values written by [`tf_signature_feature`].
 */
uintptr_t tf_signature_feature_len(void);

/**
 * Landscape signature feature (2 × 155 values) into `buf`.
 *
 * # Safety
 * `d` must be a live handle; `buf` must hold `len` doubles.
 */
enum TfStatus tf_signature_feature(const struct TfDiagram *d, double *buf, uintptr_t len);

/**
 * Per-class IoU of two `width × height` label masks. `per_class` receives
 * `classes` values; absent classes score 1.
 *
 * # Safety
 * `pred` and `truth` must hold `width * height` values; `per_class` must
 * hold `classes` doubles; `total` must be valid.
 */
enum TfStatus tf_iou(const uint16_t *pred,
                     const uint16_t *truth,
                     uintptr_t width,
                     uintptr_t height,
                     uintptr_t classes,
                     double *per_class,
                     double *total);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPOFEAT_H */
