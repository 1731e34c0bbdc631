/* C interface to the statfuse pan-sharpening library. */

#ifndef STATFUSE_H
#define STATFUSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for every fallible call.
 */
typedef enum StatfuseStatus {
  STATFUSE_STATUS_OK = 0,
  STATFUSE_STATUS_NULL_POINTER,
  STATFUSE_STATUS_INVALID_ARGUMENT,
  STATFUSE_STATUS_DIMENSION_MISMATCH,
  STATFUSE_STATUS_SHAPE_ERROR,
  STATFUSE_STATUS_PARSE_ERROR,
  STATFUSE_STATUS_RANGE_ERROR,
  STATFUSE_STATUS_IO_ERROR,
  STATFUSE_STATUS_DEGENERATE_INPUT,
  STATFUSE_STATUS_PANIC,
} StatfuseStatus;

/**
 * Fusion method selector.
 */
typedef enum StatfuseMethod {
  STATFUSE_METHOD_LMM = 0,
  STATFUSE_METHOD_LMVM,
  STATFUSE_METHOD_RVS,
  STATFUSE_METHOD_LCM,
} StatfuseMethod;

/**
 * Report rendering format.
 */
typedef enum StatfuseReportFormat {
  STATFUSE_REPORT_FORMAT_CSV = 0,
  STATFUSE_REPORT_FORMAT_JSON,
} StatfuseReportFormat;

/**
 * A single image band (opaque).
 */
typedef struct StatfuseBand StatfuseBand;

/**
 * A quality report (opaque); render with [`statfuse_report_render`].
 */
typedef struct StatfuseReport StatfuseReport;

/**
 * An ordered set of equally sized bands (opaque).
 */
typedef struct StatfuseStack StatfuseStack;

/**
 * Fusion parameters; fill with [`statfuse_fusion_options_default`] and
 * adjust fields as needed. Window dimensions must be odd.
 */
typedef struct StatfuseFusionOptions {
  enum StatfuseMethod method;
  /**
   * Integer PAN/MS resolution ratio, at least 1.
   */
  uint32_t ratio;
  uint32_t window_lmm_width;
  uint32_t window_lmm_height;
  uint32_t window_lmvm_width;
  uint32_t window_lmvm_height;
  uint32_t window_rvs_width;
  uint32_t window_rvs_height;
  uint32_t window_lcm_width;
  uint32_t window_lcm_height;
  /**
   * Degeneracy threshold for near-zero denominators.
   */
  double epsilon;
  /**
   * When true, fused values are clamped to [clamp_lo, clamp_hi].
   */
  bool clamp_enabled;
  double clamp_lo;
  double clamp_hi;
} StatfuseFusionOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the most recent error message on this thread into `buffer`
 * (NUL-terminated, truncated to `capacity`). Returns the full message
 * length in bytes excluding the terminator; call with a null buffer to
 * query the required size.
 */
size_t statfuse_last_error(char *buffer, size_t capacity);

/**
 * Creates a band from `width * height` row-major samples.
 *
 * # Safety
 * `data` must point to `len` readable doubles; `out` must be a valid
 * location for a handle. The returned handle must be released with
 * [`statfuse_band_free`].
 */
enum StatfuseStatus statfuse_band_create(uint32_t width,
                                         uint32_t height,
                                         const double *data,
                                         size_t len,
                                         uint32_t bit_depth,
                                         struct StatfuseBand **out);

/**
 * # Safety
 * `band` must be a handle from this library, not yet freed; null is a no-op.
 */
void statfuse_band_free(struct StatfuseBand *band);

/**
 * Width in pixels; 0 when `band` is null.
 *
 * # Safety
 * `band` must be a live handle or null.
 */
uint32_t statfuse_band_width(const struct StatfuseBand *band);

/**
 * Height in pixels; 0 when `band` is null.
 *
 * # Safety
 * `band` must be a live handle or null.
 */
uint32_t statfuse_band_height(const struct StatfuseBand *band);

/**
 * Declared sample depth in bits; 0 when `band` is null.
 *
 * # Safety
 * `band` must be a live handle or null.
 */
uint32_t statfuse_band_bit_depth(const struct StatfuseBand *band);

/**
 * Copies the band's row-major samples into `out`.
 *
 * # Safety
 * `out` must point to at least `capacity` writable doubles.
 */
enum StatfuseStatus statfuse_band_copy_data(const struct StatfuseBand *band,
                                            double *out,
                                            size_t capacity);

/**
 * Builds a stack from `count` band handles (each copied in; the caller
 * keeps ownership of the inputs). Bands must share dimensions.
 *
 * # Safety
 * `bands` must point to `count` live band handles.
 */
enum StatfuseStatus statfuse_stack_create(const struct StatfuseBand *const *bands,
                                          size_t count,
                                          struct StatfuseStack **out);

/**
 * # Safety
 * `stack` must be a handle from this library, not yet freed; null is a no-op.
 */
void statfuse_stack_free(struct StatfuseStack *stack);

/**
 * Number of bands; 0 when `stack` is null.
 *
 * # Safety
 * `stack` must be a live handle or null.
 */
size_t statfuse_stack_band_count(const struct StatfuseStack *stack);

/**
 * Copies band `index` out of the stack into a fresh band handle.
 *
 * # Safety
 * `stack` must be a live handle; `out` a valid handle location.
 */
enum StatfuseStatus statfuse_stack_band(const struct StatfuseStack *stack,
                                        size_t index,
                                        struct StatfuseBand **out);

/**
 * Reads a PGM or PPM file into a new stack handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid handle location.
 */
enum StatfuseStatus statfuse_read_image(const char *path, struct StatfuseStack **out);

/**
 * Writes a stack as binary PGM (1 band) or PPM (3 bands).
 *
 * # Safety
 * `stack` must be a live handle; `path` a NUL-terminated string.
 */
enum StatfuseStatus statfuse_write_image(const struct StatfuseStack *stack,
                                         const char *path,
                                         uint32_t maxval);

/**
 * Default fusion options for a method: 11x11 windows (5x5 for RVS),
 * epsilon 1e-12, clamping off.
 */
struct StatfuseFusionOptions statfuse_fusion_options_default(enum StatfuseMethod method,
                                                             uint32_t ratio);

/**
 * Fuses every MS band with the PAN band, producing a stack of fused bands
 * at PAN resolution (band order preserved).
 *
 * # Safety
 * `pan`, `ms` must be live handles; `options` readable; `out` a valid
 * handle location.
 */
enum StatfuseStatus statfuse_fuse(const struct StatfuseBand *pan,
                                  const struct StatfuseStack *ms,
                                  const struct StatfuseFusionOptions *options,
                                  struct StatfuseStack **out);

/**
 * Replicates every pixel into a `factor x factor` block.
 *
 * # Safety
 * `band` must be a live handle; `out` a valid handle location.
 */
enum StatfuseStatus statfuse_upsample_nearest(const struct StatfuseBand *band,
                                              uint32_t factor,
                                              struct StatfuseBand **out);

/**
 * Box-blurs and decimates by `factor`; dimensions must divide evenly.
 *
 * # Safety
 * `band` must be a live handle; `out` a valid handle location.
 */
enum StatfuseStatus statfuse_degrade(const struct StatfuseBand *band,
                                     uint32_t factor,
                                     struct StatfuseBand **out);

/**
 * Population standard deviation of all samples.
 *
 * # Safety
 * `band` must be a live handle; `out` writable.
 */
enum StatfuseStatus statfuse_std_dev(const struct StatfuseBand *band, double *out);

/**
 * Shannon entropy in bits over `levels` quantisation levels (at least 2).
 *
 * # Safety
 * `band` must be a live handle; `out` writable.
 */
enum StatfuseStatus statfuse_entropy(const struct StatfuseBand *band, uint32_t levels, double *out);

/**
 * Pearson correlation coefficient.
 *
 * # Safety
 * Both bands must be live handles; `out` writable.
 */
enum StatfuseStatus statfuse_correlation(const struct StatfuseBand *f,
                                         const struct StatfuseBand *m,
                                         double *out);

/**
 * Signal-to-noise ratio (fused energy over squared error).
 *
 * # Safety
 * Both bands must be live handles; `out` writable.
 */
enum StatfuseStatus statfuse_snr(const struct StatfuseBand *f,
                                 const struct StatfuseBand *m,
                                 double *out);

/**
 * Root-mean-square error normalised by a 255 full scale.
 *
 * # Safety
 * Both bands must be live handles; `out` writable.
 */
enum StatfuseStatus statfuse_nrmse(const struct StatfuseBand *f,
                                   const struct StatfuseBand *m,
                                   double *out);

/**
 * Mean absolute relative deviation from the reference.
 *
 * # Safety
 * Both bands must be live handles; `out` writable.
 */
enum StatfuseStatus statfuse_deviation_index(const struct StatfuseBand *f,
                                             const struct StatfuseBand *m,
                                             double *out);

/**
 * Scores a fused stack against a reference stack (band counts must
 * match), producing a report handle with ORIGIN rows first.
 *
 * # Safety
 * `fused` and `reference` must be live handles; `label` a NUL-terminated
 * string; `out` a valid handle location.
 */
enum StatfuseStatus statfuse_evaluate(const struct StatfuseStack *fused,
                                      const char *label,
                                      const struct StatfuseStack *reference,
                                      uint32_t levels,
                                      struct StatfuseReport **out);

/**
 * # Safety
 * `report` must be a handle from this library, not yet freed; null is a no-op.
 */
void statfuse_report_free(struct StatfuseReport *report);

/**
 * Renders a report as CSV or JSON into a NUL-terminated string owned by
 * this library; release it with [`statfuse_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` a valid string location.
 */
enum StatfuseStatus statfuse_report_render(const struct StatfuseReport *report,
                                           enum StatfuseReportFormat format,
                                           char **out);

/**
 * Writes a report to a file as CSV or JSON.
 *
 * # Safety
 * `report` must be a live handle; `path` a NUL-terminated string.
 */
enum StatfuseStatus statfuse_write_report(const struct StatfuseReport *report,
                                          const char *path,
                                          enum StatfuseReportFormat format);

/**
 * Releases a string returned by [`statfuse_report_render`].
 *
 * # Safety
 * `s` must come from this library and not have been freed; null is a no-op.
 */
void statfuse_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STATFUSE_H */
