#ifndef QCLDPC_H
#define QCLDPC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  QC_STATUS_OK = 0,
  QC_STATUS_NULL_POINTER = 1,
  QC_STATUS_INVALID_ARGUMENT = 2,
  QC_STATUS_DIMENSION_MISMATCH = 3,
  QC_STATUS_FORMAT = 4,
  QC_STATUS_IO = 5,
  /**
   * The decoder returned no estimate; the estimate buffer is zeroed.
   */
  QC_STATUS_DECODE_FAILED = 6,
  QC_STATUS_INTERNAL = 7,
} QcStatus;

typedef enum {
  QC_SIDE_Z = 0,
  QC_SIDE_X = 1,
} QcSide;

typedef enum {
  QC_METHOD_HGP_DETERMINISTIC = 0,
  QC_METHOD_HGP_RANDOMIZED = 1,
  QC_METHOD_LP_WEAK = 2,
  QC_METHOD_LP_AMPLIFIED = 3,
} QcMethod;

typedef enum {
  QC_KIND_HGP = 0,
  QC_KIND_LP = 1,
} QcKind;

/**
 * Opaque code handle.
 */
typedef struct QcCode QcCode;

typedef struct {
  uint32_t kind;
  /**
   * Number of qubits.
   */
  size_t n;
  size_t ell;
  size_t lift;
  size_t z_syndrome_len;
  size_t x_syndrome_len;
  double lambda;
} QcParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *qc_last_error(void);

/**
 * Builds a code from a JSON config (null for defaults).
 *
 * # Safety
 * `config_json` is null or a NUL-terminated string; `out` is writable.
 */
QcStatus qc_code_build(const char *config_json, QcCode **out);

/**
 * Loads a code from bundle JSON, checking every stored ring form.
 *
 * # Safety
 * `bundle_json` is a NUL-terminated string; `out` is writable.
 */
QcStatus qc_code_load(const char *bundle_json, QcCode **out);

/**
 * # Safety
 * `code` is null or a live handle; it must not be used afterwards.
 */
void qc_code_free(QcCode *code);

/**
 * # Safety
 * `code` is a live handle; `out` is writable.
 */
QcStatus qc_code_params(const QcCode *code, QcParams *out);

/**
 * Writes the syndrome of `error` on `side`.
 *
 * # Safety
 * `code` is a live handle; the buffers hold the stated number of bytes.
 */
QcStatus qc_code_syndrome(const QcCode *code,
                          QcSide side,
                          const uint8_t *error,
                          size_t error_len,
                          uint8_t *syndrome,
                          size_t syndrome_len);

/**
 * Decodes a syndrome. `eps` applies to `LpAmplified`, `failure_delta` to the
 * randomized and amplified methods.
 *
 * # Safety
 * `code` is a live handle; the buffers hold the stated number of bytes;
 * `out_weight` is null or writable.
 */
QcStatus qc_code_decode(const QcCode *code,
                        QcSide side,
                        QcMethod method,
                        double eps,
                        double failure_delta,
                        uint64_t seed,
                        const uint8_t *syndrome,
                        size_t syndrome_len,
                        uint8_t *estimate,
                        size_t estimate_len,
                        size_t *out_weight);

/**
 * Sets `*same_coset` to whether `error + estimate` is a stabilizer of `side`.
 *
 * # Safety
 * `code` is a live handle; both buffers hold `len` bytes; `same_coset` is writable.
 */
QcStatus qc_code_coset_check(const QcCode *code,
                             QcSide side,
                             const uint8_t *error,
                             const uint8_t *estimate,
                             size_t len,
                             bool *same_coset);

/**
 * Serializes the code bundle. Free the string with `qc_string_free`.
 *
 * # Safety
 * `code` is a live handle; `out` is writable.
 */
QcStatus qc_code_to_json(const QcCode *code, char **out);

/**
 * # Safety
 * `s` is null or came from `qc_code_to_json`, and is freed once.
 */
void qc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCLDPC_H */
