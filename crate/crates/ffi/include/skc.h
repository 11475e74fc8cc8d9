#ifndef SKC_H
#define SKC_H

#include <stddef.h>
#include <stdint.h>

/**
 * Result codes shared by every function.
 */
typedef enum SkcStatus {
  SKC_STATUS_OK = 0,
  SKC_STATUS_NULL_POINTER = 1,
  SKC_STATUS_INVALID_ARGUMENT = 2,
  SKC_STATUS_GATE_SET = 3,
  SKC_STATUS_NET = 4,
  SKC_STATUS_NUMERICAL = 5,
  SKC_STATUS_IO = 6,
  SKC_STATUS_PARSE = 7,
  SKC_STATUS_PANIC = 8,
} SkcStatus;

/**
 * Depth-admission mode for [`skc_compile`].
 */
typedef enum SkcMode {
  SKC_MODE_CALIBRATED = 0,
  SKC_MODE_STRICT = 1,
} SkcMode;

/**
 * Instruction set handle.
 */
typedef struct SkcGateSet SkcGateSet;

/**
 * Basic approximation net handle.
 */
typedef struct SkcNet SkcNet;

/**
 * Gate indices produced by [`skc_compile`] in product order: the
 * approximation is `gates[0] * gates[1] * ...`.
 * Release with [`skc_sequence_free`].
 */
typedef struct SkcSequence {
  uint32_t *gates;
  size_t len;
  double measured_eps;
} SkcSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *skc_last_error(void);

/**
 * Library version as a static string.
 */
const char *skc_version(void);

/**
 * Built-in Clifford+T set.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SkcStatus skc_gateset_clifford_t(struct SkcGateSet **out);

/**
 * Parses a gate-set JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SkcStatus skc_gateset_from_json(const char *json, struct SkcGateSet **out);

/**
 * Loads a gate-set JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SkcStatus skc_gateset_load(const char *path, struct SkcGateSet **out);

/**
 * Matrix dimension, or 0 for a null handle.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
size_t skc_gateset_dim(const struct SkcGateSet *set);

/**
 * Number of gates including added inverses, or 0 for a null handle.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
size_t skc_gateset_len(const struct SkcGateSet *set);

/**
 * Name of gate `index`, to be released with [`skc_string_free`].
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum SkcStatus skc_gateset_gate_name(const struct SkcGateSet *set, size_t index, char **out);

/**
 * # Safety
 * `set` must be null or a handle not yet freed.
 */
void skc_gateset_free(struct SkcGateSet *set);

/**
 * Enumerates the net of all reduced words up to length `l0`. The net is
 * unaudited; call [`skc_net_audit`] before compiling.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum SkcStatus skc_net_build(const struct SkcGateSet *set, size_t l0, struct SkcNet **out);

/**
 * Measures the covering radius over `samples` Haar-random targets and
 * stores it on the net. `eps0` may be null.
 *
 * # Safety
 * `net` must be a live handle; `eps0` null or valid.
 */
enum SkcStatus skc_net_audit(struct SkcNet *net, size_t samples, uint64_t seed, double *eps0);

/**
 * Measured eps0, or NaN if the net is unaudited or null.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
double skc_net_eps0(const struct SkcNet *net);

/**
 * Number of net entries, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t skc_net_len(const struct SkcNet *net);

/**
 * Copy of the instruction set the net was built over.
 *
 * # Safety
 * `net` must be a live handle and `out` a valid pointer.
 */
enum SkcStatus skc_net_gateset(const struct SkcNet *net, struct SkcGateSet **out);

/**
 * # Safety
 * `net` must be a live handle and `path` a NUL-terminated string.
 */
enum SkcStatus skc_net_save(const struct SkcNet *net, const char *path);

/**
 * Loads a net file, including the gate set embedded in it.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SkcStatus skc_net_load(const char *path, struct SkcNet **out);

/**
 * # Safety
 * `net` must be null or a handle not yet freed.
 */
void skc_net_free(struct SkcNet *net);

/**
 * Compiles the `dim x dim` unitary `matrix` (row-major, real and imaginary
 * parts interleaved, `2 * dim * dim` doubles) at recursion depth `depth`.
 * The target is projected into the special unitary group first.
 * `threshold <= 0` keeps the default calibrated eps0 threshold.
 *
 * # Safety
 * `net` must be a live handle, `matrix` must point to `2 * dim * dim`
 * doubles and `out` must be valid.
 */
enum SkcStatus skc_compile(const struct SkcNet *net,
                           const double *matrix,
                           size_t dim,
                           size_t depth,
                           enum SkcMode mode,
                           double threshold,
                           struct SkcSequence *out);

/**
 * # Safety
 * `seq` must be null or filled by [`skc_compile`] and not yet freed.
 */
void skc_sequence_free(struct SkcSequence *seq);

/**
 * Gate names of `seq` separated by spaces, in product order, or in
 * application order when `circuit_order != 0`. Release with [`skc_string_free`].
 *
 * # Safety
 * `set` must be a live handle, `seq` a filled sequence and `out` valid.
 */
enum SkcStatus skc_format_sequence(const struct SkcGateSet *set,
                                   const struct SkcSequence *seq,
                                   int circuit_order,
                                   char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void skc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKC_H */
