#ifndef QGAMEBOUND_H
#define QGAMEBOUND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QgbStatus {
  QGB_OK = 0,
  QGB_ERR_INVALID = 1,
  QGB_ERR_CAP = 2,
  QGB_ERR_NUMERICAL = 3,
  QGB_ERR_NULL_POINTER = 4,
  QGB_ERR_IO = 5,
  QGB_ERR_PANIC = 6,
} QgbStatus;

/**
 * Opaque game handle.
 */
typedef struct QgbGame QgbGame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the library.
 */
const char *qgb_last_error(void);

/**
 * Parse a game from its JSON description.
 *
 * # Safety
 *
 * `json` must be a valid NUL-terminated string; `out` must be writable.
 */
enum QgbStatus qgb_game_from_json(const char *json, struct QgbGame **out);

/**
 * CHSH with uniform questions and assistance dimension `assist_dim`; null if `assist_dim` is 0.
 */
struct QgbGame *qgb_game_chsh(size_t assist_dim);

/**
 * # Safety
 *
 * `game` must come from this library and not be freed twice; null is ignored.
 */
void qgb_game_free(struct QgbGame *game);

/**
 * Best classical winning probability by brute force.
 *
 * # Safety
 *
 * `game` must be a live handle and `out` writable.
 */
enum QgbStatus qgb_classical_value(const struct QgbGame *game, double *out);

/**
 * Upper bound from level `level` of the hierarchy. `method` is one of
 * "dense", "sym", "bose", "bose-reduced"; null selects "sym".
 *
 * # Safety
 *
 * `game` must be a live handle, `method` null or a valid string, `out` writable.
 */
enum QgbStatus qgb_upper_bound(const struct QgbGame *game,
                               size_t level,
                               const char *method,
                               double tol,
                               double *out);

/**
 * Upper bound plus a rounded, see-saw-polished strategy value at the same level.
 *
 * # Safety
 *
 * `game` must be a live handle, `method` null or a valid string, `upper`/`lower` writable.
 */
enum QgbStatus qgb_bounds(const struct QgbGame *game,
                          size_t level,
                          const char *method,
                          size_t seesaw_iters,
                          uint64_t seed,
                          double *upper,
                          double *lower);

/**
 * Hierarchy level whose de Finetti bound is at most `epsilon`.
 *
 * # Safety
 *
 * `game` must be a live handle and `out` writable.
 */
enum QgbStatus qgb_level_for_epsilon(const struct QgbGame *game,
                                     double epsilon,
                                     bool bose,
                                     uint64_t *out);

/**
 * Write one hierarchy level as an SDPA sparse file.
 *
 * # Safety
 *
 * `game` must be a live handle; `method` null or a valid string; `path` a valid string.
 */
enum QgbStatus qgb_export_sdpa(const struct QgbGame *game,
                               size_t level,
                               const char *method,
                               const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QGAMEBOUND_H */
