/* C interface of the quantour directional quantile regression library. */

#ifndef QUANTOUR_H
#define QUANTOUR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum qt_status {
  QT_OK = 0,
  QT_NULL_POINTER = 1,
  QT_INVALID_UTF8 = 2,
  QT_IO_ERROR = 3,
  QT_PARSE_ERROR = 4,
  QT_INVALID_ARGUMENT = 5,
  QT_FIT_ERROR = 6,
  QT_PANIC = 7,
} qt_status;

typedef enum qt_player {
  QT_PLAYER_FEDERER = 0,
  QT_PLAYER_DJOKOVIC = 1,
  QT_PLAYER_NADAL = 2,
} qt_player;

typedef enum qt_surface {
  QT_SURFACE_HARD = 0,
  QT_SURFACE_CLAY = 1,
  QT_SURFACE_GRASS = 2,
} qt_surface;

typedef enum qt_tournament {
  QT_TOURNAMENT_OTHERS = 0,
  QT_TOURNAMENT_GRAND_SLAM = 1,
  QT_TOURNAMENT_FINALS = 2,
  QT_TOURNAMENT_MASTERS = 3,
} qt_tournament;

/**
 * A completed directional fit (opaque).
 */
typedef struct qt_model_fit qt_model_fit;

/**
 * An owned observation table (opaque).
 */
typedef struct qt_observations qt_observations;

/**
 * Chain and model settings for [`qt_fit`]; obtain defaults with
 * [`qt_fit_options_default`] and override fields as needed.
 */
typedef struct qt_fit_options {
  /**
   * Quantile magnitude in (0,1).
   */
  double tau;
  /**
   * Number of grid directions (>= 3).
   */
  uint64_t directions;
  uint64_t burn_in;
  /**
   * Post-burn-in iterations.
   */
  uint64_t iterations;
  /**
   * Keep every n-th draw; must divide `iterations`.
   */
  uint64_t thin;
  double prior_var;
  double sigma_shape;
  double sigma_scale;
  uint64_t seed;
  /**
   * Parallel workers; 0 means all cores.
   */
  uint64_t jobs;
} qt_fit_options;

/**
 * A covariate combination; reference values are Federer / loss / hard /
 * others / not top-20.
 */
typedef struct qt_profile {
  enum qt_player player;
  bool win;
  enum qt_surface surface;
  enum qt_tournament tournament;
  bool top20;
} qt_profile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version string; static storage, do not free.
 */
const char *qt_version(void);

/**
 * Message of the last failure on this thread; valid until the next failing
 * call on the same thread. Never null.
 */
const char *qt_last_error(void);

/**
 * Default fit options: tau 0.25, 180 directions, burn-in 10000, 100000
 * iterations thinned by 100, N(0, 100) coefficient prior, IG(0.01, 0.01)
 * scale prior.
 */
struct qt_fit_options qt_fit_options_default(void);

/**
 * Reads an observation table (CSV as written by `quantour ingest`).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid destination; on
 * QT_OK the handle must be released with [`qt_observations_free`].
 */
enum qt_status qt_observations_read_csv(const char *path, struct qt_observations **out);

/**
 * Number of observations in the table; 0 for a null handle.
 *
 * # Safety
 * `obs` must be null or a live handle from [`qt_observations_read_csv`].
 */
size_t qt_observations_len(const struct qt_observations *obs);

/**
 * # Safety
 * `obs` must be a handle from [`qt_observations_read_csv`], not yet freed.
 */
void qt_observations_free(struct qt_observations *obs);

/**
 * Fits the directional quantile regression on an observation table.
 *
 * # Safety
 * `obs` must be a live observations handle; `options` and `out` must be
 * valid; on QT_OK release the fit with [`qt_fit_free`].
 */
enum qt_status qt_fit(const struct qt_observations *obs,
                      const struct qt_fit_options *options,
                      struct qt_model_fit **out);

/**
 * Serializes a fit to JSON; free the string with [`qt_string_free`].
 *
 * # Safety
 * `fit` must be a live fit handle and `json_out` a valid destination.
 */
enum qt_status qt_fit_to_json(const struct qt_model_fit *fit, char **json_out);

/**
 * Restores a fit from JSON produced by [`qt_fit_to_json`] or the CLI.
 *
 * # Safety
 * `json` must be NUL-terminated; on QT_OK free the handle with
 * [`qt_fit_free`].
 */
enum qt_status qt_fit_from_json(const char *json, struct qt_model_fit **out);

/**
 * # Safety
 * `fit` must be a handle from [`qt_fit`] or [`qt_fit_from_json`].
 */
void qt_fit_free(struct qt_model_fit *fit);

/**
 * Computes the quantile-region polygon for a covariate profile.
 *
 * Writes an interleaved vertex buffer `x0, y0, x1, y1, …` (counterclockwise)
 * and its length in doubles. An empty region yields a null buffer and
 * length 0 with QT_OK. Free the buffer with [`qt_vertices_free`].
 *
 * # Safety
 * All pointers must be valid; `fit` must be a live fit handle.
 */
enum qt_status qt_quantile_region(const struct qt_model_fit *fit,
                                  const struct qt_profile *profile,
                                  bool original_units,
                                  double **vertices_out,
                                  size_t *len_out);

/**
 * # Safety
 * `vertices`/`len` must come from [`qt_quantile_region`], not yet freed.
 */
void qt_vertices_free(double *vertices, size_t len);

/**
 * # Safety
 * `s` must be a string returned by this library, not yet freed.
 */
void qt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUANTOUR_H */
