/* bodyio C API.
 *
 * Every function returns a bfio_status. On failure, bfio_last_error()
 * describes the most recent error raised on the calling thread. Strings
 * handed out by the library are released with bfio_string_free(); handles
 * with their matching *_free function. Passing NULL to a free function is a
 * no-op.
 */
#ifndef BODYIO_BODYIO_H
#define BODYIO_BODYIO_H

#include <stddef.h>
#include <stdint.h>

#if defined(BFIO_BUILDING_LIBRARY)
#define BFIO_API __attribute__((visibility("default")))
#else
#define BFIO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes, except ARGUMENT, which exits with 2. */
typedef enum bfio_status {
  BFIO_OK = 0,
  BFIO_ERR_ARGUMENT = 1,
  BFIO_ERR_CONFIG = 2,
  BFIO_ERR_DATA = 3,
  BFIO_ERR_NUMERICAL = 4,
  BFIO_ERR_INTERNAL = 5
} bfio_status;

typedef enum bfio_log_level { BFIO_LOG_INFO = 0, BFIO_LOG_WARNING = 1 } bfio_log_level;

typedef struct bfio_config bfio_config;
typedef struct bfio_filter bfio_filter;

typedef void (*bfio_log_fn)(bfio_log_level level, const char* message, void* user);

BFIO_API const char* bfio_version(void);
BFIO_API const char* bfio_last_error(void);
BFIO_API void bfio_string_free(char* s);

/* Process-wide log sink; NULL silences the library. */
BFIO_API void bfio_set_log_handler(bfio_log_fn fn, void* user);

/* ---- configuration ---- */

BFIO_API bfio_status bfio_config_new(bfio_config** out);
BFIO_API bfio_status bfio_config_parse(const char* json, bfio_config** out);
BFIO_API bfio_status bfio_config_load(const char* path, bfio_config** out);
BFIO_API void bfio_config_free(bfio_config* cfg);

/* `value` is JSON; a bare word is taken as a string. */
BFIO_API bfio_status bfio_config_set(bfio_config* cfg, const char* key, const char* value);
BFIO_API bfio_status bfio_config_set_seed(bfio_config* cfg, uint64_t seed);
BFIO_API bfio_status bfio_config_seed(const bfio_config* cfg, uint64_t* out);
BFIO_API bfio_status bfio_config_validate(const bfio_config* cfg);
BFIO_API bfio_status bfio_config_dump(const bfio_config* cfg, char** out_json);
/* "key = value" lines for a comma-separated list of sections. */
BFIO_API bfio_status bfio_config_describe(const bfio_config* cfg, const char* sections,
                                          char** out_text);

/* ---- subcommands ---- */

BFIO_API bfio_status bfio_simulate(const bfio_config* cfg, const char* out_dir);
/* `corrector` may be NULL (identity corrector from the config). */
BFIO_API bfio_status bfio_deadreckon(const bfio_config* cfg, const char* seq_dir,
                                     const char* corrector, const char* out_csv);
BFIO_API bfio_status bfio_train_corrector(const bfio_config* cfg, const char* corpus,
                                          const char* out_path);
/* `report_csv` may be NULL. */
BFIO_API bfio_status bfio_train_motion(const bfio_config* cfg, const char* corpus,
                                       const char* out_path, const char* report_csv);
/* `motion_model` and `corrector` may be NULL where the config allows. */
BFIO_API bfio_status bfio_run_ekf(const bfio_config* cfg, const char* seq_dir,
                                  const char* motion_model, const char* corrector,
                                  const char* out_csv);
/* `out_csv` and `out_text` may be NULL. */
BFIO_API bfio_status bfio_eval(const bfio_config* cfg, const char* corpus,
                               const char* estimates_dir, const char* out_csv,
                               char** out_text);
BFIO_API bfio_status bfio_analyze(const bfio_config* cfg, const char* corpus,
                                  const char* const* models, size_t n_models,
                                  const char* out_csv);

/* ---- streaming filter ---- */

typedef struct bfio_nav_state {
  double t;
  double p[3];
  double q[4]; /* w, x, y, z; body to world */
  double v[3];
  double b_a[3];
  double b_g[3];
  double trace_p;
} bfio_nav_state;

/* Provider from cfg ekf.provider ("network" needs `motion_model`; "oracle"
 * is unavailable here). `x0->t` is ignored. */
BFIO_API bfio_status bfio_filter_new(const bfio_config* cfg, const char* motion_model,
                                     const char* corrector, const bfio_nav_state* x0,
                                     bfio_filter** out);
BFIO_API void bfio_filter_free(bfio_filter* f);
/* Queues one sample; `n_ready` receives the number of states waiting. */
BFIO_API bfio_status bfio_filter_push(bfio_filter* f, double t, const double w[3],
                                      const double a[3], size_t* n_ready);
BFIO_API bfio_status bfio_filter_flush(bfio_filter* f, size_t* n_ready);
/* Oldest waiting state; BFIO_ERR_ARGUMENT when none is waiting. */
BFIO_API bfio_status bfio_filter_pop(bfio_filter* f, bfio_nav_state* out);

#ifdef __cplusplus
}
#endif

#endif /* BODYIO_BODYIO_H */
