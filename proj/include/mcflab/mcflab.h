#ifndef MCFLAB_H
#define MCFLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MCF_API __declspec(dllexport)
#else
#define MCF_API __attribute__((visibility("default")))
#endif

typedef enum {
  MCF_OK = 0,
  MCF_INVALID_ARGUMENT = 1,
  MCF_PRECONDITION = 2,
  MCF_NUMERICAL = 3,
  MCF_IO = 4,
  MCF_PARSE = 5,
  MCF_UNSUPPORTED = 6,
  MCF_INTERNAL = 100
} mcf_status;

typedef struct mcf_config mcf_config;
typedef struct mcf_surface mcf_surface;
typedef struct mcf_run mcf_run;

/* Message for the last failed call on this thread; "" when none. */
MCF_API const char* mcf_last_error(void);
MCF_API const char* mcf_version(void);
/* Frees strings returned through char** out-parameters. */
MCF_API void mcf_string_free(char* s);

/* Config */
MCF_API mcf_status mcf_config_default(mcf_config** out);
MCF_API mcf_status mcf_config_parse_text(const char* text, mcf_config** out);
MCF_API mcf_status mcf_config_parse_file(const char* path, mcf_config** out);
/* Sets one key as if written under [section] in a config file. */
MCF_API mcf_status mcf_config_set(mcf_config* cfg, const char* section, const char* key, const char* value);
MCF_API mcf_status mcf_config_serialize(const mcf_config* cfg, char** out);
/* out must hold 17 bytes. */
MCF_API mcf_status mcf_config_hash(const mcf_config* cfg, char* out);
MCF_API void mcf_config_free(mcf_config* cfg);

/* Surfaces built from the [scenario] section */
MCF_API mcf_status mcf_surface_build(const mcf_config* cfg, mcf_surface** out);
MCF_API mcf_status mcf_surface_node_count(const mcf_surface* s, size_t* out);
MCF_API mcf_status mcf_surface_dimension(const mcf_surface* s, int* out);
MCF_API mcf_status mcf_surface_area(const mcf_surface* s, double* out);
/* Per-node H and |A|^2; both arrays need node_count entries (either may be NULL). */
MCF_API mcf_status mcf_surface_curvature(const mcf_surface* s, int m_max, double* mean_curvature, double* norm_A_sq);
/* Integrated |Ao|^2 over the surface. */
MCF_API mcf_status mcf_surface_int_traceless_sq(const mcf_surface* s, double* out);
MCF_API void mcf_surface_free(mcf_surface* s);

/* In-memory flow run. The callback gets (step, t, sup |A|^2) and returns 0 to stop. */
typedef int (*mcf_progress_fn)(long step, double t, double sup_A_sq, void* user);
MCF_API mcf_status mcf_run_flow(const mcf_config* cfg, mcf_progress_fn progress, void* user, mcf_run** out);
/* extinction | blow_up | steady | max_steps */
MCF_API const char* mcf_run_cause(const mcf_run* run);
MCF_API size_t mcf_run_record_count(const mcf_run* run);
/* key is any series.csv column name. */
MCF_API mcf_status mcf_run_series_value(const mcf_run* run, size_t index, const char* key, double* out);
MCF_API mcf_status mcf_run_singular_time(const mcf_run* run, double* T_est, int* determined);
MCF_API mcf_status mcf_run_final_surface(const mcf_run* run, mcf_surface** out);
MCF_API void mcf_run_free(mcf_run* run);

/* Commands. Return process exit codes: 0 clean, 2 invariant violated, 1 error.
   Logs go to stderr; quiet suppresses progress output. */
MCF_API int mcf_cmd_run(const char* config_path, const char* out_dir, int quiet, int seed_set, uint64_t seed);
MCF_API int mcf_cmd_sweep(const char* config_path, const char* key, const double* values, size_t count,
                          const char* out_dir, int quiet, int seed_set, uint64_t seed);
/* config_path may be NULL for the default battery. */
MCF_API int mcf_cmd_check(const char* config_path, const char* out_dir, int quiet);
MCF_API int mcf_cmd_export(const char* run_dir, const char* format);

#ifdef __cplusplus
}
#endif

#endif
