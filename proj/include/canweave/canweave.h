/* SPDX-License-Identifier: Apache-2.0 */
/*
 * canweave C API.
 *
 * Every function returns a cw_status; on failure cw_last_error() describes
 * the problem for the calling thread. Strings returned through `char **`
 * parameters are owned by the caller and released with cw_string_free().
 */
#ifndef CANWEAVE_CANWEAVE_H
#define CANWEAVE_CANWEAVE_H

#include <stddef.h>

#if defined(CANWEAVE_BUILDING_LIBRARY)
#define CW_API __attribute__((visibility("default")))
#else
#define CW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cw_status {
  CW_OK = 0,
  CW_ERR_INVALID_ARGUMENT = 1,
  CW_ERR_IO = 2,
  CW_ERR_PARSE = 3,
  CW_ERR_SHAPE = 4,
  CW_ERR_NUMERIC = 5,
  CW_ERR_INTERNAL = 6
} cw_status;

typedef struct cw_spec cw_spec;
typedef struct cw_model cw_model;

CW_API const char *cw_version(void);
CW_API const char *cw_status_name(cw_status status);
/* Message of the most recent failure on this thread; "" when none. */
CW_API const char *cw_last_error(void);
CW_API void cw_string_free(char *text);

/* Run description: subcommand, training settings, inputs and out-dir. */
CW_API cw_status cw_spec_create(const char *command, cw_spec **out);
CW_API void cw_spec_destroy(cw_spec *spec);
CW_API cw_status cw_spec_set(cw_spec *spec, const char *key, const char *value);
CW_API cw_status cw_spec_get(const cw_spec *spec, const char *key, char **value);
/* Applies every `key = value` line of a config file. */
CW_API cw_status cw_spec_load_config(cw_spec *spec, const char *path);
/* Sets the seed from CANWEAVE_SEED when present. */
CW_API cw_status cw_spec_apply_env(cw_spec *spec);
CW_API cw_status cw_spec_validate(const cw_spec *spec);
/* Resolved spec in config-file form. */
CW_API cw_status cw_spec_render(const cw_spec *spec, char **text);

/* Runs the subcommand; `summary` (may be NULL) receives a JSON line. */
CW_API cw_status cw_run(const cw_spec *spec, char **summary);

CW_API cw_status cw_model_load(const char *checkpoint, cw_model **out);
CW_API void cw_model_free(cw_model *model);
/* domain: "source" or "target". probabilities: NULL or room for 2. */
CW_API cw_status cw_model_predict(const cw_model *model, const char *text, const char *domain, int *label,
                                  double *probabilities);
CW_API cw_status cw_model_vocabulary_size(const cw_model *model, size_t *size);

#ifdef __cplusplus
}
#endif

#endif
