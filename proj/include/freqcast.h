#ifndef FREQCAST_H
#define FREQCAST_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* C surface for the forecasting / anomaly-detection toolkit. All functions
 * return a status code; on failure fqc_last_error() carries the message for
 * the calling thread. Strings returned through out-parameters are heap
 * allocated and must be released with fqc_string_free. */

typedef enum fqc_status {
    FQC_OK = 0,
    FQC_ERR_INVALID_ARGUMENT = 1,
    FQC_ERR_IO = 2,
    FQC_ERR_PARSE = 3,
    FQC_ERR_INTERNAL = 4
} fqc_status;

const char* fqc_version(void);

/* Message from the most recent failing call on this thread; never NULL. */
const char* fqc_last_error(void);

typedef struct fqc_config fqc_config;

fqc_status fqc_config_default(fqc_config** out);
fqc_status fqc_config_load(const char* path, fqc_config** out);
fqc_status fqc_config_from_json(const char* json_text, fqc_config** out);
void fqc_config_free(fqc_config* cfg);

fqc_status fqc_config_set_out_dir(fqc_config* cfg, const char* dir);
fqc_status fqc_config_set_seeds(fqc_config* cfg, const uint64_t* seeds, size_t n_seeds);
fqc_status fqc_config_set_alpha(fqc_config* cfg, double alpha);
/* mode: "global" or "rolling" */
fqc_status fqc_config_set_detect_mode(fqc_config* cfg, const char* mode);
/* key: "data", "checkpoint", "truth", "report" or "forecast" */
fqc_status fqc_config_set_path(fqc_config* cfg, const char* key, const char* value);

/* Full config JSON with every default materialized. */
fqc_status fqc_config_resolved_json(const fqc_config* cfg, char** out_json);

/* command: "synth", "train", "detect", "forecast", "evaluate" or "report".
 * Returns FQC_OK only when every artifact of the command was written.
 * out_summary may be NULL; otherwise it receives a one-line-per-seed
 * human-readable summary. */
fqc_status fqc_run(const fqc_config* cfg, const char* command, char** out_summary);

void fqc_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
