#ifndef ROBUSTQS_H
#define ROBUSTQS_H

/* C interface to the quasi-sure analysis library. All functions are
 * re-entrant; a model handle must not be shared across threads without
 * external locking. Strings returned through out-parameters are owned by
 * the caller and released with rqs_free. */

#ifdef __cplusplus
extern "C" {
#endif

enum {
    RQS_OK = 0,       /* computed; the report carries the verdict */
    RQS_INVALID = 2,  /* malformed input, unusable flags, or domain errors */
    RQS_INTERNAL = 3  /* a verified invariant failed; the build is defective */
};

typedef struct rqs_model rqs_model;

const char* rqs_version(void);

/* Releases a buffer returned through any char** out-parameter. */
void rqs_free(char* buffer);

/* Runs one command with CLI semantics. argv holds the tokens after the
 * program name, e.g. {"price", "--model", "m.json", "--payoff", "call"}.
 * *out receives the report (JSON or CSV), *err a one-line diagnostic when
 * the exit status is nonzero; either may be NULL to discard that stream.
 * Returns the process exit status. */
int rqs_run(int argc, const char* const* argv, char** out, char** err);

/* Parses and validates a model file held in memory. mode is "exact" or
 * "float". On success *out receives a handle. On failure *err receives
 * the located issue list, one per line. */
int rqs_model_parse(const char* bytes, const char* mode, rqs_model** out, char** err);

/* Like rqs_model_parse, reading the file at path. */
int rqs_model_open(const char* path, const char* mode, rqs_model** out, char** err);

/* Serializes a model back to the file schema. The bytes are deterministic
 * and reload to an identical model. */
int rqs_model_render(const rqs_model* model, char** out);

void rqs_model_close(rqs_model* model);

#ifdef __cplusplus
}
#endif

#endif
