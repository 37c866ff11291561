/* newsrank: market-movement prediction over daily news headlines, with the
 * trained attention weights reused as a global headline relevance ranking.
 *
 * The library is consumed through this C interface: opaque handles, integer
 * status codes, and strings the caller releases with nr_string_free. Every
 * function is safe to call from multiple threads as long as each handle is
 * used from one thread at a time; error messages are per-thread.
 */
#ifndef NEWSRANK_H
#define NEWSRANK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nr_status {
    NR_OK = 0,
    NR_ERROR = 1,         /* unexpected internal failure */
    NR_INVALID_INPUT = 2, /* bad arguments, files, or configuration */
    NR_TRAIN_FAILED = 3   /* training diverged or could not run */
} nr_status;

const char* nr_version(void);

/* Message of this thread's most recent failure; empty string before any. */
const char* nr_last_error(void);

/* Frees any string returned through a char** out parameter. */
void nr_string_free(char* s);

/* ---- configuration ----------------------------------------------------- */

typedef struct nr_config nr_config;

/* Starts from built-in defaults. Never fails; free with nr_config_free. */
nr_config* nr_config_create(void);

/* Overlays a JSON config file; unknown keys are errors. */
nr_status nr_config_load_file(nr_config* config, const char* path);

/* Sets one key. The value uses JSON spelling; bare strings are accepted. */
nr_status nr_config_set(nr_config* config, const char* key, const char* value);

/* Canonical JSON snapshot of the effective configuration. */
nr_status nr_config_dump(const nr_config* config, char** out_json);

void nr_config_free(nr_config* config);

/* ---- pipeline stages --------------------------------------------------- */
/* Each stage reads its inputs from the config, writes its artifacts plus a
 * manifest under the configured out_dir, and reports a JSON summary. */

/* prices + headlines -> labeled, subsampled, split dataset */
nr_status nr_run_ingest(const nr_config* config, char** out_summary_json);

/* dataset -> selected model checkpoint + epoch log */
nr_status nr_run_train(const nr_config* config, char** out_summary_json);

/* checkpoint + dataset -> global ranking + concentration report */
nr_status nr_run_score(const nr_config* config, char** out_summary_json);

/* dataset -> per-category accuracy table (plus "all"); rows without data
 * are marked absent */
nr_status nr_run_eval(const nr_config* config, char** out_table_json);

/* Two "blind_id TAB label" files over the same ids -> Cohen's kappa. */
nr_status nr_run_agreement(const char* labels_a_path, const char* labels_b_path,
                           char** out_json);

/* ---- direct scoring ---------------------------------------------------- */

typedef struct nr_model nr_model;

nr_status nr_model_open(const char* checkpoint_path, nr_model** out_model);

/* Headline vector width the model expects. */
size_t nr_model_dim(const nr_model* model);

/* Relevance score of one encoded headline. category indexes the fixed
 * category list; pass the unclassified index when unknown. */
nr_status nr_model_score(const nr_model* model, const double* vector, size_t vector_len,
                         size_t category, double* out_score);

/* Tokenizes and encodes raw text with the hashed encoder recorded in the
 * checkpoint; fails for models trained on precomputed embeddings. category
 * is a name ("business", ...) or NULL for unclassified. */
nr_status nr_model_score_text(const nr_model* model, const char* text, const char* category,
                              double* out_score);

void nr_model_free(nr_model* model);

#ifdef __cplusplus
}
#endif

#endif /* NEWSRANK_H */
