#ifndef SPECTRA_CAPI_H
#define SPECTRA_CAPI_H

/* C interface to the spectral analysis core. All entry points return a
 * status code; 0 means success. Output strings are heap-allocated and must
 * be released with spectra_string_free. On any non-zero status the
 * per-thread message from spectra_last_error explains what happened.
 *
 * Status 100 is special: the computation finished and every output argument
 * is populated, but the model assumption / edge regularity checks failed.
 * Callers that only care about the artifacts can treat it as success. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SPECTRA_OK 0
#define SPECTRA_EC_VALIDATION 1   /* malformed numeric inputs */
#define SPECTRA_EC_CONFIG 2       /* config text / schema problems */
#define SPECTRA_EC_DOMAIN 3       /* argument outside the mathematical domain */
#define SPECTRA_EC_NUMERIC 4      /* iteration caps, non-convergence */
#define SPECTRA_EC_STRUCTURE 5    /* unsupported bulk-structure shape */
#define SPECTRA_EC_PRECONDITION 6 /* API misuse (null handles, bad order) */
#define SPECTRA_EC_IO 7           /* file system problems */
#define SPECTRA_EC_INTERNAL 99    /* unexpected exception */
#define SPECTRA_EC_ASSUMPTION 100 /* finished, but assumption checks failed */

typedef struct spectra_model spectra_model;

/* Library version, static storage. */
const char* spectra_version(void);

/* Message describing the most recent failure on this thread ("" after a
 * success). Storage is thread-local; do not free. */
const char* spectra_last_error(void);

/* Builds a model from JSON text: either a bare model object
 * {"bulk": ..., "spikes": [...], "M": ..., "N": ...} or a full experiment
 * config carrying a "model" key. */
int spectra_model_from_json(const char* json_text, spectra_model** out);

void spectra_model_free(spectra_model* model);

/* options_json for the calls below is an experiment config (the "model" key
 * is ignored — the handle wins), a sections-only object such as
 * {"analyze": {...}, "simulate": {...}}, NULL, or "{}" for defaults. */

/* Deterministic pipeline: bulk structure, regularity and assumption reports,
 * spike classification, outlier predictions, sticking bounds. */
int spectra_analyze(const spectra_model* model, const char* options_json,
                    char** report_json);

/* CSV "E,rho" over the configured grid (default 1000 points on
 * [0, 1.1 * top edge]). */
int spectra_density(const spectra_model* model, const char* options_json,
                    char** csv);

/* Monte Carlo verification: JSON report plus per-spike replicate rows
 * "replicate,component,rank,mu,lambda,overlap". */
int spectra_simulate(const spectra_model* model, const char* options_json,
                     char** report_json, char** rows_csv);

/* Shrinkage of an observed spectrum under the configured loss. eigenvalues
 * may be NULL with n 0, in which case the values come from the config's
 * "shrink" section (inline array or CSV file). Outputs: CSV
 * "index,mu,method,l,c2,beta" and a JSON summary. */
int spectra_shrink(const spectra_model* model, const double* eigenvalues, int n,
                   const char* options_json, char** csv, char** summary_json);

/* Same, but reads the "oracle" section and fixes the loss to
 * "Frobenius-oracle" (Stieltjes-based bulk values, plug-in outlier values). */
int spectra_oracle(const spectra_model* model, const double* eigenvalues, int n,
                   const char* options_json, char** csv, char** summary_json);

void spectra_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* SPECTRA_CAPI_H */
