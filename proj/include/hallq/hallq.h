#ifndef HALLQ_H
#define HALLQ_H

/* C interface to the hallq library. Every call returns a status code; on
   failure hq_last_error() describes the problem (thread-local, valid until the
   next failing call on the same thread). Strings returned through char**
   belong to the caller and are released with hq_string_free. */

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HQ_API __declspec(dllexport)
#else
#define HQ_API __attribute__((visibility("default")))
#endif

typedef int hq_status;

#define HQ_OK 0
#define HQ_ERR_CONFIG 2    /* invalid input or validation failure */
#define HQ_ERR_NUMERICAL 3 /* gap collapse, non-convergence */
#define HQ_ERR_INTERNAL 4
#define HQ_ERR_ARGUMENT 5  /* null pointer or out-of-range argument */

typedef struct hq_model hq_model;

HQ_API const char* hq_version(void);
HQ_API const char* hq_last_error(void);
HQ_API void hq_string_free(char* s);

/* Built-in recipe on an L x L torus. params_json may be NULL or an object of
   numbers; Q < 0 selects the recipe's sector; backend is "auto",
   "many_body" or "quadratic" (NULL means "auto"). */
HQ_API hq_status hq_model_create(const char* recipe, int L, const char* params_json, int Q, const char* backend,
                                 hq_model** out);
/* Custom model from its JSON description. */
HQ_API hq_status hq_model_from_json(const char* model_json, const char* backend, hq_model** out);
HQ_API void hq_model_free(hq_model* m);

HQ_API hq_status hq_model_dim(const hq_model* m, int* dim);
HQ_API hq_status hq_model_validate(const hq_model* m, int* pass, char** report_json);
HQ_API hq_status hq_model_ground(const hq_model* m, double theta_x, double theta_y, double* E0, double* gap);
HQ_API hq_status hq_model_curvature(const hq_model* m, double theta_x, double theta_y, double* g);
HQ_API hq_status hq_model_chern(const hq_model* m, int grid_n, int workers, double* chern);

/* Experiment runner. */
HQ_API hq_status hq_config_defaults(char** json_out);
HQ_API hq_status hq_config_resolve(const char* config_json, const char* const* overrides, int n_overrides,
                                   char** resolved_out);
HQ_API hq_status hq_config_hash(const char* resolved_json, char** hash_out);
/* Runs the resolved config; exit_code receives 0, 2 or 3 as the experiment
   outcome. Returns HQ_OK whenever a record was written. */
HQ_API hq_status hq_run(const char* resolved_json, const char* out_dir, int workers, char** record_json_out,
                        int* exit_code);
HQ_API hq_status hq_report(const char* dir, char** table_out, int* attention);

#ifdef __cplusplus
}
#endif

#endif
