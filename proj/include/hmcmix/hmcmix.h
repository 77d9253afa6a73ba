/* C interface to the hmcmix sampling library. All functions return an
 * hmcmix_status; on failure hmcmix_last_error() describes the problem for
 * the calling thread. Handles are opaque and released with their _free
 * function; passing NULL to a _free function is a no-op. */
#ifndef HMCMIX_H
#define HMCMIX_H

#include <stddef.h>
#include <stdint.h>

#if defined(HMCMIX_BUILDING_LIBRARY)
#define HMCMIX_API __attribute__((visibility("default")))
#else
#define HMCMIX_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hmcmix_status {
  HMCMIX_OK = 0,
  HMCMIX_E_INVALID_ARGUMENT = 1,
  HMCMIX_E_INVALID_SPECTRUM = 2,
  HMCMIX_E_INVALID_BASIS = 3,
  HMCMIX_E_DIMENSION_MISMATCH = 4,
  HMCMIX_E_NUMERICAL_DIVERGENCE = 5,
  HMCMIX_E_DOMAIN = 6,
  HMCMIX_E_CONFIG = 7,
  HMCMIX_E_IO = 8,
  HMCMIX_E_PRECONDITION = 9,
  HMCMIX_E_SINGULAR_COVARIANCE = 10,
  HMCMIX_E_INTERNAL = 99
} hmcmix_status;

HMCMIX_API const char* hmcmix_version(void);
HMCMIX_API const char* hmcmix_status_name(hmcmix_status status);
/* Message of the last failed call on this thread; "" if none. */
HMCMIX_API const char* hmcmix_last_error(void);

/* ---- owned text -------------------------------------------------------- */

typedef struct hmcmix_text hmcmix_text;
HMCMIX_API const char* hmcmix_text_str(const hmcmix_text* text);
HMCMIX_API void hmcmix_text_free(hmcmix_text* text);

/* ---- targets ----------------------------------------------------------- */

typedef struct hmcmix_target hmcmix_target;

/* Gaussian with covariance U diag(sqrt_eigs)^2 U^T. `basis` is U in
 * row-major order (d*d entries) or NULL for the identity. */
HMCMIX_API hmcmix_status hmcmix_target_gaussian(const double* sqrt_eigs, size_t d,
                                                const double* basis,
                                                hmcmix_target** out);
/* Builds the target described by the [target] section of a config file. */
HMCMIX_API hmcmix_status hmcmix_target_from_config(const char* path,
                                                   hmcmix_target** out);
HMCMIX_API void hmcmix_target_free(hmcmix_target* target);
HMCMIX_API size_t hmcmix_target_dim(const hmcmix_target* target);
HMCMIX_API hmcmix_status hmcmix_target_constants(const hmcmix_target* target,
                                                 double* smoothness,
                                                 double* strong_convexity,
                                                 double* kappa);
HMCMIX_API hmcmix_status hmcmix_target_potential(const hmcmix_target* target,
                                                 const double* x, double* f);
HMCMIX_API hmcmix_status hmcmix_target_gradient(const hmcmix_target* target,
                                                const double* x, double* grad);

/* ---- tuning ------------------------------------------------------------ */

typedef enum hmcmix_start { HMCMIX_START_WARM = 0, HMCMIX_START_FEASIBLE = 1 } hmcmix_start;

typedef struct hmcmix_tune_request {
  int d;
  double kappa;
  double L;
  double L_H;
  double epsilon;
  double beta;
  hmcmix_start start;
  double constant_c;
  double k_multiplier;
  double c1; /* MALA constant */
  double c2; /* MRW constant */
} hmcmix_tune_request;

typedef struct hmcmix_param_choice {
  int K;
  double eta;
  int satisfies_conditions;
  char regime[32];
} hmcmix_param_choice;

HMCMIX_API void hmcmix_tune_request_default(hmcmix_tune_request* req);
/* sampler: "hmc", "hmcagg", "hmc_fixed", "mala" or "mrw". */
HMCMIX_API hmcmix_status hmcmix_tune(const hmcmix_tune_request* req, const char* sampler,
                                     hmcmix_param_choice* out);
/* Table of regime, K, eta and per-term condition slack. format: 0 human,
 * 1 key=value, 2 both. */
HMCMIX_API hmcmix_status hmcmix_tune_report(const hmcmix_tune_request* req,
                                            const char* sampler, int format,
                                            hmcmix_text** out);

/* ---- chains ------------------------------------------------------------ */

typedef enum hmcmix_sampler {
  HMCMIX_SAMPLER_MRW = 0,
  HMCMIX_SAMPLER_MALA = 1,
  HMCMIX_SAMPLER_HMC = 2
} hmcmix_sampler;

typedef struct hmcmix_chain_config {
  hmcmix_sampler sampler;
  double step;
  int leapfrog_steps;
  double laziness;
  uint64_t seed;
  int uncached_gradients; /* 1: 2K gradient evaluations per HMC proposal */
  double max_divergence_fraction;
} hmcmix_chain_config;

typedef struct hmcmix_counters {
  uint64_t grad_evals;
  uint64_t fn_evals;
  uint64_t divergences;
  uint64_t eval_count; /* K per non-lazy HMC iteration, 1 otherwise */
} hmcmix_counters;

typedef struct hmcmix_trace hmcmix_trace;

HMCMIX_API void hmcmix_chain_config_default(hmcmix_chain_config* cfg);
/* Draws a feasible start N(mode, I/L) into `out` (length d). */
HMCMIX_API hmcmix_status hmcmix_feasible_init(const hmcmix_target* target, uint64_t seed,
                                              double* out);
HMCMIX_API hmcmix_status hmcmix_run_chain(const hmcmix_target* target,
                                          const hmcmix_chain_config* cfg,
                                          const double* init, size_t n_iters,
                                          hmcmix_trace** out);
HMCMIX_API void hmcmix_trace_free(hmcmix_trace* trace);
HMCMIX_API size_t hmcmix_trace_iterations(const hmcmix_trace* trace);
/* State after `index` iterations (0 = init); writes d values. */
HMCMIX_API hmcmix_status hmcmix_trace_state(const hmcmix_trace* trace, size_t index,
                                            double* out);
HMCMIX_API hmcmix_status hmcmix_trace_accepted(const hmcmix_trace* trace, size_t index,
                                               int* accepted, int* lazy_hold);
HMCMIX_API hmcmix_status hmcmix_trace_counters(const hmcmix_trace* trace,
                                               hmcmix_counters* out);
/* accepted / non-lazy iterations; *defined = 0 when there were none. */
HMCMIX_API hmcmix_status hmcmix_trace_acceptance_rate(const hmcmix_trace* trace,
                                                      double* rate, int* defined);

/* ---- single run summary ------------------------------------------------ */

typedef struct hmcmix_run_options {
  char sampler[16]; /* hmc, hmcagg, mala, mrw */
  char start[16];   /* warm or feasible, used for tuning */
  size_t iterations;
  double step;        /* <= 0: tuned */
  int leapfrog_steps; /* <= 0: tuned */
  double laziness;
  uint64_t seed;
  double epsilon;
  double beta;
  double constant_c;
  double k_multiplier;
} hmcmix_run_options;

HMCMIX_API void hmcmix_run_options_default(hmcmix_run_options* opts);
/* Overlays the [run] section of a config file onto `opts`. */
HMCMIX_API hmcmix_status hmcmix_run_options_from_config(const char* path,
                                                        hmcmix_run_options* opts);
/* Runs one chain from the feasible start and summarizes it as key=value text. */
HMCMIX_API hmcmix_status hmcmix_run_summary(const hmcmix_target* target,
                                            const hmcmix_run_options* opts,
                                            hmcmix_text** out);

/* ---- scaling experiment ------------------------------------------------ */

typedef struct hmcmix_experiment hmcmix_experiment;

typedef void (*hmcmix_progress_fn)(const char* sampler, int d, int repeat,
                                   int mixed, double eval_count, void* user);

HMCMIX_API hmcmix_status hmcmix_experiment_from_config(const char* path,
                                                       hmcmix_experiment** out);
HMCMIX_API hmcmix_status hmcmix_experiment_from_text(const char* text,
                                                     hmcmix_experiment** out);
HMCMIX_API void hmcmix_experiment_free(hmcmix_experiment* exp);
HMCMIX_API hmcmix_status hmcmix_experiment_set_seed(hmcmix_experiment* exp, uint64_t seed);
HMCMIX_API hmcmix_status hmcmix_experiment_set_output_dir(hmcmix_experiment* exp,
                                                          const char* dir);
HMCMIX_API hmcmix_status hmcmix_experiment_set_workers(hmcmix_experiment* exp, int workers);
HMCMIX_API hmcmix_status hmcmix_experiment_set_constant_c(hmcmix_experiment* exp, double c);
HMCMIX_API hmcmix_status hmcmix_experiment_run(hmcmix_experiment* exp,
                                               hmcmix_progress_fn progress, void* user);
/* Writes raw.csv, fits.csv and manifest.txt into `dir` (NULL: the spec's
 * output_dir). Requires a completed run. */
HMCMIX_API hmcmix_status hmcmix_experiment_emit(const hmcmix_experiment* exp,
                                                const char* dir);
/* *available = 0 when the fit was refused (fewer than 3 usable points). */
HMCMIX_API hmcmix_status hmcmix_experiment_fit(const hmcmix_experiment* exp,
                                               const char* sampler, double* slope,
                                               double* stderr_slope, size_t* n_points,
                                               int* available);
/* Mean eval_count over mixed repeats at dimension d; *available = 0 if none. */
HMCMIX_API hmcmix_status hmcmix_experiment_mean_evals(const hmcmix_experiment* exp,
                                                      const char* sampler, int d,
                                                      double* mean, int* available);
/* name: "raw.csv", "fits.csv", "manifest.txt" or "warnings". */
HMCMIX_API hmcmix_status hmcmix_experiment_text(const hmcmix_experiment* exp,
                                                const char* name, hmcmix_text** out);

/* ---- theory checks ----------------------------------------------------- */

typedef struct hmcmix_theory_report hmcmix_theory_report;

typedef struct hmcmix_check_info {
  const char* name;
  size_t instances;
  size_t failures;
  double worst_margin;
  const char* failing_instance; /* "" when none failed */
  const char* note;
} hmcmix_check_info;

HMCMIX_API hmcmix_status hmcmix_theory_run(int quick, uint64_t seed, double strict_c,
                                           hmcmix_theory_report** out);
HMCMIX_API void hmcmix_theory_free(hmcmix_theory_report* report);
HMCMIX_API int hmcmix_theory_passed(const hmcmix_theory_report* report);
HMCMIX_API size_t hmcmix_theory_check_count(const hmcmix_theory_report* report);
/* Strings in `out` stay valid until the report is freed. */
HMCMIX_API hmcmix_status hmcmix_theory_check(const hmcmix_theory_report* report,
                                             size_t index, hmcmix_check_info* out);
HMCMIX_API hmcmix_status hmcmix_theory_text(const hmcmix_theory_report* report,
                                            hmcmix_text** out);

#ifdef __cplusplus
}
#endif

#endif /* HMCMIX_H */
