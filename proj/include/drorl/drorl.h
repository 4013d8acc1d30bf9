/*
 * C interface to the distributionally robust offline RL toolkit.
 *
 * Objects are opaque handles created by the library and released with the
 * matching *_free function. Every fallible call returns a drorl_status; on
 * failure drorl_last_error() describes the cause. The message is stored per
 * thread and stays valid until the next failing call on that thread.
 */
#ifndef DRORL_H
#define DRORL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(DRORL_BUILDING_LIBRARY)
#define DRORL_API __attribute__((visibility("default")))
#else
#define DRORL_API
#endif

typedef enum drorl_status {
    DRORL_OK = 0,
    DRORL_ERR_INVALID_ARGUMENT = 1, /* bad input value, shape or file contents */
    DRORL_ERR_IO = 2,               /* file could not be opened or written */
    DRORL_ERR_SOLVER = 3,           /* solver invariant violated */
    DRORL_ERR_INTERNAL = 4
} drorl_status;

typedef enum drorl_coverage {
    DRORL_COVERAGE_UNIFORM = 0,
    DRORL_COVERAGE_PARTIAL = 1
} drorl_coverage;

typedef enum drorl_method {
    DRORL_METHOD_DRO_HOEFFDING = 0,
    DRORL_METHOD_DRO_BERNSTEIN = 1,
    DRORL_METHOD_LCB = 2,
    DRORL_METHOD_NONROBUST = 3
} drorl_method;

typedef struct drorl_mdp drorl_mdp;
typedef struct drorl_dataset drorl_dataset;
typedef struct drorl_solution drorl_solution;

DRORL_API const char* drorl_last_error(void);
DRORL_API const char* drorl_status_string(drorl_status status);

/* ---- MDPs ------------------------------------------------------------- */

/* Garnet G(S, A) with uniform initial distribution. */
DRORL_API drorl_status drorl_mdp_garnet(size_t num_states, size_t num_actions, uint64_t seed,
                                        double gamma, drorl_mdp** out);
DRORL_API drorl_status drorl_mdp_load(const char* path, drorl_mdp** out);
DRORL_API drorl_status drorl_mdp_save(const drorl_mdp* mdp, const char* path);
DRORL_API drorl_status drorl_mdp_shape(const drorl_mdp* mdp, size_t* num_states,
                                       size_t* num_actions, double* gamma);
DRORL_API void drorl_mdp_free(drorl_mdp* mdp);

/* ---- Datasets --------------------------------------------------------- */

/* eta < 0 draws the partial-coverage action from `seed`; ignored for uniform. */
DRORL_API drorl_status drorl_dataset_sample(const drorl_mdp* mdp, drorl_coverage coverage,
                                            int64_t eta, size_t n, uint64_t seed,
                                            drorl_dataset** out);
DRORL_API drorl_status drorl_dataset_load(const char* path, drorl_dataset** out);
DRORL_API drorl_status drorl_dataset_save(const drorl_dataset* data, const char* path);
DRORL_API drorl_status drorl_dataset_shape(const drorl_dataset* data, size_t* size,
                                           size_t* num_states, size_t* num_actions);
DRORL_API drorl_status drorl_dataset_count(const drorl_dataset* data, size_t s, size_t a,
                                           uint64_t* out);
DRORL_API void drorl_dataset_free(drorl_dataset* data);

/* ---- Solving ---------------------------------------------------------- */

typedef struct drorl_solve_options {
    double delta;
    double gamma;
    double tol;
    double lcb_bonus_scale;
    int has_radius_override; /* nonzero: every DRO radius is radius_override */
    double radius_override;
} drorl_solve_options;

/* delta 0.1, gamma 0.95, tol 1e-6, bonus scale 1, no override. */
DRORL_API void drorl_solve_options_init(drorl_solve_options* options);

/* Accepts "dro-hoeffding" or "dro_hoeffding" style names. */
DRORL_API drorl_status drorl_method_from_name(const char* name, drorl_method* out);

DRORL_API drorl_status drorl_solve(const drorl_dataset* data, drorl_method method,
                                   const drorl_solve_options* options, drorl_solution** out);
DRORL_API drorl_status drorl_solution_load(const char* path, drorl_solution** out);
DRORL_API drorl_status drorl_solution_save(const drorl_solution* solution, const char* path);
DRORL_API drorl_status drorl_solution_info(const drorl_solution* solution, size_t* num_states,
                                           size_t* iterations, double* residual);
/* Copies min(len, S) entries. */
DRORL_API drorl_status drorl_solution_policy(const drorl_solution* solution, size_t* out,
                                             size_t len);
DRORL_API drorl_status drorl_solution_value(const drorl_solution* solution, double* out,
                                            size_t len);
DRORL_API void drorl_solution_free(drorl_solution* solution);

/* ---- Evaluation ------------------------------------------------------- */

/* V*(rho) - V^pi(rho) under the true MDP; V* computed at tol / 10. */
DRORL_API drorl_status drorl_suboptimality_gap(const drorl_mdp* mdp,
                                               const drorl_solution* solution, double tol,
                                               double* out);

/* min q^T v over the L1 ball of `radius` around p_hat intersected with the simplex. */
DRORL_API drorl_status drorl_support_function(const double* p_hat, const double* v, size_t n,
                                              double radius, double* out);

/* ---- Sweeps ----------------------------------------------------------- */

/* Runs the sweep in `config_path`, writing raw.csv and agg.csv. out_dir and
 * base_seed may be NULL to keep the config's values. */
DRORL_API drorl_status drorl_sweep(const char* config_path, const char* out_dir, unsigned jobs,
                                   const uint64_t* base_seed);

#ifdef __cplusplus
}
#endif

#endif /* DRORL_H */
