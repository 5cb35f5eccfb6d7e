#ifndef MOO_RANK_H
#define MOO_RANK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum MooComparison {
  MOO_COMPARISON_GREATER = 0,
  MOO_COMPARISON_GREATER_EQ = 1,
  MOO_COMPARISON_LESS = 2,
  MOO_COMPARISON_LESS_EQ = 3,
  MOO_COMPARISON_EQUAL = 4,
} MooComparison;

typedef enum MooStatus {
  MOO_STATUS_OK = 0,
  MOO_STATUS_NULL_POINTER = 1,
  MOO_STATUS_INVALID_ARGUMENT = 2,
  MOO_STATUS_EVALUATION_FAILED = 3,
  MOO_STATUS_GRID_TOO_LARGE = 4,
  MOO_STATUS_DATA_ERROR = 5,
  MOO_STATUS_OUT_OF_RANGE = 6,
  MOO_STATUS_PANIC = 7,
} MooStatus;

// A constrained multi-objective problem.
typedef struct MooProblem MooProblem;

// A reported Pareto front with its run trace.
typedef struct MooResult MooResult;

// Parameters of a DO-NSGA-II run. A negative `p_m` selects `1/n`.
typedef struct MooRunParams {
  size_t population_size;
  size_t generations;
  double p_c;
  double eta_c;
  double p_m;
  double eta_m;
  double boosted_p_m;
  size_t epoch;
  uint64_t seed;
  double change_tol;
  bool parallel;
} MooRunParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null after a
// successful call. The pointer stays valid until the next call into this
// library on the same thread.
const char *moo_last_error_message(void);

// Creates the ZDT1 benchmark with `n` variables.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum MooStatus moo_problem_zdt1(size_t n, struct MooProblem **out);

// Creates the article problem over a KNN surrogate of `rows` synthetic
// observations generated from `data_seed`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum MooStatus moo_problem_synthetic_article(uint64_t data_seed,
                                             size_t rows,
                                             size_t knn_k,
                                             struct MooProblem **out);

// Creates the article problem over a KNN surrogate fitted on a dataset CSV.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer to
// writable storage for one handle.
enum MooStatus moo_problem_from_dataset(const char *path, size_t knn_k, struct MooProblem **out);

// Adds `objective <op> threshold` as a constraint. With `log10_scale` the
// threshold is compared against `log10` of the objective's natural units.
//
// # Safety
// `problem` must be a live handle and `objective` a NUL-terminated string.
enum MooStatus moo_problem_add_threshold(struct MooProblem *problem,
                                         const char *objective,
                                         enum MooComparison op,
                                         double threshold,
                                         bool log10_scale);

// Number of design variables, or 0 for a null handle.
//
// # Safety
// `problem` must be null or a live handle.
size_t moo_problem_num_variables(const struct MooProblem *problem);

// Number of objectives, or 0 for a null handle.
//
// # Safety
// `problem` must be null or a live handle.
size_t moo_problem_num_objectives(const struct MooProblem *problem);

// Evaluates one design. Objectives are written in their natural sense.
//
// # Safety
// `design` must point to `n` readable values, `objectives_out` to `m`
// writable values and `violation_out` to one writable value.
enum MooStatus moo_problem_evaluate(const struct MooProblem *problem,
                                    const double *design,
                                    size_t n,
                                    double *objectives_out,
                                    size_t m,
                                    double *violation_out);

// Releases a problem. Null is ignored.
//
// # Safety
// `problem` must be null or a handle not yet freed.
void moo_problem_free(struct MooProblem *problem);

// Method defaults: K = 500, E = 500, P_c = 0.9, eta_c = 15, P_m = 1/n,
// eta_m = 1, boosted P_m = 1.0 for 10 generations.
struct MooRunParams moo_run_params_default(void);

// Runs DO-NSGA-II on a static problem. The hypervolume trace is measured
// on raw minimization-sense objectives against (2, 2).
//
// # Safety
// `problem` must be a live handle, `params` null or valid, and `out` a
// valid pointer to writable storage for one handle.
enum MooStatus moo_run_nsga2(const struct MooProblem *problem,
                             const struct MooRunParams *params,
                             struct MooResult **out);

// Exhaustive grid search with `inc` percent steps over the problem bounds.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer to writable
// storage for one handle.
enum MooStatus moo_run_grid_search(const struct MooProblem *problem,
                                   double inc,
                                   struct MooResult **out);

// Number of front members, or 0 for a null handle.
//
// # Safety
// `result` must be null or a live handle.
size_t moo_result_front_size(const struct MooResult *result);

// # Safety
// `result` must be null or a live handle.
size_t moo_result_num_variables(const struct MooResult *result);

// # Safety
// `result` must be null or a live handle.
size_t moo_result_num_objectives(const struct MooResult *result);

// False when no feasible solution was found and the front is a
// best-effort set of infeasible solutions.
//
// # Safety
// `result` must be null or a live handle.
bool moo_result_feasible(const struct MooResult *result);

// Objective evaluations performed by the run.
//
// # Safety
// `result` must be null or a live handle.
size_t moo_result_evaluations(const struct MooResult *result);

// Copies front member `index`: its design (`n` values), natural-sense
// objectives (`m` values) and total violation.
//
// # Safety
// `result` must be a live handle and the output pointers must address
// `n`, `m` and one writable values respectively.
enum MooStatus moo_result_solution(const struct MooResult *result,
                                   size_t index,
                                   double *design_out,
                                   size_t n,
                                   double *objectives_out,
                                   size_t m,
                                   double *violation_out);

// Length of the per-generation hypervolume trace (0 for grid search).
//
// # Safety
// `result` must be null or a live handle.
size_t moo_result_history_len(const struct MooResult *result);

// Copies the hypervolume trace into `out`, which must hold exactly
// `moo_result_history_len` values.
//
// # Safety
// `result` must be a live handle and `out` must address `len` writable
// values.
enum MooStatus moo_result_history(const struct MooResult *result, double *out, size_t len);

// Releases a result. Null is ignored.
//
// # Safety
// `result` must be null or a handle not yet freed.
void moo_result_free(struct MooResult *result);

// Exact hypervolume of `count` minimization points (row-major pairs)
// against `(ref_x, ref_y)`.
//
// # Safety
// `points` must address `2 * count` readable values and `out` one
// writable value.
enum MooStatus moo_hypervolume_2d(const double *points,
                                  size_t count,
                                  double ref_x,
                                  double ref_y,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOO_RANK_H */
