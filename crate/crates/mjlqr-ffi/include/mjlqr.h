/* C interface to the mjlqr policy-optimization library. */

#ifndef MJLQR_H
#define MJLQR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Success.
#define MJLQR_OK 0

// The policy (or the zero policy a run started from) is not mean-square
// stabilizing.
#define MJLQR_ERR_STABILITY 1

// Malformed input: unparsable JSON, shape mismatches, null pointers.
#define MJLQR_ERR_INVALID 2

// Numerical failure: lost convergence, rejected steps, singular curvature.
#define MJLQR_ERR_NUMERICAL 3

// Opaque solution of the coupled Riccati equations.
typedef struct MjlqrCareSolution MjlqrCareSolution;

// Opaque problem instance.
typedef struct MjlqrProblem MjlqrProblem;

// Opaque optimizer trace.
typedef struct MjlqrTrace MjlqrTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread, or null if none has
// occurred. The pointer stays valid until the next failing call on the same
// thread.
const char *mjlqr_last_error_message(void);

// Parses a problem from a JSON document; on success stores a new handle in
// `*out`, to be released with [`mjlqr_problem_free`].
int mjlqr_problem_from_json(const char *json, struct MjlqrProblem **out);

// Releases a problem handle; a null pointer is ignored.
void mjlqr_problem_free(struct MjlqrProblem *problem);

// Writes the mode count, state dimension and input dimension of a problem.
int mjlqr_problem_dims(const struct MjlqrProblem *problem,
                       size_t *modes,
                       size_t *state_dim,
                       size_t *input_dim);

// Computes the expected infinite-horizon cost of the policy in `gains`
// (row-major, `modes * input_dim * state_dim` doubles).
int mjlqr_cost(const struct MjlqrProblem *problem, const double *gains, double *out);

// Computes the cost gradient at the policy in `gains`; the output buffer
// uses the same layout and length as the input.
int mjlqr_gradient(const struct MjlqrProblem *problem, const double *gains, double *out);

// Computes the lifted closed-loop spectral radius of the policy in `gains`;
// values below one (with margin) mean mean-square stability.
int mjlqr_spectral_radius(const struct MjlqrProblem *problem, const double *gains, double *out);

// Solves the coupled Riccati equations to relative tolerance `tol` within
// `max_iter` fixed-point iterations; on success stores a new handle in
// `*out`, to be released with [`mjlqr_care_free`].
int mjlqr_care_solve(const struct MjlqrProblem *problem,
                     double tol,
                     size_t max_iter,
                     struct MjlqrCareSolution **out);

// Releases a Riccati solution handle; a null pointer is ignored.
void mjlqr_care_free(struct MjlqrCareSolution *solution);

// Writes the optimal cost of a solved problem.
int mjlqr_care_cost(const struct MjlqrCareSolution *solution, double *out);

// Copies the optimal gains into `out` (row-major,
// `modes * input_dim * state_dim` doubles).
int mjlqr_care_gain(const struct MjlqrCareSolution *solution, double *out);

// Copies the optimal value matrices into `out` (row-major,
// `modes * state_dim * state_dim` doubles).
int mjlqr_care_value(const struct MjlqrCareSolution *solution, double *out);

// Runs an optimizer from the zero policy. `method` selects the update rule
// (0 gradient descent, 1 Gauss-Newton, 2 natural gradient); `eta <= 0`
// selects the certified step-size bound; the run stops when the gradient
// norm falls below `tol * (1 + cost)` or after `max_iter` iterations. On
// success stores a new handle in `*out`, to be released with
// [`mjlqr_trace_free`].
int mjlqr_optimize(const struct MjlqrProblem *problem,
                   int method,
                   double eta,
                   double tol,
                   size_t max_iter,
                   struct MjlqrTrace **out);

// Releases a trace handle; a null pointer is ignored.
void mjlqr_trace_free(struct MjlqrTrace *trace);

// Number of recorded iterates (the starting policy included). Returns 0 for
// a null handle.
size_t mjlqr_trace_len(const struct MjlqrTrace *trace);

// Copies row `index` of a trace. Outputs without a value (no ground truth,
// no certified bound) are written as NaN; null output pointers are skipped.
int mjlqr_trace_row(const struct MjlqrTrace *trace,
                    size_t index,
                    double *cost,
                    double *rel_err,
                    double *grad_norm2,
                    double *eta,
                    double *rate_bound,
                    double *rho_lifted);

// Copies the final iterate's gains into `out` (row-major,
// `modes * input_dim * state_dim` doubles).
int mjlqr_trace_final_gain(const struct MjlqrTrace *trace, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MJLQR_H */
