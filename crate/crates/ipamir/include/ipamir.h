#ifndef XORHS_IPAMIR_H
#define XORHS_IPAMIR_H

#include <stdbool.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

const char *ipamir_signature(void);
void *ipamir_init(void);
void ipamir_release(void *solver);

/* Adds a literal to the current hard clause; 0 finalizes it. */
void ipamir_add_hard(void *solver, int32_t lit_or_zero);
/* As above; when is_xor is set on the finalizing 0, the clause becomes the
 * XOR of its literals, required to be true. */
void ipamir_add_hard_xor(void *solver, int32_t lit_or_zero, bool is_xor);

/* Soft unit clause (lit): weight is paid when lit is false. Repeated calls
 * for the same literal add up. A zero weight puts the solver in error. */
void ipamir_add_soft_lit(void *solver, int32_t lit, uint64_t weight);

/* Assumption for the next ipamir_solve call only. */
void ipamir_assume(void *solver, int32_t lit);

/* 30 optimal, 20 unsatisfiable, 10 interrupted with a model,
 * 0 interrupted without one, 40 error. */
int ipamir_solve(void *solver);

uint64_t ipamir_val_obj(void *solver);
/* lit when true, -lit when false, 0 without a model. */
int32_t ipamir_val_lit(void *solver, int32_t lit);

/* Polled between SAT calls; a nonzero return stops the search. */
void ipamir_set_terminate(void *solver, void *state, int (*terminate)(void *state));

#ifdef __cplusplus
}

inline void ipamir_add_hard(void *solver, int32_t lit_or_zero, bool is_xor) {
    ipamir_add_hard_xor(solver, lit_or_zero, is_xor);
}
#endif

#endif
