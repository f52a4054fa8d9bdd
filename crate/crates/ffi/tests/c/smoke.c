#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "posygp.h"

static const char *PROBLEM =
    "{\"name\":\"amgm\",\"variables\":[\"x\"],"
    "\"objective\":{\"terms\":[{\"coef\":1,\"exponents\":{\"x\":1}},"
    "{\"coef\":1,\"exponents\":{\"x\":-1}}]}}";

int main(void) {
    PgpProblem *p = NULL;
    if (pgp_problem_from_json(PROBLEM, &p) != PGP_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", pgp_last_error_message());
        return 1;
    }
    PgpResult *r = NULL;
    if (pgp_solve(p, PGP_SCENARIO_MID, NULL, &r) != PGP_STATUS_OK) {
        fprintf(stderr, "solve: %s\n", pgp_last_error_message());
        return 1;
    }
    double x[1];
    if (pgp_result_primal(r, x, 1) != PGP_STATUS_OK) return 1;
    printf("Z=%.12f x=%.12f verdict=%d\n", pgp_result_dual_value(r), x[0], (int)pgp_result_verdict(r));
    int ok = fabs(pgp_result_dual_value(r) - 2.0) < 1e-10 && fabs(x[0] - 1.0) < 1e-8 &&
             pgp_result_verdict(r) == PGP_VERDICT_CERTIFIED;
    pgp_result_free(r);

    PgpProblem *bad = NULL;
    if (pgp_problem_from_json("{\"name\":1}", &bad) != PGP_STATUS_PARSE_ERROR || bad != NULL) ok = 0;
    if (pgp_last_error_message() == NULL) ok = 0;

    pgp_problem_free(p);
    return ok ? 0 : 2;
}
