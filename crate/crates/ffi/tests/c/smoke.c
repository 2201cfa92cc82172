#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "malaria_focp.h"

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            const char *e = mf_last_error();                               \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
                    e ? e : "no message");                                 \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    double g = 0.0;
    CHECK(mf_gamma(5.0, &g) == MF_STATUS_OK && g == 24.0);

    double e = 0.0;
    CHECK(mf_mittag_leffler(1.0, -1.0, &e) == MF_STATUS_OK);
    CHECK(fabs(e - exp(-1.0)) < 1e-12);
    CHECK(mf_mittag_leffler(1.5, -1.0, &e) == MF_STATUS_INVALID_ARGUMENT);

    MfScenario *s = mf_scenario_new_default();
    CHECK(mf_scenario_set_grid(s, 20.0, 200) == MF_STATUS_OK);
    CHECK(mf_scenario_set_param(s, "no_such_rate", 1.0) == MF_STATUS_INVALID_ARGUMENT);

    MfSolution *sol = NULL;
    CHECK(mf_solve(s, 0.95, 7, &sol) == MF_STATUS_OK);
    size_t n = mf_solution_len(sol);
    CHECK(n == 201);
    double *ih = malloc(n * sizeof(double));
    CHECK(mf_solution_channel(sol, MF_CHANNEL_IH, ih, n) == MF_STATUS_OK);
    CHECK(ih[0] == 200.0);
    CHECK(mf_solution_channel(sol, MF_CHANNEL_IH, ih, n - 1) == MF_STATUS_BUFFER_TOO_SMALL);
    CHECK(mf_solution_converged(sol));
    printf("J = %.6f after %zu iterations\n", mf_solution_objective(sol), mf_solution_iterations(sol));

    free(ih);
    mf_solution_free(sol);
    mf_scenario_free(s);
    return 0;
}
