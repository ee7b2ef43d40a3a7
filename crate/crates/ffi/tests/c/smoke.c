#include <math.h>
#include <stdio.h>
#include "renyi_sim.h"

static int check(int ok, const char *what) {
    if (!ok) fprintf(stderr, "FAIL: %s\n", what);
    return ok ? 0 : 1;
}

int main(void) {
    int failures = 0;
    double r2 = 0.0;
    failures += check(rs_exact_r2(0.0, &r2) == RS_STATUS_OK && fabs(r2 - 1.0) < 1e-12, "exact r2 at U=0");

    RsLoweringInfo info;
    failures += check(rs_lower_gate(RS_GATE_KIND_C_SWAP, NULL, 0, 1, 1, 1, &info) == RS_STATUS_OK, "lower cswap");
    failures += check(info.entangling_count == 7 && info.single_qubit_count == 14, "cswap counts");

    RsState *s = NULL;
    failures += check(rs_state_new_zero(2, &s) == RS_STATUS_OK, "new state");
    size_t q[2] = {0, 1};
    rs_state_apply_gate(s, RS_GATE_KIND_H, q, 1, NULL, 0);
    rs_state_apply_gate(s, RS_GATE_KIND_CNOT, q, 2, NULL, 0);
    double purity = 0.0;
    rs_state_purity(s, &purity);
    failures += check(fabs(purity - 0.5) < 1e-12, "bell purity");

    size_t bad[2] = {0, 7};
    failures += check(rs_state_apply_gate(s, RS_GATE_KIND_CNOT, bad, 2, NULL, 0) == RS_STATUS_OUT_OF_RANGE, "range error");
    failures += check(rs_last_error_message() != NULL, "error message");
    rs_state_free(s);

    if (failures == 0) printf("ok %s\n", rs_version());
    return failures;
}
