#include <stdio.h>
#include "wavemix.h"

int main(void) {
    WmParams p = wm_params_default();
    WmState *state = NULL;
    if (wm_steady_state(&p, &state) != WM_STATUS_OK) {
        return 1;
    }
    WmObservables obs;
    double pops[2];
    if (wm_state_observables(state, &obs) != WM_STATUS_OK ||
        wm_state_dark_populations(state, pops, 2) != WM_STATUS_OK) {
        wm_state_free(state);
        return 2;
    }
    printf("%.6e %.6e %d %.6f\n", obs.n_photon, obs.p33, obs.has_g2_zero, pops[0]);
    wm_state_free(state);

    if (wm_steady_state(NULL, &state) != WM_STATUS_NULL_POINTER) {
        return 3;
    }
    char msg[64];
    wm_last_error_message(msg, sizeof msg);
    printf("%s\n", msg);
    return 0;
}
