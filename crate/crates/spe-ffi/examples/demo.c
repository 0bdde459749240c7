/* Minimal C consumer of the spe library.
 *
 * Build (from the workspace root, after `cargo build -p spe-ffi`):
 *
 *   cc -std=c99 -Wall -Wextra -I crates/spe-ffi/include \
 *      crates/spe-ffi/examples/demo.c \
 *      -L target/debug -lspe_ffi -lm -o demo
 *   LD_LIBRARY_PATH=target/debug ./demo
 *
 * Link against target/debug/libspe_ffi.a instead for a static build
 * (add -lpthread -ldl on some platforms).
 */

#include <assert.h>
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "spe.h"

int main(void) {
    printf("spe %s\n", spe_version());

    /* Closed-form CHSH S at the maximal-violation angle. */
    double s = 0.0;
    assert(spe_theory_s(0.7853981633974483, 0.0, 0.95, &s) == SPE_STATUS_OK);
    printf("theory S(pi/4, 0, 0.95) = %.15f\n", s);
    assert(fabs(s - 2.687005768508881) < 1e-12);

    /* Failed calls return a status and leave a message behind. */
    assert(spe_theory_s(0.5, 2.0, 0.95, &s) == SPE_STATUS_INVALID_ARGUMENT);
    printf("expected failure: %s\n", spe_last_error_message());

    /* Run a full Monte Carlo sweep from a built-in preset. */
    SpeConfig *cfg = NULL;
    assert(spe_config_from_preset("laser", &cfg) == SPE_STATUS_OK);
    assert(spe_config_set_seed(cfg, 20260823) == SPE_STATUS_OK);

    SpeSweep *sweep = NULL;
    assert(spe_sweep_run(cfg, &sweep) == SPE_STATUS_OK);
    spe_config_free(cfg);

    size_t n = 0;
    assert(spe_sweep_len(sweep, &n) == SPE_STATUS_OK);
    double max_s = 0.0;
    for (size_t i = 0; i < n; i++) {
        SpeSweepPoint p;
        assert(spe_sweep_point(sweep, i, &p) == SPE_STATUS_OK);
        if (p.s > max_s) max_s = p.s;
    }
    printf("sweep: %zu points, max S = %.4f\n", n, max_s);
    assert(max_s > 2.0); /* the preset must show a CHSH violation */

    /* Results serialize to the same JSON the CLI writes. */
    char *json = NULL;
    assert(spe_sweep_to_json(sweep, &json) == SPE_STATUS_OK);
    printf("json length: %zu bytes\n", strlen(json));
    spe_string_free(json);
    spe_sweep_free(sweep);

    puts("demo passed");
    return 0;
}
