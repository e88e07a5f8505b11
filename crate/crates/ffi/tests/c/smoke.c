#include <math.h>
#include <stdio.h>
#include <string.h>

#include "lpiso.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            const char *msg = lpiso_last_error();                     \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,   \
                    #cond, msg ? msg : "no message");                 \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    CHECK(lpiso_abi_version() == LPISO_ABI_VERSION);

    double breaks[] = {0.0, 0.5, 1.0};
    double values[] = {3.0, 4.0, 0.0, 0.0};
    LpisoStepFn *f = NULL;
    CHECK(lpiso_step_new(2, breaks, 3, values, &f) == LPISO_STATUS_OK);
    CHECK(lpiso_step_dim(f) == 2);

    double norm = 0.0;
    CHECK(lpiso_step_norm(f, 2.0, 2.0, &norm) == LPISO_STATUS_OK);
    CHECK(fabs(norm - sqrt(12.5)) < 1e-15);
    CHECK(lpiso_step_norm(f, INFINITY, INFINITY, &norm) == LPISO_STATUS_OK);
    CHECK(norm == 4.0);

    const char *swap =
        "{\"p\":2.0,\"xspec\":{\"dim\":2,\"q\":2.0},"
        "\"phi\":[{\"src\":[0.0,0.5],\"dst\":[0.5,1.0]},{\"src\":[0.5,1.0],\"dst\":[0.0,0.5]}],"
        "\"sigma\":{\"breaks\":[0.0,1.0],\"isoms\":[{\"perm\":[1,0],\"signs\":[1,-1]}]}}";
    LpisoLamperti *t = NULL;
    CHECK(lpiso_lamperti_from_json(swap, &t) == LPISO_STATUS_OK);
    LpisoStepFn *g = NULL;
    CHECK(lpiso_lamperti_apply(t, f, &g) == LPISO_STATUS_OK);
    double v[2];
    CHECK(lpiso_step_eval(g, 0.75, v, 2) == LPISO_STATUS_OK);
    CHECK(v[0] == 4.0 && v[1] == -3.0);
    CHECK(lpiso_step_eval(g, 0.75, v, 1) == LPISO_STATUS_BUFFER_TOO_SMALL);

    char *json = NULL;
    CHECK(lpiso_step_to_json(g, &json) == LPISO_STATUS_OK);
    CHECK(strstr(json, "\"dim\":2") != NULL);
    lpiso_string_free(json);

    LpisoStepFn *bad = NULL;
    CHECK(lpiso_step_from_json("{\"dim\":1}", &bad) == LPISO_STATUS_PARSE_ERROR);
    CHECK(lpiso_last_error() != NULL);
    CHECK(lpiso_lamperti_apply(NULL, f, &g) == LPISO_STATUS_NULL_POINTER);

    lpiso_step_free(g);
    lpiso_lamperti_free(t);
    lpiso_step_free(f);
    puts("ok");
    return 0;
}
