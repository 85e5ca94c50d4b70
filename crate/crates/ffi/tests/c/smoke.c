#include <stdio.h>
#include <string.h>
#include "distrisk.h"

static const char *X =
    "{\"pieces\":[{\"t0\":0,\"t1\":0.85,\"v0\":0,\"v1\":0},{\"t0\":0.85,\"t1\":1,\"v0\":0.5,\"v1\":3.5}]}";
static const char *ES90 = "{\"builtin\":\"es\",\"p\":0.9}";
static const char *ES50 = "{\"builtin\":\"es\",\"p\":0.5}";
static const char *K = "{\"intervals\":[[0.0,0.3],[0.7,1.0]]}";

int main(void) {
    DistriskRv *x = NULL;
    DistriskDistortion *h = NULL;
    DistriskDistortion *h2 = NULL;
    DistriskSet *k = NULL;
    double v = 0.0;
    bool found = false;
    DistriskRv *cx = NULL, *cy = NULL;

    if (distrisk_rv_from_json(X, &x) != DISTRISK_STATUS_OK) return 1;
    if (distrisk_distortion_from_json(ES90, &h) != DISTRISK_STATUS_OK) return 2;
    if (distrisk_distortion_from_json(ES50, &h2) != DISTRISK_STATUS_OK) return 2;
    if (distrisk_set_from_json(K, &k) != DISTRISK_STATUS_OK) return 3;
    if (distrisk_choquet(h, x, &v) != DISTRISK_STATUS_OK || v < 2.5 - 1e-9 || v > 2.5 + 1e-9) return 4;
    if (distrisk_counterexample(h2, k, 1, &found, &cx, &cy) != DISTRISK_STATUS_OK || !found) return 5;
    const DistriskRv *pair[2] = {cx, cy};
    bool conc = false;
    if (distrisk_is_k_concentrated(pair, 2, k, &conc) != DISTRISK_STATUS_OK || !conc) return 6;
    if (distrisk_quantile(x, 1.5, false, &v) != DISTRISK_STATUS_DOMAIN) return 7;
    if (distrisk_last_error() == NULL || strlen(distrisk_last_error()) == 0) return 8;
    printf("ok %s\n", distrisk_version());
    distrisk_rv_free(cx);
    distrisk_rv_free(cy);
    distrisk_rv_free(x);
    distrisk_distortion_free(h);
    distrisk_distortion_free(h2);
    distrisk_set_free(k);
    return 0;
}
