/* Exact-mode NARMA2 run through the C API. */
#include <stdio.h>
#include "qreservoir.h"

#define M 100

static int check(QrStatus s) {
    if (s != QR_STATUS_OK) {
        fprintf(stderr, "error %d: %s\n", (int)s, qr_last_error_message());
        return 1;
    }
    return 0;
}

int main(void) {
    double u[M], y[M], pred[M], err;
    QrNoiseProfile *profile = NULL;
    QrReservoir *res = NULL;
    QrFeatures *feat = NULL;
    QrWeights *w = NULL;

    if (check(qr_gen_input(2.11, 3.73, 4.11, 100.0, 0.1, 0, u, M))) return 1;
    if (check(qr_gen_narma(2, u, M, y))) return 1;
    if (check(qr_profile_load("preset:strong-dense", 4, &profile))) return 1;
    if (check(qr_reservoir_new(4, 5.0, profile, 0, 1, &res))) return 1;
    if (check(qr_reservoir_run(res, u, M, &feat))) return 1;
    if (check(qr_fit_regression(feat, y, M, 11, 80, &w))) return 1;
    if (check(qr_predict(w, feat, pred, M))) return 1;
    if (check(qr_nmse(pred, y, M, 81, 100, &err))) return 1;
    printf("qreservoir %s nmse %.3e\n", qr_version(), err);

    qr_weights_free(w);
    qr_features_free(feat);
    qr_reservoir_free(res);
    qr_profile_free(profile);
    return 0;
}
