#include <math.h>
#include <stdio.h>
#include "fraclab.h"

int main(void) {
    FraclabFunction *f = NULL;
    if (fraclab_function_from_json("{\"family\": \"constant\", \"d\": 1, \"value\": 1.0}", &f) != FRACLAB_STATUS_OK)
        return 1;
    FraclabParams *p = fraclab_params_new(1);
    fraclab_params_set(p, "q", 2.0);
    double v = 0.0, e = 0.0;
    if (fraclab_target_norm(f, p, 1.0, &v, &e) != FRACLAB_STATUS_OK || fabs(v - sqrt(2.0)) > 1e-12)
        return 2;
    double l = 0.0, r = 0.0;
    if (fraclab_balance(p, "ordinary", 0, &l, &r) != FRACLAB_STATUS_VALIDATION || fraclab_last_error() == NULL)
        return 3;
    fraclab_params_free(p);
    fraclab_function_free(f);
    printf("ok\n");
    return 0;
}
