#include <stdio.h>
#include <string.h>
#include "radius_lab.h"

int main(void) {
    RlSpace *s = NULL;
    if (rl_space_parse("lp:p=4,dim=2", &s) != RL_STATUS_OK) return 1;
    double x[2] = {1.0, 1.0};
    double v = 0.0;
    if (rl_space_eval_norm(s, x, 2, &v) != RL_STATUS_OK) return 2;
    RlCertificate *c = NULL;
    double pts[4] = {0.0, 0.0, 2.0, 0.0};
    if (rl_radius_center(s, pts, 2, 2, 1e-10, 2000, &c) != RL_STATUS_OK) return 3;
    double r = rl_certificate_radius(c);
    rl_certificate_free(c);
    rl_space_free(s);
    if (rl_space_parse("bogus", &s) != RL_STATUS_CONFIG || s != NULL) return 4;
    if (strlen(rl_last_error_message()) == 0) return 5;
    printf("%.12f %.12f %s\n", v, r, rl_version());
    return 0;
}
