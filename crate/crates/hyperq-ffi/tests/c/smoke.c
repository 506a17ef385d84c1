#include <stdio.h>
#include "hyperq.h"

int main(void) {
    HyperqInstance *inst = NULL;
    char *report = NULL;
    HyperqStatus st = hyperq_instance_new("{\"name\":\"ex\",\"a\":[[1,0,0,-1],[0,1,-1,-1]]}", &inst);
    if (st != HYPERQ_STATUS_OK) {
        fprintf(stderr, "%s\n", hyperq_last_error());
        return 1;
    }
    st = hyperq_run(inst, "analyze", false, &report);
    if (report) {
        puts(report);
        hyperq_string_free(report);
    }
    hyperq_instance_free(inst);
    return st == HYPERQ_STATUS_OK ? 0 : 1;
}
