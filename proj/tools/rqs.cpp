#include <stdio.h>

#include "robustqs.h"

int main(int argc, char** argv) {
    char* out = NULL;
    char* err = NULL;
    int code = rqs_run(argc - 1, (const char* const*)(argv + 1), &out, &err);
    if (out) {
        fputs(out, stdout);
        rqs_free(out);
    }
    if (err) {
        fputs(err, stderr);
        rqs_free(err);
    }
    return code;
}
