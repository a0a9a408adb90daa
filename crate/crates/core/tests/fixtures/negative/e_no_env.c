#include <stdio.h>

void fixed(const char *path) {
    printf("%s\n", path);
}
