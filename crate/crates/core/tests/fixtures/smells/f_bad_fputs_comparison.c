#include <stdio.h>

void smell(void) {
if (fputs("string", stdout) == 0)
    printf("fputs failed!\n");
}
