#include <stdio.h>

void fixed(void) {
    printf("%d\n", 5);
    printf("%s\n", "five");
}
