#include <stdio.h>

void fixed(void) {
    printf("%s %s\n", "one", "two");
}
