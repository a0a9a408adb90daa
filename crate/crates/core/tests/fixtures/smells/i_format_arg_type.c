#include <stdio.h>

void smell(void) {
printf("%s\n", 5);
}
