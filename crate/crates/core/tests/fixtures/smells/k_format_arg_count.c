#include <stdio.h>

void smell(void) {
printf("%s %s\n", "one");
}
