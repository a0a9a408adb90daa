#include <stdio.h>

void smell(void) {
FILE *f = fopen("file.txt", "w+");
fclose(f);
}
