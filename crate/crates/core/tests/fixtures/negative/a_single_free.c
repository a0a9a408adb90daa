#include <stdlib.h>

void fixed(void) {
    char *data = (char *)malloc(100 * sizeof(char));
    free(data);
}
