#include <stdlib.h>

void smell(void) {
char *data =
  (char *)malloc(100*sizeof(char));
free(data);
free(data);
}
