#include <stdlib.h>

void smell(void) {
char *data =
  (char *)malloc(100*sizeof(char));
data++;
free(data);
}
