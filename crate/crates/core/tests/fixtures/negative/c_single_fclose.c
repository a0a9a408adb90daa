#include <stdio.h>

void fixed(void) {
    FILE *data = freopen("f.txt", "w+", stdin);
    if (data == NULL)
        return;
    fclose(data);
}
