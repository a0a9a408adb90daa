#include <stdio.h>
#include <string.h>

void fixed(void) {
    char string2[] = "a/b";
    size_t index = strcspn(string2, "/");
    printf("%zu\n", index);
}
