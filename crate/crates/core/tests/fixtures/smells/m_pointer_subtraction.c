#include <stdio.h>
#include <string.h>

void smell(void) {
char string1[] = "a/b";
char string2[] = "a/b";
char *slash = strchr(string1, '/');
printf("%ld\n", slash - string2);
}
