#include <fcntl.h>
#include <stdio.h>
#include <sys/stat.h>

void smell(void) {
int f = open("file.txt",
             O_RDWR | O_CREAT,
             S_IREAD | S_IWRITE);
fclose((FILE *)f);
}
