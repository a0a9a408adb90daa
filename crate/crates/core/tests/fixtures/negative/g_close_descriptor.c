#include <fcntl.h>
#include <unistd.h>

void fixed(void) {
    int f = open("file.txt", O_RDWR | O_CREAT, S_IREAD | S_IWRITE);
    close(f);
}
