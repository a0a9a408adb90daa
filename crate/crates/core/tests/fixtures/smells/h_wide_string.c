#include <wchar.h>

void smell(void) {
wprintf(L"%ls\n", L"string");
}
