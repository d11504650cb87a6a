#include <doctest.h>

TEST_SUITE_BEGIN("lifting");
TEST_SUITE_END();
