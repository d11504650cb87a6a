#include <doctest.h>

TEST_SUITE_BEGIN("plot");
TEST_SUITE_END();
