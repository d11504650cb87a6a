#include <doctest.h>

TEST_SUITE_BEGIN("filter");
TEST_SUITE_END();
