#include <doctest.h>

TEST_SUITE_BEGIN("qbp");
TEST_SUITE_END();
