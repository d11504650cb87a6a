#include <doctest.h>

TEST_SUITE_BEGIN("metrics_io");
TEST_SUITE_END();
