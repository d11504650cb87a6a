#include <doctest.h>

TEST_SUITE_BEGIN("particle_filter");
TEST_SUITE_END();
