#include <doctest.h>

TEST_SUITE_BEGIN("sdp");
TEST_SUITE_END();
