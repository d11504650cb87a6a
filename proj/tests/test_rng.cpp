#include <doctest.h>

#include <cmath>

#include "ncpf/rng.hpp"

using namespace ncpf;

TEST_SUITE_BEGIN("rng");

// Philox4x32-10 known-answer vectors (counter/key laid out as
// ctr = {c_lo, c_hi, stream_lo, stream_hi}, key = {seed_lo, seed_hi}).
TEST_CASE("philox known answer vectors") {
  {
    const auto b = RngStream(0, 0).block(0);
    CHECK(b[0] == 0x6627e8d5u);
    CHECK(b[1] == 0xe169c58du);
    CHECK(b[2] == 0xbc57ac4cu);
    CHECK(b[3] == 0x9b00dbd8u);
  }
  {
    const auto b = RngStream(0xFFFFFFFFFFFFFFFFull, 0xFFFFFFFFFFFFFFFFull)
                       .block(0xFFFFFFFFFFFFFFFFull);
    CHECK(b[0] == 0x408f276du);
    CHECK(b[1] == 0x41c83b0eu);
    CHECK(b[2] == 0xa20bc7c6u);
    CHECK(b[3] == 0x6d5451fdu);
  }
  {
    // counter words from pi: (243f6a88, 85a308d3, 13198a2e, 03707344)
    const auto b = RngStream(0x299f31d0a4093822ull, 0x0370734413198a2eull)
                       .block(0x85a308d3243f6a88ull);
    CHECK(b[0] == 0xd16cfe09u);
    CHECK(b[1] == 0x94fdccebu);
    CHECK(b[2] == 0x5001e420u);
    CHECK(b[3] == 0x24126ea1u);
  }
}

TEST_CASE("identical state reproduces identical output") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a.counter() == 100);

  // O(1) skip: addressing a slot equals walking to it
  RngStream c(42, 7);
  c.set_counter(977);
  const double direct = c.next_double();
  CHECK(direct == RngStream(42, 7).double_at(977));
}

TEST_CASE("slot draws do not advance the stream") {
  const RngStream r(3, 5);
  CHECK(r.normal_at(11) == r.normal_at(11));
  CHECK(r.counter() == 0);
}

TEST_CASE("forks are deterministic and distinct") {
  const RngStream base(9001);
  const RngStream f1 = base.fork(1, 2, 3);
  const RngStream f2 = base.fork(1, 2, 3);
  CHECK(f1.stream() == f2.stream());
  CHECK(f1.stream() != base.fork(1, 2, 4).stream());
  CHECK(f1.stream() != base.fork(2, 2, 3).stream());
  // chained forks differ from flat ones
  CHECK(base.fork(1).fork(2).stream() != base.fork(1, 2).stream());
}

TEST_CASE("uniform and normal moments") {
  RngStream rng(123);
  const int m = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / m;
  const double var = sum2 / m - mean * mean;
  CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / m));
  CHECK(std::abs(var - 1.0 / 12.0) < 0.002);

  RngStream nrng(321);
  sum = sum2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const double z = nrng.next_normal();
    sum += z;
    sum2 += z * z;
  }
  const double nmean = sum / m;
  const double nvar = sum2 / m - nmean * nmean;
  CHECK(std::abs(nmean) < 3.0 / std::sqrt(static_cast<double>(m)));
  CHECK(std::abs(nvar - 1.0) < 3.0 * std::sqrt(2.0 / m));
}

TEST_CASE("substreams look independent") {
  const RngStream base(777);
  RngStream a = base.fork(1);
  RngStream b = base.fork(2);
  const int m = 20000;
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < m; ++i) {
    const double x = a.next_normal();
    const double y = b.next_normal();
    sa += x;
    sb += y;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  const double corr = (sab / m - sa / m * sb / m) /
                      std::sqrt((saa / m - sa / m * sa / m) *
                                (sbb / m - sb / m * sb / m));
  CHECK(std::abs(corr) < 0.03);
}

TEST_SUITE_END();
