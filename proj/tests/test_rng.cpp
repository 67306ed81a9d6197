#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "approxmax/rng.hpp"

using namespace approxmax;

// Frozen outputs from an independent big-integer reimplementation of the
// generator; any platform- or refactor-induced drift trips these.
TEST_CASE("generator matches reference sequence") {
  Xoshiro256pp g(42, 0);
  CHECK(g.next() == 0x8de2e51e4367a7d8ULL);
  CHECK(g.next() == 0xd1df654b274a3fe9ULL);
  CHECK(g.next() == 0xf12ea9f0a03db906ULL);
  CHECK(g.next() == 0x1b22921b1444bf9fULL);

  Xoshiro256pp g1(42, 1);
  CHECK(g1.next() == 0x32a5990e0b4c8857ULL);
  CHECK(g1.next() == 0xa1161f9b437a7fe2ULL);

  Xoshiro256pp g0(0, 0);
  CHECK(g0.next() == 0x23c523f6245dfd19ULL);
  CHECK(g0.next() == 0x97d3deb5fe5e719aULL);
}

TEST_CASE("uniform draws match reference and stay strictly inside") {
  Xoshiro256pp g(123, 7);
  CHECK(g.uniform_open(-1.0, 1.0) == -0.92813835158868718);
  CHECK(g.uniform_open(-1.0, 1.0) == 0.25196099138568306);
  CHECK(g.uniform_open(-1.0, 1.0) == 0.83819279250571421);
  CHECK(g.uniform_open(-1.0, 1.0) == 0.95831125797846273);

  Xoshiro256pp h(99, 3);
  double sum = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double v = h.uniform_open(-1.0, 1.0);
    REQUIRE(v > -1.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  CHECK(std::abs(sum / 200000) < 0.01);

  CHECK_THROWS_AS(g.uniform_open(1.0, 1.0), config_error);
  CHECK_THROWS_AS(g.uniform_open(2.0, -2.0), config_error);
}

TEST_CASE("same seed and stream reproduce, different streams diverge") {
  Xoshiro256pp a = make_trial_rng(2024, 5);
  Xoshiro256pp b = make_trial_rng(2024, 5);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next() == b.next());

  Xoshiro256pp c = make_trial_rng(2024, 6);
  Xoshiro256pp d = make_trial_rng(2024, 5);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += (c.next() == d.next());
  CHECK(same == 0);

  Xoshiro256pp e = make_trial_rng(2025, 5);
  Xoshiro256pp f = make_trial_rng(2024, 5);
  same = 0;
  for (int i = 0; i < 100; ++i) same += (e.next() == f.next());
  CHECK(same == 0);
}
