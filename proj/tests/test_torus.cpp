#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "wkam/core.hpp"
#include "wkam/torus.hpp"

using namespace wkam;

TEST_CASE("wrap reduces mod 1") {
  CHECK(wrap(Vec::of(1.25))[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(wrap(Vec::of(-0.1))[0] == doctest::Approx(0.9).epsilon(1e-15));
  TorusPoint p = wrap(Vec::of(0.9, 2.5));
  CHECK(p[0] == doctest::Approx(0.9));
  CHECK(p[1] == doctest::Approx(0.5));
}

TEST_CASE("wrap output always lands in [0,1)") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    TorusPoint p = wrap(Vec::of(rng.uniform(-50.0, 50.0)));
    CHECK(p[0] >= 0.0);
    CHECK(p[0] < 1.0);
    // Idempotence.
    CHECK(wrap(p.coords())[0] == p[0]);
  }
  // The nasty case: tiny negative values must not round up to 1.0.
  TorusPoint q = wrap(Vec::of(-1e-18));
  CHECK(q[0] >= 0.0);
  CHECK(q[0] < 1.0);
}

TEST_CASE("wrap rejects non-finite input") {
  CHECK_THROWS_AS(wrap(Vec::of(std::nan(""))), InvalidInputError);
  CHECK_THROWS_AS(wrap(Vec::of(std::numeric_limits<double>::infinity())), InvalidInputError);
}

TEST_CASE("displacement picks the shorter arc") {
  CHECK(displacement(wrap(Vec::of(0.9)), wrap(Vec::of(0.1)))[0] == doctest::Approx(0.2));
  TorusPoint x = wrap(Vec::of(0.37));
  CHECK(displacement(x, x)[0] == 0.0);
  Vec d2 = displacement(wrap(Vec::of(0.9, 0.5)), wrap(Vec::of(0.1, 0.5)));
  CHECK(d2[0] == doctest::Approx(0.2));
  CHECK(d2[1] == doctest::Approx(0.0));
}

TEST_CASE("displacement tie-break at exact half distance") {
  // Both representatives have norm 1/2; the artifact picks +1/2.
  CHECK(displacement(wrap(Vec::of(0.25)), wrap(Vec::of(0.75)))[0] == doctest::Approx(0.5));
  CHECK(displacement(wrap(Vec::of(0.75)), wrap(Vec::of(0.25)))[0] == doctest::Approx(0.5));
}

TEST_CASE("displacement dimension mismatch is rejected") {
  CHECK_THROWS_AS(displacement(wrap(Vec::of(0.1)), wrap(Vec::of(0.1, 0.2))), InvalidInputError);
}

TEST_CASE("displacement norm bound and antisymmetry") {
  Rng rng(7);
  for (int d = 1; d <= 2; ++d) {
    for (int i = 0; i < 1000; ++i) {
      Vec a(d), b(d);
      for (int k = 0; k < d; ++k) {
        a[k] = rng.uniform01();
        b[k] = rng.uniform01();
      }
      TorusPoint pa = wrap(a), pb = wrap(b);
      Vec ab = displacement(pa, pb);
      Vec ba = displacement(pb, pa);
      CHECK(ab.norm() <= std::sqrt(static_cast<double>(d)) / 2 + 1e-12);
      for (int k = 0; k < d; ++k) {
        // Antisymmetric except at the +1/2 tie representative.
        if (std::abs(ab[k]) < 0.5 - 1e-12) CHECK(ab[k] == doctest::Approx(-ba[k]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("torus distance triangle inequality") {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    TorusPoint a = wrap(Vec::of(rng.uniform01(), rng.uniform01()));
    TorusPoint b = wrap(Vec::of(rng.uniform01(), rng.uniform01()));
    TorusPoint c = wrap(Vec::of(rng.uniform01(), rng.uniform01()));
    CHECK(torus_distance(a, c) <= torus_distance(a, b) + torus_distance(b, c) + 1e-12);
  }
}

TEST_CASE("winding lifts enumerate all classes") {
  auto lifts = winding_lifts(wrap(Vec::of(0.25)), wrap(Vec::of(0.75)), 1);
  REQUIRE(lifts.size() == 3);
  CHECK(lifts[0][0] == doctest::Approx(-0.5));
  CHECK(lifts[1][0] == doctest::Approx(0.5));
  CHECK(lifts[2][0] == doctest::Approx(1.5));

  TorusPoint x = wrap(Vec::of(0.6));
  auto same = winding_lifts(x, x, 0);
  REQUIRE(same.size() == 1);
  CHECK(same[0][0] == 0.0);

  auto origin = winding_lifts(wrap(Vec::of(0.0)), wrap(Vec::of(0.0)), 1);
  REQUIRE(origin.size() == 3);
  CHECK(origin[0][0] == doctest::Approx(-1.0));
  CHECK(origin[1][0] == doctest::Approx(0.0));
  CHECK(origin[2][0] == doctest::Approx(1.0));

  // (2 w_max + 1)^d in two dimensions, and the list contains the minimal lift.
  auto lifts2 = winding_lifts(wrap(Vec::of(0.1, 0.9)), wrap(Vec::of(0.3, 0.1)), 2);
  CHECK(lifts2.size() == 25);
  Vec minimal = displacement(wrap(Vec::of(0.1, 0.9)), wrap(Vec::of(0.3, 0.1)));
  bool found = false;
  for (const auto& l : lifts2)
    if ((l - minimal).norm_inf() < 1e-15) found = true;
  CHECK(found);
}

TEST_CASE("grid node indexing is a bijection") {
  for (int d = 1; d <= 2; ++d) {
    SpaceGrid g(d, 8);
    for (int i = 0; i < g.num_nodes(); ++i) CHECK(g.nearest_node(g.node_point(i)) == i);
  }
  SpaceGrid g(2, 5);
  CHECK(g.num_nodes() == 25);
  CHECK(g.node_point(7)[0] == doctest::Approx(2.0 / 5));
  CHECK(g.node_point(7)[1] == doctest::Approx(1.0 / 5));
  CHECK(g.shift_node(7, {4, 4}) == g.nearest_node(wrap(Vec::of(6.0 / 5, 5.0 / 5))));
}
