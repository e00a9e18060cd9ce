#include <cmath>
#include <random>

#include "doctest.h"
#include "tws/dyadic.hpp"

using namespace tws;

TEST_CASE("grid rationals are exact") {
  const auto a = GridRational::from_double(0.1);
  CHECK(a.to_double() == 0.1);
  const auto third = GridRational(1, 0);  // 1/3
  CHECK(third + third + third == GridRational::from_double(1.0));
  CHECK(GridRational::from_double(-0.75) < GridRational::from_double(-0.5));
  CHECK(third.shifted(3).to_double() == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("locate examples") {
  CHECK(locate(Shift::Zero, 0.7, 0).interval() == Interval(0.0, 1.0));
  const auto c = locate(Shift::Third, 0.0, 0).interval();
  CHECK(c.left() == doctest::Approx(-2.0 / 3.0));
  CHECK(c.right() == doctest::Approx(1.0 / 3.0));
  CHECK(locate(Shift::Zero, 0.7, -2).interval() == Interval(0.5, 0.75));
}

TEST_CASE("locate against enumeration") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int t = 0; t < 3000; ++t) {
    const double x = u(rng);
    const int j = int(rng() % 12) - 6;
    for (Shift s : kAllShifts) {
      const auto q = locate(s, x, j);
      REQUIRE(q.scale() == j);
      REQUIRE(q.contains(x));
      REQUIRE_FALSE(DyadicInterval(j, q.index() + 1, s).contains(x));
      REQUIRE_FALSE(DyadicInterval(j, q.index() - 1, s).contains(x));
    }
  }
}

TEST_CASE("parents, children and ancestors") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 2000; ++t) {
    const Shift s = kAllShifts[rng() % 3];
    const DyadicInterval q(int(rng() % 20) - 10, int64_t(rng() % 2001) - 1000, s);
    const auto p = q.parent();
    REQUIRE(p.scale() == q.scale() + 1);
    REQUIRE(p.contains(q));
    const auto [l, r] = p.children();
    REQUIRE((l == q || r == q));
    REQUIRE(l.right_exact() == r.left_exact());
    REQUIRE(l.left_exact() == p.left_exact());
    REQUIRE(r.right_exact() == p.right_exact());
    const int a = int(rng() % 6), b = int(rng() % 6);
    REQUIRE(q.ancestor(a + b) == q.ancestor(a).ancestor(b));
    REQUIRE(q.ancestor(a).length() == std::ldexp(q.length(), a));
  }
}

TEST_CASE("grid property: nested or disjoint") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 5000; ++t) {
    const Shift s = kAllShifts[rng() % 3];
    const DyadicInterval a(int(rng() % 8) - 4, int64_t(rng() % 41) - 20, s);
    const DyadicInterval b(int(rng() % 8) - 4, int64_t(rng() % 41) - 20, s);
    const bool disjoint = a.right_exact() <= b.left_exact() || b.right_exact() <= a.left_exact();
    REQUIRE((disjoint || a.contains(b) || b.contains(a)));
  }
}

TEST_CASE("select_shifted_grid") {
  const auto g = select_shifted_grid({0.4, 0.6});
  CHECK(g.ratio <= 5.0 + 1e-12);
  CHECK(g.hat.interval().contains(Interval(0.3, 0.7)));
  CHECK(select_shifted_grid({0.0, 1.0}).ratio <= 8.0);

  // oracle: scan every scale and shift directly
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> c(-20.0, 20.0), l(-6.0, 3.0);
  double worst = 0.0;
  for (int t = 0; t < 3000; ++t) {
    const double len = std::exp2(l(rng)), x = c(rng);
    const Interval q(x, x + len);
    const auto sel = select_shifted_grid(q);
    const Interval three = q.dilate(3.0);
    REQUIRE(sel.hat.interval().left() <= three.left());
    REQUIRE(sel.hat.interval().right() >= three.right());
    worst = std::max(worst, sel.ratio);
    double best = INFINITY;
    for (Shift s : kAllShifts)
      for (int j = -12; j < 12; ++j) {
        const auto cube = locate(s, three.left(), j);
        if (cube.interval().right() >= three.right() && cube.length() < best) best = cube.length();
      }
    REQUIRE(sel.hat.length() == best);
  }
  CHECK(worst < 16.0);
}

TEST_CASE("besicovitch examples") {
  const auto out = besicovitch_maximal({{DyadicInterval(0, 0), 3}, {DyadicInterval(-1, 0), 3}});
  REQUIRE(out.size() == 1);
  CHECK(out[0].cube == DyadicInterval(0, 0));
  CHECK(besicovitch_maximal({{DyadicInterval(2, 5), 3}}).size() == 1);
  CHECK_THROWS(besicovitch_maximal({{DyadicInterval(2, 5), 4}}));
}

TEST_CASE("besicovitch overlap bounded by M") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    std::vector<DilatedCube> in;
    const int M = (t % 2) ? 3 : 5;
    for (int i = 0; i < 60; ++i) {
      const int j = int(rng() % 6) - 3;
      in.push_back({DyadicInterval(j, int64_t(rng() % (64 >> (j + 3))) - 4), M});
    }
    const auto out = besicovitch_maximal(in);
    std::vector<Interval> iv;
    for (const auto& d : out) iv.push_back(d.interval());
    REQUIRE(max_overlap(iv) <= M);
    // every input lies in some output member
    for (const auto& d : in) {
      bool covered = false;
      for (const auto& o : iv) covered = covered || o.contains(d.interval());
      REQUIRE(covered);
    }
  }
}
