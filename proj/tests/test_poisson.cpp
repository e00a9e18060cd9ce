#include <cmath>
#include <random>

#include "doctest.h"
#include "tws/operators.hpp"
#include "tws/poisson.hpp"

using namespace tws;

namespace {

StepAtomicMeasure random_positive(std::mt19937_64& rng) {
  std::vector<std::pair<int64_t, double>> c;
  const int64_t off = int64_t(rng() % 64) - 32;
  for (int64_t i = 0; i < 24; ++i)
    if (rng() % 3 == 0) c.push_back({off + i, double(rng() % 8 + 1)});
  std::vector<Atom> a;
  if (rng() % 2) a.push_back({std::ldexp(double(int64_t(rng() % 512) - 256), -4), 0.5});
  return StepAtomicMeasure::from_cells(2, c, a);
}

}  // namespace

TEST_CASE("dini modulus") {
  CHECK(DiniModulus::linear()(0.25) == 0.25);
  CHECK(DiniModulus::linear().dini_integral() == 1.0);
  // delta(s) = s on [0, 1/2], constant 1/2 afterwards: int = 1/2 + (1/2) ln 2
  const auto d = DiniModulus::table({{0.5, 0.5}});
  CHECK(d(0.25) == 0.25);
  CHECK(d(0.75) == 0.5);
  CHECK(d.dini_integral() == doctest::Approx(0.5 + 0.5 * std::log(2.0)));
  CHECK_THROWS(DiniModulus::table({{0.5, 0.5}, {0.4, 0.6}}));
}

TEST_CASE("poisson_bold examples") {
  const Interval q(-0.5, 0.5);
  CHECK(poisson_bold(q, StepAtomicMeasure::dirac(0.0)) == 1.0);
  CHECK(poisson_bold(q, StepAtomicMeasure::dirac(1.5)) == doctest::Approx(1.0 / 8.0));
  CHECK(poisson_bold(q, StepAtomicMeasure{}) == 0.0);
}

TEST_CASE("geometric tail matches direct summation") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-10.0, 10.0), l(-5.0, 4.0);
  for (int t = 0; t < 1000; ++t) {
    const double a = u(rng), len = std::exp2(l(rng));
    const Interval q(a, a + len);
    const auto nu = StepAtomicMeasure::dirac(a + len * std::uniform_real_distribution<double>(0, 1)(rng));
    REQUIRE(poisson_std(q, nu) == doctest::Approx(4.0 / 3.0 / len).epsilon(1e-12));
    REQUIRE(poisson_std_direct(q, nu, 60) == doctest::Approx(4.0 / 3.0 / len).epsilon(1e-12));
  }
  for (int t = 0; t < 50; ++t) {
    const auto nu = random_positive(rng);
    const Interval q(u(rng) * 0.25, u(rng) * 0.25 + 20.0);
    REQUIRE(poisson_std(q, nu) == doctest::Approx(poisson_std_direct(q, nu, 80)).epsilon(1e-12));
    REQUIRE(poisson_std(q, nu) >= nu.mass(q) / q.length());
  }
}

TEST_CASE("poisson_dyadic") {
  const DyadicInterval i(0, 0);
  CHECK(poisson_dyadic(i, StepAtomicMeasure{}) == 0.0);
  const auto box = StepAtomicMeasure::uniform(-std::ldexp(1.0, 45), std::ldexp(1.0, 45));
  CHECK(poisson_dyadic(i, box) == doctest::Approx(2.0).epsilon(1e-12));
  std::mt19937_64 rng(67);
  for (int t = 0; t < 200; ++t) {
    const auto nu = random_positive(rng);
    const Shift s = kAllShifts[rng() % 3];
    const DyadicInterval q(int(rng() % 6) - 3, int64_t(rng() % 16) - 8, s);
    REQUIRE(poisson_dyadic(q, nu) == doctest::Approx(poisson_dyadic_direct(q, nu, 60)).epsilon(1e-12));
  }
  CHECK_THROWS(poisson_dyadic(i, StepAtomicMeasure::from_cells(0, {{0, -1.0}}, {}, true)));
}

TEST_CASE("poisson_redef examples") {
  const Interval i(-1.0, 1.0);
  CHECK(poisson_redef(i, StepAtomicMeasure::dirac(2.0)) == 0.25);
  CHECK(poisson_redef(i, StepAtomicMeasure::dirac(0.0)) == 0.5);
  CHECK(poisson_redef(i, StepAtomicMeasure::uniform(2.0, 3.0)) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("poisson operator and linearity") {
  PartitionData parts{DyadicInterval(2, 0), {DyadicInterval(0, 0), DyadicInterval(0, 2)}};
  parts.validate();
  const auto a = StepAtomicMeasure::dirac(0.5);
  CHECK(poisson_operator_apply(parts, a, 1.5) == 0.0);
  CHECK(poisson_operator_apply(parts, a, 0.25) == doctest::Approx(4.0 / 3.0));
  std::mt19937_64 rng(71);
  for (int t = 0; t < 50; ++t) {
    const auto n1 = random_positive(rng), n2 = random_positive(rng);
    const double x = double(rng() % 400) / 100.0;
    REQUIRE(poisson_operator_apply(parts, n1 + n2, x) ==
            doctest::Approx(poisson_operator_apply(parts, n1, x) + poisson_operator_apply(parts, n2, x)));
    const Interval q(0.25, 1.0);
    REQUIRE(poisson_bold(q, n1.scaled(3.0)) == doctest::Approx(3.0 * poisson_bold(q, n1)));
    REQUIRE(poisson_std(q, n1 + n2) >= poisson_std(q, n1));
  }
  PartitionData bad{DyadicInterval(2, 0), {DyadicInterval(1, 0), DyadicInterval(0, 1)}};
  CHECK_THROWS(bad.validate());
  PartitionData outside{DyadicInterval(2, 0), {DyadicInterval(0, 7)}};
  CHECK_THROWS(outside.validate());
}

TEST_CASE("pjk operator") {
  const auto mu = StepAtomicMeasure::uniform(0.0, 4.0, 1.0, 0) + StepAtomicMeasure::dirac(6.5);
  const std::vector<DyadicInterval> pieces{DyadicInterval(0, 1)};
  CHECK(pjk_operator({Interval(10.0, 12.0)}, pieces, mu, 1.5) == 0.0);
  CHECK(pjk_operator({Interval(-100.0, 100.0)}, pieces, mu, 1.5) ==
        doctest::Approx(poisson_bold(Interval(1.0, 2.0), mu)));
  // disjoint E's sharing the piece: the sum is one bold Poisson value of the union
  std::mt19937_64 rng(73);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto nu = random_positive(rng);
    const DyadicInterval g(int(rng() % 4) - 2, int64_t(rng() % 8) - 4);
    std::vector<Interval> es;
    double acc = 0.0, x = g.interval().center();
    for (int k = 0; k < 4; ++k) {
      const Interval e(-16.0 + 8.0 * k, -12.0 + 8.0 * k);
      es.push_back(e);
      acc += pjk_operator({e}, {g}, nu, x);
    }
    const double m = maximal_fn(nu.restricted(std::span<const Interval>(es)), x);
    if (m > 0) worst = std::max(worst, acc / m);
  }
  MESSAGE("sum over E of P_jk / M: ", worst);
  CHECK(worst <= 3.0 + 1e-12);
}

TEST_CASE("comparability of the Poisson functionals") {
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> u(-6.0, 6.0), l(-3.0, 2.0);
  double c_pm = 0.0, lo = INFINITY, hi = 0.0;
  for (int t = 0; t < 400; ++t) {
    const auto nu = random_positive(rng);
    const double a = u(rng), len = std::exp2(l(rng));
    const Interval q(a, a + len);
    const double pb = poisson_bold(q, nu), m = m_q(q, nu);
    if (m > 0) c_pm = std::max(c_pm, pb / m);
    const double ps = poisson_std(q, nu);
    double sum = 0.0;
    for (Shift s : kAllShifts) sum += poisson_dyadic(max_subinterval(q, s), nu);
    if (ps > 0) {
      lo = std::min(lo, sum / ps);
      hi = std::max(hi, sum / ps);
    }
  }
  MESSAGE("P <= C M with C = ", c_pm, "; grid ratio in [", lo, ", ", hi, "]");
  CHECK(c_pm <= 3.0 + 1e-12);
  CHECK(lo >= 1.0 / 64);
  CHECK(hi <= 64.0);
}

TEST_CASE("m_q and max_subinterval") {
  const auto nu = StepAtomicMeasure::dirac(3.0);
  CHECK(m_q(Interval(0.0, 1.0), nu) == doctest::Approx(1.0 / 3.0));
  const auto c = max_subinterval(Interval(0.1, 0.9), Shift::Zero);
  CHECK(c.interval() == Interval(0.25, 0.5));
  for (Shift s : kAllShifts) {
    const auto m = max_subinterval(Interval(0.1, 0.9), s);
    CHECK(Interval(0.1, 0.9).contains(m.interval()));
    CHECK(m.length() >= 0.2);
  }
}
