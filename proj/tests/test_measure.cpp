#include <cmath>
#include <random>

#include "doctest.h"
#include "tws/errors.hpp"
#include "tws/measure.hpp"
#include "tws/measure_io.hpp"
#include "tws/quadrature.hpp"

using namespace tws;

namespace {

StepAtomicMeasure random_measure(std::mt19937_64& rng, int L, int cells, int atoms) {
  std::uniform_int_distribution<int64_t> k(-cells, cells);
  std::uniform_int_distribution<int> w(0, 16);
  std::vector<std::pair<int64_t, double>> c;
  for (int64_t i = -cells; i < cells; ++i)
    if (rng() % 3) c.push_back({i, w(rng) / 4.0});
  std::vector<Atom> a;
  for (int i = 0; i < atoms; ++i) a.push_back({std::ldexp(double(k(rng)), -L), w(rng) / 8.0});
  return StepAtomicMeasure::from_cells(L, c, a);
}

// Midpoint rule on a fine grid, atoms added exactly.
double midpoint_power_kernel(const StepAtomicMeasure& mu, const Interval& q, double e) {
  double acc = 0.0;
  for (const auto& s : mu.segments()) {
    const int n = int(std::ceil((s.b - s.a) * (1 << 20)));
    const double h = (s.b - s.a) / n;
    for (int i = 0; i < n; ++i) acc += s.density * h * std::pow(tail_weight(q, s.a + (i + 0.5) * h), e);
  }
  for (const auto& a : mu.atoms()) acc += a.m * std::pow(tail_weight(q, a.x), e);
  return acc;
}

}  // namespace

TEST_CASE("mass examples") {
  const auto leb = StepAtomicMeasure::uniform(0.0, 1.0);
  CHECK(mass(leb, {0.0, 0.5}) == 0.5);
  const auto d = StepAtomicMeasure::dirac(0.0);
  CHECK(mass(d, {0.0, 1.0}) == 1.0);
  CHECK(mass(d, {-1.0, 0.0}) == 0.0);
  const auto two = StepAtomicMeasure::from_cells(1, {{0, 2.0}});
  CHECK(mass(two, {0.25, 0.75}) == 0.5);
}

TEST_CASE("mass is exactly additive over random splits") {
  std::mt19937_64 rng(7);
  const auto mu = random_measure(rng, 6, 200, 30);
  std::uniform_int_distribution<int64_t> k(-300 * 16, 300 * 16);
  for (int t = 0; t < 20000; ++t) {
    int64_t a = k(rng), b = k(rng), c = k(rng);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    if (a == b || b == c) continue;
    const double x = std::ldexp(double(a), -10), y = std::ldexp(double(b), -10),
                 z = std::ldexp(double(c), -10);
    REQUIRE(mu.mass({x, z}) == mu.mass({x, y}) + mu.mass({y, z}));
  }
}

TEST_CASE("total variation and signed measures") {
  const auto mu = StepAtomicMeasure::from_cells(2, {{0, 1.0}, {1, -2.0}}, {{3.0, -1.5}}, true);
  CHECK(mu.total_variation() == doctest::Approx(0.25 + 0.5 + 1.5));
  CHECK(mu.total_mass() == doctest::Approx(0.25 - 0.5 - 1.5));
  CHECK_THROWS_AS(StepAtomicMeasure::from_cells(2, {{0, -1.0}}), PreconditionError);
}

TEST_CASE("integrate_power_kernel examples") {
  const Interval q(-0.5, 0.5);
  const auto leb = StepAtomicMeasure::uniform(-1024.0, 1024.0);
  // 2 int_0^T (1+u)^-2 du = 2 T / (1 + T) with u = |x| - 1/2 folded in
  const double exact = 2.0 * (1.0 - 1.0 / (1.0 + 1023.5 + 0.5));
  CHECK(integrate_power_kernel(leb, q, 2.0) == doctest::Approx(exact).epsilon(1e-9));
  CHECK(integrate_power_kernel(StepAtomicMeasure::dirac(0.0, 3.0), q, 1.7) == 3.0);
  CHECK(integrate_power_kernel(StepAtomicMeasure::dirac(1.0, 2.0), q, 2.0) ==
        doctest::Approx(0.5));
}

TEST_CASE("integrate_power_kernel vs midpoint oracle, monotone, bounded by mass") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 6; ++t) {
    const auto mu = random_measure(rng, 3, 12, 3);
    const Interval q(-0.75 + t * 0.25, 0.5 + t * 0.5);
    const double v = integrate_power_kernel(mu, q, 1.5 + 0.25 * t);
    CHECK(v == doctest::Approx(midpoint_power_kernel(mu, q, 1.5 + 0.25 * t)).epsilon(1e-6));
    CHECK(v <= mu.total_mass() * (1 + 1e-12));
    const auto more = mu + StepAtomicMeasure::uniform(0.0, 0.5, 0.5, 3);
    CHECK(integrate_power_kernel(more, q, 1.5 + 0.25 * t) >= v);
  }
}

TEST_CASE("integrate_inverse_square examples") {
  const Interval i(-1.0, 1.0);
  CHECK(integrate_inverse_square(StepAtomicMeasure::dirac(2.0), i) == 0.25);
  CHECK(integrate_inverse_square(StepAtomicMeasure::uniform(2.0, 3.0), i) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(integrate_inverse_square(StepAtomicMeasure::uniform(-0.5, 0.5), i) == 0.0);
  CHECK_THROWS_AS(integrate_inverse_square(StepAtomicMeasure::dirac(1.0), i), PreconditionError);
}

TEST_CASE("hilbert_off_support examples and monotonicity") {
  CHECK(hilbert_off_support(StepAtomicMeasure::dirac(2.0), 0.0, 1.0) == -0.5);
  CHECK(hilbert_off_support(StepAtomicMeasure::uniform(1.0, 2.0), 0.0, 0.5) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  const auto sym = StepAtomicMeasure::uniform(-3.0, -2.0) + StepAtomicMeasure::uniform(2.0, 3.0);
  CHECK(std::fabs(hilbert_off_support(sym, 0.0, 1.0)) < 1e-15);
  CHECK_THROWS(hilbert_off_support(StepAtomicMeasure::dirac(0.1), 0.0, 0.5));
  // mass left of the evaluation points: each term 1/(x - z) shrinks as x grows
  const auto left = StepAtomicMeasure::uniform(-4.0, -1.0) + StepAtomicMeasure::dirac(-2.5, 0.5);
  const double a = hilbert_off_support(left, 0.0, 0.5), b = hilbert_off_support(left, 0.5, 0.5),
               c = hilbert_off_support(left, 1.0, 0.5);
  CHECK(a > b);
  CHECK(b > c);
}

TEST_CASE("common atoms") {
  WeightPair w(StepAtomicMeasure::dirac(1.0), StepAtomicMeasure::dirac(1.0), 2.0);
  CHECK(w.common_atoms().size() == 1);
  CHECK_THROWS(w.require_no_common_atoms());
  CHECK(w.p_dual() == 2.0);
  CHECK_THROWS(WeightPair(StepAtomicMeasure{}, StepAtomicMeasure{}, 1.0));
}

TEST_CASE("json round trip and parse errors") {
  std::mt19937_64 rng(3);
  const auto mu = random_measure(rng, 4, 20, 4);
  CHECK(measure_from_json(measure_to_json(mu)) == mu);
  const json bad = json::parse(R"({"resolution": 2, "cells": [{"k": 0, "w": -1}]})");
  CHECK_THROWS_AS(measure_from_json(bad, "cfg"), ParseError);
  const json nan_like = json::parse(R"({"resolution": 2, "cells": [{"k": 0}]})");
  CHECK_THROWS_AS(measure_from_json(nan_like, "cfg"), ParseError);
}

TEST_CASE("adaptive simpson") {
  const auto r = adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-10));
  CHECK_THROWS_AS(integrate_or_throw([](double x) { return 1.0 / std::sqrt(std::fabs(x - 0.3)); }, 0.0, 1.0, 1e-14, 6),
                  QuadratureError);
}
