#include <cmath>
#include <random>

#include "doctest.h"
#include "tws/operators.hpp"
#include "tws/quadrature.hpp"

using namespace tws;

namespace {

StepAtomicMeasure random_positive(std::mt19937_64& rng, int L, int span, int atoms) {
  std::vector<std::pair<int64_t, double>> c;
  for (int64_t i = -span; i < span; ++i)
    if (rng() % 2) c.push_back({i, double(rng() % 8 + 1) / 4.0});
  std::vector<Atom> a;
  for (int i = 0; i < atoms; ++i)
    a.push_back({std::ldexp(double(int64_t(rng() % (2 * span)) - span), -L) + 0.37,
                 double(rng() % 4 + 1) / 8.0});
  return StepAtomicMeasure::from_cells(L, c, a);
}

// Same cutoffs, but without the flag that unlocks the closed forms.
CutoffProfile generic_profile() {
  CutoffProfile c;
  c.zeta = smooth_zeta;
  c.eta = smooth_eta;
  c.standard = false;
  return c;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i <= n; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / n));
  return g;
}

}  // namespace

TEST_CASE("cutoff plateaus and monotonicity") {
  double pz = 0.0, pe = 1.0;
  for (int i = 0; i <= 4000; ++i) {
    const double t = i * 1e-3;
    const double z = smooth_zeta(t), e = smooth_eta(t);
    if (t <= 0.5) REQUIRE(z == 0.0);
    if (t >= 1.0) REQUIRE(z == 1.0);
    if (t <= 1.0) REQUIRE(e == 1.0);
    if (t >= 2.0) REQUIRE(e == 0.0);
    REQUIRE(z >= pz);
    REQUIRE(e <= pe);
    pz = z;
    pe = e;
  }
}

TEST_CASE("closed-form band integrals match quadrature") {
  for (double v0 : {0.3, 0.5, 0.7, 0.95}) {
    for (double v1 : {0.8, 1.0, 1.4, 2.5}) {
      if (v1 <= v0) continue;
      const double q = integrate_or_throw([](double v) { return smooth_zeta(v) / v; }, v0, v1, 1e-12);
      CHECK(zeta_over_v_integral(v0, v1) == doctest::Approx(q).epsilon(1e-10));
      const double r = integrate_or_throw([](double v) { return (1.0 - smooth_eta(v)) / v; }, v0 + 0.6,
                                          v1 + 0.6, 1e-12);
      CHECK(eta_tail_over_v_integral(v0 + 0.6, v1 + 0.6) == doctest::Approx(r).epsilon(1e-10));
    }
  }
}

TEST_CASE("t_trunc examples") {
  const auto d = StepAtomicMeasure::dirac(0.0);
  CHECK(t_trunc(d, 1.5, {1.0, 1.0, 4.0}) == doctest::Approx(1.0 / 1.5));
  CHECK(t_trunc(d, 0.4, {1.0, 1.0, 4.0}) == 0.0);
  const auto sym = StepAtomicMeasure::uniform(-2.0, 2.0, 1.0, 2) + StepAtomicMeasure::dirac(-1.0) +
                   StepAtomicMeasure::dirac(1.0);
  CHECK(std::fabs(t_trunc(sym, 0.0, {0.3, 0.3, 3.0})) < 1e-14);
  CHECK_THROWS_AS(t_trunc(d, 1.0, {1.0, 5.0, 8.0}), PreconditionError);
  CHECK_THROWS_AS(t_trunc(d, 1.0, {1.0, 1.0, 1.0}), PreconditionError);
}

TEST_CASE("t_trunc closed form agrees with the generic quadrature path") {
  std::mt19937_64 rng(31);
  const auto gen = generic_profile();
  std::uniform_real_distribution<double> u(-3.0, 3.0), e(-4.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const auto nu = random_positive(rng, 3, 12, 2);
    const double x = u(rng), eps2 = std::exp2(e(rng));
    const double eps1 = eps2 * std::exp2(double(int(rng() % 5)) - 2.0);
    const TruncationParams p{eps1, eps2, std::max(eps1, eps2) * (1.5 + double(rng() % 8))};
    const double a = t_trunc(nu, x, p), b = t_trunc(nu, x, p, gen);
    REQUIRE(a == doctest::Approx(b).epsilon(1e-8).scale(nu.total_mass() / eps2));
  }
}

TEST_CASE("t_natural and t_flat examples") {
  const auto d = StepAtomicMeasure::dirac(0.0);
  CHECK(t_natural(d, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t_flat(d, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t_natural(StepAtomicMeasure{}, 1.0) == 0.0);

  const auto pair = StepAtomicMeasure::dirac(-1.0) + StepAtomicMeasure::dirac(1.0);
  CHECK(t_flat(pair, 0.0) < 1e-12);
  CHECK(t_natural(pair, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(t_sup_bruteforce(pair, 0.0, log_grid(0.05, 5.0, 200), {1.0}, log_grid(1.0, 40.0, 40)) <
        1e-12);
}

TEST_CASE("t_natural of Lebesgue on [0,1] at x=2 against a dense oracle") {
  const auto leb = StepAtomicMeasure::uniform(0.0, 1.0);
  const double v = t_natural(leb, 2.0);
  const double oracle = t_sup_bruteforce(leb, 2.0, log_grid(0.01, 8.0, 1500),
                                         {0.25, 0.5, 1.0, 2.0, 4.0}, log_grid(0.05, 40.0, 600));
  CHECK(v >= oracle - 1e-6);
  CHECK(v == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("sup search is monotone in budget and sandwiches") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 20; ++t) {
    const auto nu = random_positive(rng, 2, 8, 2);
    const double x = std::ldexp(double(int64_t(rng() % 64)) - 32.0, -3) + 0.01;
    SearchBudget lo{16, false, 0}, hi{32, false, 0};
    const auto a = t_natural_search(nu, x, lo), b = t_natural_search(nu, x, hi);
    REQUIRE(b.value >= a.value);
    const auto full = t_natural_search(nu, x);
    REQUIRE(full.value >= b.value - 1e-15 * b.value);
    REQUIRE(t_flat(nu, x) <= full.value * (1 + 1e-12));
    REQUIRE(std::fabs(t_trunc(nu, x, full.argmax)) == doctest::Approx(full.value));
    // any admissible truncation is below the sup estimate up to grid resolution
    const TruncationParams p{0.3, 0.6, 2.0};
    REQUIRE(std::fabs(t_trunc(nu, x, p)) <= full.value * (1 + 1e-3));
  }
}

TEST_CASE("maximal_fn examples and mesh oracle") {
  CHECK(maximal_fn(StepAtomicMeasure::dirac(0.0), 2.0) == 0.5);
  CHECK(maximal_fn(StepAtomicMeasure::uniform(0.0, 1.0), 0.5) == 1.0);
  CHECK_THROWS(maximal_fn(StepAtomicMeasure::from_cells(0, {{0, -1.0}}, {}, true), 0.0));

  std::mt19937_64 rng(43);
  for (int t = 0; t < 5; ++t) {
    std::vector<std::pair<int64_t, double>> c;
    for (int64_t i = 0; i < 16; ++i) c.push_back({i, double(rng() % 5)});
    const auto nu = StepAtomicMeasure::from_cells(3, c);
    const auto bp = nu.breakpoints();
    for (double x : {0.1, 0.55, 1.3, 1.99, 2.5}) {
      double best = 0.0;
      for (double a : bp)
        for (double b : bp)
          if (a <= x && x <= b && a < b) best = std::max(best, nu.mass_closed(a, b) / (b - a));
      // intervals from x to a breakpoint
      for (double b : bp) {
        if (b > x) best = std::max(best, nu.mass_closed(x, b) / (b - x));
        if (b < x) best = std::max(best, nu.mass_closed(b, x) / (x - b));
      }
      REQUIRE(maximal_fn(nu, x) == doctest::Approx(best).epsilon(1e-14));
    }
  }
}

TEST_CASE("dyadic_maximal examples") {
  const auto leb = StepAtomicMeasure::uniform(0.0, 1.0, 1.0, 1);
  const auto f = StepFunction(1, 0, {1.0, 0.0});
  CHECK(dyadic_maximal(leb, f, 0.75) == 0.5);
  CHECK(dyadic_maximal(leb, f, 0.25) == 1.0);
  const auto c = StepFunction::constant_on(1, 0, 1, 3.0);
  CHECK(dyadic_maximal(leb, c, 0.6) == 3.0);
}

TEST_CASE("dyadic maximal theorem on random data") {
  std::mt19937_64 rng(47);
  for (double p : {1.5, 2.0, 3.0}) {
    for (int t = 0; t < 4; ++t) {
      std::vector<std::pair<int64_t, double>> c;
      std::vector<double> fv;
      for (int64_t i = 0; i < 32; ++i) {
        c.push_back({i, double(rng() % 4 + 1)});
        fv.push_back(double(rng() % 9) * ((rng() % 3) ? 0.0 : 1.0));
      }
      const auto mu = StepAtomicMeasure::from_cells(3, c);
      const StepFunction f(3, 0, fv);
      const DyadicMaximal M(mu, f);
      double lhs = 0.0, rhs = 0.0;
      for (int64_t i = 0; i < 32; ++i) {
        const double x = (i + 0.5) / 8.0, m = c[i].second / 8.0;
        lhs += std::pow(M(x), p) * m;
        rhs += std::pow(fv[i], p) * m;
      }
      REQUIRE(lhs <= 2.0 * std::pow(p / (p - 1.0), p) * rhs + 1e-12);
    }
  }
}

TEST_CASE("linearized adjoint examples and duality") {
  Linearization L;
  L.points = {1.0, 2.5};
  L.selection = {{{0.2, 0.2, 10.0}, 0.0}, {{0.3, 0.6, 10.0}, 1.0}};
  L.validate();
  const auto one = StepAtomicMeasure::dirac(1.0, 2.0);
  const auto v = linearized_adjoint(L, one, -1.0);
  CHECK(v.real() == doctest::Approx(2.0 / (1.0 - -1.0)));
  const auto both = one + StepAtomicMeasure::dirac(2.5, 0.5);
  Linearization L0 = L;
  L0.selection[1].theta = 0.0;
  CHECK(linearized_adjoint(L0, both, -2.0).real() == doctest::Approx(-(2.0 / (-2.0 - 1.0) + 0.5 / (-2.0 - 2.5))));
  CHECK_THROWS(linearized_adjoint(L, StepAtomicMeasure::dirac(1.5), 0.0));

  // sum_x L(g sigma)(x) h(x) mu{x} = int g L*(h mu) dsigma
  const auto sigma = StepAtomicMeasure::from_cells(2, {{-4, 1.0}, {-3, 2.0}, {9, 0.5}, {13, 1.5}},
                                                   {{1.6, 0.75}});
  const StepFunction g(2, -4, std::vector<double>(18, 1.0));
  const auto gs = sigma.weighted(g);
  const double h[2] = {1.5, -0.5}, mpt[2] = {2.0, 0.5};
  std::complex<double> lhs = 0.0;
  for (std::size_t i = 0; i < 2; ++i) lhs += linearized_apply(L, gs, i) * h[i] * mpt[i];
  const auto hmu = StepAtomicMeasure::from_segments(0, {}, {{1.0, h[0] * mpt[0]}, {2.5, h[1] * mpt[1]}}, true);
  std::complex<double> rhs = 0.0;
  for (const auto& a : gs.atoms()) rhs += a.m * linearized_adjoint(L, hmu, a.x);
  const auto re = [&](double y) { return linearized_adjoint(L, hmu, y).real(); };
  const auto im = [&](double y) { return linearized_adjoint(L, hmu, y).imag(); };
  for (const auto& s : gs.segments())
    rhs += s.density * std::complex<double>(integrate_or_throw(re, s.a, s.b, 1e-12),
                                            integrate_or_throw(im, s.a, s.b, 1e-12));
  CHECK(lhs.real() == doctest::Approx(rhs.real()).epsilon(1e-9));
  CHECK(lhs.imag() == doctest::Approx(rhs.imag()).epsilon(1e-9));
}

TEST_CASE("linearization from argmax reproduces t_natural") {
  const auto nu = StepAtomicMeasure::uniform(0.0, 1.0, 1.0, 2) + StepAtomicMeasure::dirac(1.75, 0.5);
  const std::vector<double> pts{-1.0, 0.3, 1.2, 3.0};
  const auto L = linearization_from_argmax(nu, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto v = linearized_apply(L, nu, i);
    REQUIRE(v.real() == doctest::Approx(t_natural(nu, pts[i])).epsilon(1e-12));
    REQUIRE(std::fabs(v.imag()) <= 1e-12 * (1 + std::fabs(v.real())));
  }
  Linearization bad = L;
  bad.localized = Interval(0.0, 0.1);
  CHECK_THROWS(bad.validate());
}

TEST_CASE("domination and T-natural vs T-flat gap") {
  std::mt19937_64 rng(53);
  double cdom = 0.0, cgap = 0.0;
  for (int t = 0; t < 8; ++t) {
    const auto nu = random_positive(rng, 2, 8, 1);
    const MaximalFunction M(nu);
    for (int i = 0; i < 20; ++i) {
      const double x = -3.0 + 6.0 * (i + 0.31) / 20.0;
      const double tn = t_natural(nu, x, {32, true, 30});
      const double tf = t_flat(nu, x, {32, true, 30});
      const double m = M(x);
      if (!std::isfinite(m)) continue;
      REQUIRE(tn > 0.0);
      cdom = std::max(cdom, m / tn);
      cgap = std::max(cgap, std::fabs(tn - tf) / m);
    }
  }
  MESSAGE("domination constant ", cdom, ", gap constant ", cgap);
  CHECK(cdom < 50.0);
  CHECK(cgap < 50.0);
}

TEST_CASE("adjoint Holder continuity away from the support") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Interval q(0.0, 1.0);
    Linearization L;
    for (int i = 0; i < 4; ++i) {
      const double x = (rng() % 2 ? 2.0 + 6.0 * u(rng) : -1.0 - 6.0 * u(rng));
      const double e2 = 0.05 + 3.0 * u(rng);
      L.points.push_back(x);
      L.selection.push_back({{e2 * (0.5 + u(rng)), e2, 4.0 * e2 + 10.0 * u(rng)}, 6.28 * u(rng)});
    }
    std::vector<Atom> at;
    for (double x : L.points) at.push_back({x, u(rng)});
    const auto mu = StepAtomicMeasure::from_segments(0, {}, at);
    const double y = u(rng), y2 = u(rng);
    const double diff = std::abs(linearized_adjoint(L, mu, y) - linearized_adjoint(L, mu, y2));
    // P(Q, mu) with delta(s) = s, summed directly over dyadic dilates
    double P = 0.0;
    for (int l = 0; l < 60; ++l) P += std::ldexp(1.0, -l) / std::ldexp(1.0, l) * mu.mass(q.dilate(std::ldexp(1.0, l)));
    if (std::fabs(y - y2) > 0) worst = std::max(worst, diff / (P * std::fabs(y - y2)));
  }
  MESSAGE("Holder constant ", worst);
  CHECK(std::isfinite(worst));
}
