#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hpnn/hyperdual.hpp"
#include "hpnn/rng.hpp"
#include "test_util.hpp"

using hpnn::HyperDual;

TEST_CASE("cube of a seeded value carries first and second derivatives") {
  const HyperDual x = HyperDual::seed_x(2.0);
  const HyperDual y = x * x * x;
  CHECK(y.val == doctest::Approx(8.0));
  CHECK(y.dx == doctest::Approx(12.0));   // 3x^2
  CHECK(y.dxx == doctest::Approx(12.0));  // 6x
  CHECK(y.dt == 0.0);
}

TEST_CASE("constant times seeded value is linear") {
  const HyperDual x = HyperDual::seed_x(3.0);
  const HyperDual y = HyperDual(5.0) * x;
  CHECK(y.val == doctest::Approx(15.0));
  CHECK(y.dx == doctest::Approx(5.0));
  CHECK(y.dxx == 0.0);
}

TEST_CASE("functions of constants have no derivatives") {
  const HyperDual y = tanh(HyperDual(0.0));
  CHECK(y.val == 0.0);
  CHECK(y.dt == 0.0);
  CHECK(y.dx == 0.0);
  CHECK(y.dxx == 0.0);
}

TEST_CASE("polynomials of degree <= 4: dx and dxx match analytic derivatives") {
  hpnn::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    double c[5];
    for (double& v : c) v = rng.uniform(-2.0, 2.0);
    const double xv = rng.uniform(-1.5, 1.5);
    const HyperDual x = HyperDual::seed_x(xv);
    // Horner evaluation entirely in HyperDual arithmetic
    HyperDual p(c[4]);
    for (int k = 3; k >= 0; --k) p = p * x + c[k];
    const double p1 = ((4 * c[4] * xv + 3 * c[3]) * xv + 2 * c[2]) * xv + c[1];
    const double p2 = (12 * c[4] * xv + 6 * c[3]) * xv + 2 * c[2];
    CHECK(hpnn::test::rel_err(p.dx, p1, 1e-12) < 1e-12);
    CHECK(hpnn::test::rel_err(p.dxx, p2, 1e-12) < 1e-12);
  }
}

TEST_CASE("division matches the analytic quotient derivatives") {
  const double xv = 0.7;
  const HyperDual x = HyperDual::seed_x(xv);
  const HyperDual q = (x * x + 1.0) / (x + 2.0);
  // q = (x^2+1)/(x+2); q' = (x^2+4x-1)/(x+2)^2; q'' = 10/(x+2)^3
  const double denom = xv + 2.0;
  CHECK(q.val == doctest::Approx((xv * xv + 1) / denom));
  CHECK(q.dx == doctest::Approx((xv * xv + 4 * xv - 1) / (denom * denom)));
  CHECK(q.dxx == doctest::Approx(10.0 / (denom * denom * denom)));
}

TEST_CASE("division by a zero-valued HyperDual is a domain error") {
  const HyperDual zero(0.0);
  CHECK_THROWS_AS(HyperDual(1.0) / zero, std::domain_error);
}

TEST_CASE("zero-seeded HyperDual arithmetic embeds plain double arithmetic") {
  hpnn::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(0.5, 2.0);
    const HyperDual ha(a), hb(b);
    const HyperDual r = tanh(ha * hb) + exp(ha - hb) * sin(hb) + ha / hb;
    const double want = std::tanh(a * b) + std::exp(a - b) * std::sin(b) + a / b;
    CHECK(r.val == doctest::Approx(want).epsilon(1e-14));
    CHECK(r.dt == 0.0);
    CHECK(r.dx == 0.0);
    CHECK(r.dxx == 0.0);
  }
}

TEST_CASE("mixed t and x seeds propagate independently") {
  // u = t * x^2: du/dt = x^2, du/dx = 2tx, d2u/dx2 = 2t
  const HyperDual t = HyperDual::seed_t(0.3);
  const HyperDual x = HyperDual::seed_x(1.7);
  const HyperDual u = t * x * x;
  CHECK(u.dt == doctest::Approx(1.7 * 1.7));
  CHECK(u.dx == doctest::Approx(2 * 0.3 * 1.7));
  CHECK(u.dxx == doctest::Approx(0.6));
}

TEST_CASE("unary chain rules against finite differences of the value map") {
  hpnn::Rng rng(13);
  auto scalar = [](double x) { return std::tanh(std::sin(3 * x) + std::exp(-x * x)); };
  for (int trial = 0; trial < 50; ++trial) {
    const double xv = rng.uniform(-1.2, 1.2);
    const HyperDual x = HyperDual::seed_x(xv);
    const HyperDual y = tanh(sin(x * 3.0) + exp(-(x * x)));
    const double h = 1e-5;
    const double d1 = (scalar(xv + h) - scalar(xv - h)) / (2 * h);
    const double d2 = (scalar(xv + h) - 2 * scalar(xv) + scalar(xv - h)) / (h * h);
    CHECK(hpnn::test::rel_err(y.dx, d1, 1e-6) < 1e-7);
    CHECK(std::abs(y.dxx - d2) < 5e-4);
  }
}

TEST_CASE("sqrt and cos chain rules") {
  const HyperDual x = HyperDual::seed_x(0.9);
  const HyperDual y = sqrt(x * 2.0 + 1.0);  // sqrt(2x+1)
  const double v = std::sqrt(2 * 0.9 + 1.0);
  CHECK(y.val == doctest::Approx(v));
  CHECK(y.dx == doctest::Approx(1.0 / v));
  CHECK(y.dxx == doctest::Approx(-1.0 / (v * v * v)));
  CHECK_THROWS_AS(sqrt(HyperDual(-1.0)), std::domain_error);

  const HyperDual c = cos(x);
  CHECK(c.val == doctest::Approx(std::cos(0.9)));
  CHECK(c.dx == doctest::Approx(-std::sin(0.9)));
  CHECK(c.dxx == doctest::Approx(-std::cos(0.9)));
}
