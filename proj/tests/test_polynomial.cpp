#include "thurston/polynomial.hpp"

#include <algorithm>

#include "doctest.h"

using namespace thurston;

namespace {

GaussianRational G(const std::string& s) { return *GaussianRational::parse(s); }

GaussianPoly poly(std::initializer_list<GaussianRational> low_to_high) {
  return GaussianPoly(std::vector<GaussianRational>(low_to_high));
}

}  // namespace

TEST_CASE("gaussian rational parsing and printing") {
  CHECK(G("1") == GaussianRational(Rational(1)));
  CHECK(G("-1/2") == GaussianRational(Rational(-1, 2)));
  CHECK(G("i") == GaussianRational(Rational(0), Rational(1)));
  CHECK(G("-i") == GaussianRational(Rational(0), Rational(-1)));
  CHECK(G("2i") == GaussianRational(Rational(0), Rational(2)));
  CHECK(G("1/2-3/4i") == GaussianRational(Rational(1, 2), Rational(-3, 4)));
  CHECK(G("1+i") == GaussianRational(Rational(1), Rational(1)));
  CHECK(G("0.25+0.5i") == GaussianRational(Rational(1, 4), Rational(1, 2)));
  CHECK(!GaussianRational::parse("one").has_value());
  CHECK(G("1/2-3/4i").str() == "1/2-3/4i");
  CHECK(G("2i").str() == "2i");
  CHECK(G(G("-1/3+i").str()) == G("-1/3+i"));
}

TEST_CASE("gaussian arithmetic") {
  GaussianRational i(Rational(0), Rational(1));
  CHECK(i * i == GaussianRational(Rational(-1)));
  CHECK((G("1+i") / G("1-i")) == i);
  CHECK(G("3+4i").norm() == 25);
}

TEST_CASE("polynomial evaluation, order, reversal") {
  // p(w) = (w - 2)^2 = 4 - 4w + w^2
  GaussianPoly p = poly({G("4"), G("-4"), G("1")});
  CHECK(p.eval(G("2")).is_zero());
  CHECK(p.order_at(G("2")) == 2);
  CHECK(p.order_at(G("0")) == 0);
  CHECK(p.eval(G("3")) == G("1"));

  // reversal against degree 2: u^2 p(1/u) = 4u^2 - 4u + 1
  GaussianPoly r = p.reversed(2);
  CHECK(r.eval(G("1/2")).is_zero());
  CHECK(r.order_at(G("0")) == 0);
}

TEST_CASE("resultant detects common roots") {
  GaussianPoly a = poly({G("-2"), G("1")});            // w - 2
  GaussianPoly b = poly({G("4"), G("-4"), G("1")});    // (w-2)^2
  CHECK(resultant(a, b).is_zero());
  GaussianPoly c = poly({G("-1"), G("1")});            // w - 1
  CHECK(!resultant(a, c).is_zero());
  // resultant(w^2+1, w^2-1) = 4
  GaussianPoly d = poly({G("1"), G("0"), G("1")});
  GaussianPoly e = poly({G("-1"), G("0"), G("1")});
  CHECK(resultant(d, e) == G("4"));
}

TEST_CASE("aberth on simple roots") {
  // (w-1)(w+2)(w-3i): roots {1, -2, 3i}
  GaussianPoly p = poly({G("-1"), G("1")}) * poly({G("2"), G("1")}) * poly({G("-3i"), G("1")});
  auto roots = aberth(p.complex_coeffs());
  REQUIRE(roots.size() == 3);
  auto has = [&](Complex w) {
    return std::any_of(roots.begin(), roots.end(), [&](Complex r) { return std::abs(r - w) < 1e-9; });
  };
  CHECK(has({1, 0}));
  CHECK(has({-2, 0}));
  CHECK(has({0, 3}));
}

TEST_CASE("find_roots recovers exact rational roots with multiplicity") {
  // (w - 1/2)^2 (w - i)
  GaussianPoly p = poly({G("1/4"), G("-1"), G("1")}) * poly({G("-i"), G("1")});
  auto roots = find_roots(p);
  REQUIRE(roots.size() == 2);
  int total = 0;
  for (const auto& r : roots) {
    total += r.multiplicity;
    REQUIRE(r.exact.has_value());
    if (*r.exact == G("1/2")) CHECK(r.multiplicity == 2);
    if (*r.exact == G("i")) CHECK(r.multiplicity == 1);
  }
  CHECK(total == 3);
}

TEST_CASE("find_roots on the rabbit fixed-point cubic") {
  // w^3 - w^2 + 1: real root near -0.7548776662466928
  GaussianPoly p = poly({G("1"), G("0"), G("-1"), G("1")});
  auto roots = find_roots(p);
  int total = 0;
  bool found_real = false;
  for (const auto& r : roots) {
    total += r.multiplicity;
    if (std::abs(r.z.imag()) < 1e-9) {
      found_real = true;
      // Bisection oracle: f(-0.7548777) < 0 < f(-0.7548776)
      CHECK(r.z.real() == doctest::Approx(-0.7548776662466928).epsilon(1e-10));
    }
  }
  CHECK(total == 3);
  CHECK(found_real);
}

TEST_CASE("chordal metric") {
  CHECK(chordal(SpherePoint::infinity(), SpherePoint::infinity()) == 0);
  CHECK(chordal(SpherePoint::at({0, 0}), SpherePoint::infinity()) == doctest::Approx(1.0));
  CHECK(chordal(SpherePoint::at({1, 0}), SpherePoint::at({1, 0})) == 0);
}
