#include "thurston/lambda_engine.hpp"

#include "doctest.h"

using namespace thurston;

namespace {

PullbackSpec blowup_spec() {
  // Declared combinatorics of the blown-up degree-4 integral Lattes map
  // (degree 5): the vertical curve pulls back to itself with degree 1, the
  // horizontal one to two degree-2 copies of itself, and the diagonal dies.
  PullbackSpec s;
  s.domain_curves = {"gv", "gh", "gd"};
  s.codomain_curves = {"gv", "gh", "gd"};
  s.entries = {
      {{"gv", 1}, {"o", 2}, {"o", 2}},
      {{"gh", 2}, {"gh", 2}, {"o", 1}},
      {{"o", 5}},
  };
  s.covering_degree = Int(5);
  return s;
}

LambdaMatrix mat2(const Rational& a, const Rational& b, const Rational& c, const Rational& d) {
  LambdaMatrix m({"a", "b"}, {"a", "b"});
  m.at(0, 0) = a; m.at(0, 1) = b; m.at(1, 0) = c; m.at(1, 1) = d;
  return m;
}

Portrait z2i_gmap_portrait() {
  Portrait p;
  p.points = {"0", "1", "2", "inf"};
  p.map = {{"0", "inf"}, {"1", "1"}, {"2", "0"}, {"inf", "1"}};
  p.local_degree = {{"0", Int(2)}, {"2", Int(2)}, {"1", Int(1)}, {"inf", Int(1)}};
  p.degree = Int(2);
  return p;
}

}  // namespace

TEST_CASE("build_lambda formula instances") {
  PullbackSpec s;
  s.domain_curves = {"g"};
  s.codomain_curves = {"g"};
  s.entries = {{{"g", 2}, {"g", 2}}};
  LambdaMatrix m = build_lambda(s);
  CHECK(m.at(0, 0) == 1);

  s.entries = {{{"o", 2}, {"o", 2}}};
  m = build_lambda(s);
  CHECK(m.at(0, 0) == 0);
  CHECK(kernel_columns(m) == std::vector<std::string>{"g"});
}

TEST_CASE("build_lambda on the blowup fixture") {
  LambdaMatrix m = build_lambda(blowup_spec());
  CHECK(m.at(0, 0) == 1);  // lambda(gv) = gv exactly
  CHECK(m.at(1, 1) == 1);  // lambda(gh) = gh exactly
  CHECK(kernel_columns(m) == std::vector<std::string>{"gd"});
}

TEST_CASE("malformed specs are rejected") {
  PullbackSpec s;
  s.domain_curves = {"a"};
  s.codomain_curves = {"b"};
  s.entries = {{{"c", 1}}};
  CHECK_THROWS_AS(build_lambda(s), Error);
  s.entries = {{{"b", 0}}};
  CHECK_THROWS_AS(build_lambda(s), Error);
  s.entries = {{{"b", 3}, {"b", 3}}};
  s.covering_degree = Int(5);
  CHECK_THROWS_AS(build_lambda(s), Error);
}

TEST_CASE("invariance levels") {
  PullbackSpec empty;
  CHECK(invariance_check(empty).kind == InvarianceKind::CompletelyInvariant);

  CHECK(invariance_check(blowup_spec()).kind == InvarianceKind::Invariant);

  PullbackSpec s = blowup_spec();
  s.entries[2] = {{"gd", 1}};
  CHECK(invariance_check(s).kind == InvarianceKind::CompletelyInvariant);

  PullbackSpec esc;
  esc.domain_curves = {"a"};
  esc.codomain_curves = {"a", "b"};
  esc.entries = {{{"b", 1}}};
  auto r = invariance_check(esc);
  CHECK(r.kind == InvarianceKind::Neither);
  CHECK(r.escaping == std::vector<std::string>{"b"});
}

TEST_CASE("orbifold signature of the z2i g-map is the Euclidean (2,4,4)") {
  OrbifoldSignature sig = orbifold_signature(z2i_gmap_portrait());
  CHECK(sig.signature() == std::vector<std::string>{"2", "4", "4"});
  CHECK(sig.euler == 0);
  CHECK(sig.euclidean());
}

TEST_CASE("orbifold signature trivial case") {
  Portrait p;
  p.points = {"a", "b", "c"};
  p.map = {{"a", "b"}, {"b", "a"}, {"c", "c"}};
  OrbifoldSignature sig = orbifold_signature(p);
  for (const auto& x : p.points) CHECK(sig.nu.at(x) == Nu(Int(1)));
  CHECK(sig.euler == 2);
}

TEST_CASE("orbifold signature of the z^2+i polynomial portrait is hyperbolic") {
  // Hand lcm-fixpoint oracle: nu = (2, 2, 2, inf), chi = -1/2.
  Portrait p;
  p.points = {"i", "i-1", "-i", "inf"};
  p.map = {{"i", "i-1"}, {"i-1", "-i"}, {"-i", "i-1"}, {"inf", "inf"}};
  p.local_degree = {{"inf", Int(2)}};
  p.extra_critical = {{"i", {Int(2)}}};
  p.degree = Int(2);
  OrbifoldSignature sig = orbifold_signature(p);
  CHECK(sig.nu.at("i") == Nu(Int(2)));
  CHECK(sig.nu.at("i-1") == Nu(Int(2)));
  CHECK(sig.nu.at("-i") == Nu(Int(2)));
  CHECK(!sig.nu.at("inf").has_value());
  CHECK(sig.euler == Rational(-1, 2));
  CHECK(sig.hyperbolic());
}

TEST_CASE("nu is pointwise minimal on small portraits") {
  auto violates = [](const Portrait& p, const OrbifoldSignature& sig, const std::string& pt,
                     const Int& smaller) {
    // Divisibility edges: nu(f(y)) divisible by nu(y)*deg(y); extra critical
    // degrees divide nu at their image.
    auto val = [&](const std::string& x) -> Nu {
      if (x == pt) return smaller;
      return sig.nu.at(x);
    };
    for (const auto& y : p.points) {
      const std::string& x = p.map.at(y);
      Nu ny = val(y), nx = val(x);
      Int d = p.local_degree.count(y) ? p.local_degree.at(y) : Int(1);
      if (!ny) { if (nx) return true; continue; }
      if (!nx) continue;
      if (*nx % (*ny * d) != 0) return true;
    }
    for (const auto& [x, ds] : p.extra_critical) {
      Nu nx = val(x);
      if (!nx) continue;
      for (const Int& d : ds)
        if (*nx % d != 0) return true;
    }
    return false;
  };

  std::vector<Portrait> portraits{z2i_gmap_portrait()};
  Portrait q;
  q.points = {"a", "b"};
  q.map = {{"a", "b"}, {"b", "a"}};
  q.extra_critical = {{"a", {Int(3)}}, {"b", {Int(2), Int(2)}}};
  portraits.push_back(q);
  for (const auto& p : portraits) {
    OrbifoldSignature sig = orbifold_signature(p);
    for (const auto& x : p.points) {
      Nu v = sig.nu.at(x);
      if (!v || *v == 1) continue;
      for (Int d = 1; d < *v; ++d)
        if (*v % d == 0) CHECK(violates(p, sig, x, d));
    }
  }
}

TEST_CASE("spectral radius exact cases") {
  LambdaMatrix one({"g"}, {"g"});
  one.at(0, 0) = 1;
  auto r = spectral_radius(one);
  CHECK(r.exact);
  CHECK(r.lo == 1);
  CHECK(r.rayleigh_quotient(one) == 1);

  LambdaMatrix zero = mat2(0, 0, 0, 0);
  r = spectral_radius(zero);
  CHECK(r.exact);
  CHECK(r.lo == 0);
  CHECK(r.rayleigh_quotient(zero) == 0);

  LambdaMatrix nilpotent = mat2(0, 1, 0, 0);
  r = spectral_radius(nilpotent);
  CHECK(r.exact);
  CHECK(r.lo == 0);
  CHECK(r.rayleigh_quotient(nilpotent) == 0);

  LambdaMatrix defective = mat2(1, 1, 0, 1);
  r = spectral_radius(defective);
  CHECK(r.exact);
  CHECK(r.lo == 1);

  LambdaMatrix swap = mat2(0, 1, 1, 0);
  r = spectral_radius(swap);
  CHECK(r.exact);
  CHECK(r.lo == 1);

  LambdaMatrix rational = mat2(Rational(1, 3), Rational(1, 3), Rational(1, 2), Rational(1, 2));
  // char poly x^2 - (5/6)x: roots {0, 5/6}
  r = spectral_radius(rational);
  CHECK(r.exact);
  CHECK(r.lo == Rational(5, 6));
  CHECK(r.rayleigh_quotient(rational) == Rational(5, 6));
}

TEST_CASE("spectral radius certified interval around sqrt(1/2)") {
  LambdaMatrix m = mat2(0, 1, Rational(1, 2), 0);
  auto r = spectral_radius(m);
  CHECK(!r.exact);
  CHECK(r.hi - r.lo <= Rational(1, Int("1000000000")));
  // Exact: lo^2 <= 1/2 <= hi^2 brackets the true value sqrt(1/2).
  CHECK(r.lo * r.lo <= Rational(1, 2));
  CHECK(r.hi * r.hi >= Rational(1, 2));
  // Invariant: the interval contains the witness's Rayleigh quotient.
  Rational q = r.rayleigh_quotient(m);
  CHECK(r.lo <= q);
  CHECK(q <= r.hi);
}

TEST_CASE("spectral radius rejects non-square input") {
  LambdaMatrix m({"a", "b"}, {"a"});
  CHECK_THROWS_AS(spectral_radius(m), Error);
  LambdaMatrix mismatch({"a", "b"}, {"a", "c"});
  CHECK_THROWS_AS(spectral_radius(mismatch), Error);
}

TEST_CASE("spectral radius by certified power iteration (n > 8)") {
  const size_t n = 9;
  std::vector<std::string> ids;
  for (size_t i = 0; i < n; ++i) ids.push_back("c" + std::to_string(i));
  LambdaMatrix m(ids, ids);
  for (size_t i = 0; i < n; ++i) m.at(i, (i + 1) % n) = 1;
  m.at(0, 0) = 1;
  auto r = spectral_radius(m);
  CHECK(r.hi - r.lo <= Rational(1, Int("1000000000")));
  CHECK(r.lo >= 1);
  CHECK(r.hi <= 2);
  Rational q = r.rayleigh_quotient(m);
  CHECK(r.lo <= q);
  CHECK(q <= r.hi);
}

TEST_CASE("block matrix of a disjoint union spec") {
  PullbackSpec a;
  a.domain_curves = {"a1"};
  a.codomain_curves = {"a1"};
  a.entries = {{{"a1", 2}}};
  PullbackSpec b;
  b.domain_curves = {"b1", "b2"};
  b.codomain_curves = {"b1", "b2"};
  b.entries = {{{"b2", 1}}, {{"b1", 4}, {"b1", 4}}};

  PullbackSpec u;
  u.domain_curves = a.domain_curves;
  u.codomain_curves = a.codomain_curves;
  u.entries = a.entries;
  u.domain_curves.insert(u.domain_curves.end(), b.domain_curves.begin(), b.domain_curves.end());
  u.codomain_curves.insert(u.codomain_curves.end(), b.codomain_curves.begin(), b.codomain_curves.end());
  u.entries.insert(u.entries.end(), b.entries.begin(), b.entries.end());

  LambdaMatrix ma = build_lambda(a), mb = build_lambda(b), mu = build_lambda(u);
  for (size_t i = 0; i < mu.rows(); ++i)
    for (size_t j = 0; j < mu.cols(); ++j) {
      Rational expect(0);
      if (i < ma.rows() && j < ma.cols()) expect = ma.at(i, j);
      if (i >= ma.rows() && j >= ma.cols()) expect = mb.at(i - ma.rows(), j - ma.cols());
      CHECK(mu.at(i, j) == expect);
    }
}

TEST_CASE("thurston verdict") {
  // The blowup portrait: marked points all map to a with degree 1; the two
  // blown-up arc endpoints give {3,2} fibers over b and c, the remaining
  // Lattes critical pair {2,2} over d. nu = (6,6,6,2), chi = -1.
  Portrait hyp;
  hyp.points = {"a", "b", "c", "d"};
  hyp.map = {{"a", "a"}, {"b", "a"}, {"c", "a"}, {"d", "a"}};
  hyp.extra_critical = {{"b", {Int(3), Int(2)}}, {"c", {Int(3), Int(2)}}, {"d", {Int(2), Int(2)}}};
  hyp.degree = Int(5);
  OrbifoldSignature hyperbolic = orbifold_signature(hyp);
  CHECK(hyperbolic.euler == -1);
  REQUIRE(hyperbolic.hyperbolic());

  LambdaMatrix blowup = build_lambda(blowup_spec());
  auto v = thurston_verdict(blowup, hyperbolic);
  CHECK(v.obstructed);  // rho = 1 exactly
  CHECK(v.rho.exact);
  CHECK(v.rho.lo == 1);

  LambdaMatrix zero = mat2(0, 0, 0, 0);
  CHECK(!thurston_verdict(zero, hyperbolic).obstructed);

  LambdaMatrix root_half = mat2(0, 1, Rational(1, 2), 0);
  CHECK(!thurston_verdict(root_half, hyperbolic).obstructed);

  OrbifoldSignature euclid = orbifold_signature(z2i_gmap_portrait());
  CHECK_THROWS_AS(thurston_verdict(root_half, euclid), Error);
}
