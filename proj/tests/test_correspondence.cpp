#include "thurston/correspondence.hpp"

#include "doctest.h"

using namespace thurston;

namespace {

GaussianRational G(const std::string& s) { return *GaussianRational::parse(s); }

GaussianPoly poly(std::initializer_list<GaussianRational> low_to_high) {
  return GaussianPoly(std::vector<GaussianRational>(low_to_high));
}

// Rabbit correspondence: g(w) = 1 - 1/w^2 = (w^2 - 1)/w^2.
RationalMap rabbit_map() {
  return RationalMap(poly({G("-1"), G("0"), G("1")}), poly({G("0"), G("0"), G("1")}));
}

// z^2+i correspondence: g(w) = (1 - 2/w)^2 = (w - 2)^2 / w^2.
RationalMap z2i_map() {
  return RationalMap(poly({G("4"), G("-4"), G("1")}), poly({G("0"), G("0"), G("1")}));
}

}  // namespace

TEST_CASE("rational map validation") {
  CHECK_THROWS_AS(RationalMap(poly({G("-2"), G("1")}), poly({G("1")})), Error);  // degree 1
  // shared root (w-1)/(w-1) after clearing: num = den = w-1 times stuff
  CHECK_THROWS_AS(RationalMap(poly({G("-1"), G("0"), G("1")}), poly({G("-1"), G("1")})), Error);
}

TEST_CASE("rabbit model: punctures and basepoint") {
  GMapModel model = build_model(rabbit_map(), ModelKind::XInjective);
  // g^-1({0,1,inf}) = {1,-1} u {inf} u {0}; extra puncture -1.
  REQUIRE(model.extra_punctures.size() == 1);
  REQUIRE(model.extra_punctures[0].exact.has_value());
  CHECK(*model.extra_punctures[0].exact == G("-1"));
  // Basepoint: the real root of w^3 - w^2 + 1 (bisection oracle frozen).
  CHECK(!model.basepoint.exact.has_value());
  CHECK(model.basepoint.z.real() == doctest::Approx(-0.7548776662466928).epsilon(1e-10));
  CHECK(std::abs(model.basepoint.z.imag()) < 1e-10);
}

TEST_CASE("z2i model: punctures and basepoint") {
  GMapModel model = build_model(z2i_map(), ModelKind::XInjective);
  // Interior fixed points {2i, -2i} from (w-1)(w^2+4); basepoint 2i.
  REQUIRE(model.extra_punctures.size() == 1);
  REQUIRE(model.extra_punctures[0].exact.has_value());
  CHECK(*model.extra_punctures[0].exact == G("2"));
  REQUIRE(model.basepoint.exact.has_value());
  CHECK(*model.basepoint.exact == G("2i"));
}

TEST_CASE("build_model rejects non-coverings") {
  // w^2 - w + 1 has critical value 3/4 outside the ends.
  CHECK_THROWS_AS(build_model(RationalMap(poly({G("1"), G("-1"), G("1")}), poly({G("1")})),
                              ModelKind::XInjective),
                  Error);
}

TEST_CASE("end dynamics of the rabbit: ends cycle, no fixed end") {
  GMapModel model = build_model(rabbit_map(), ModelKind::XInjective);
  EndReport report = end_dynamics(model);
  CHECK(report.no_fixed_end());
  // direct evaluation: g(0) = inf, g(inf) = 1, g(1) = 0
  for (const auto& entry : report.ends) {
    REQUIRE(entry.image.has_value());
    if (entry.end == End::Zero) CHECK(*entry.image == End::Inf);
    if (entry.end == End::Inf) CHECK(*entry.image == End::One);
    if (entry.end == End::One) CHECK(*entry.image == End::Zero);
  }
  CHECK(!report.repelling_fixed_end.has_value());
}

TEST_CASE("end dynamics of z2i: end 1 fixed with derivative -1/4") {
  GMapModel model = build_model(z2i_map(), ModelKind::XInjective);
  EndReport report = end_dynamics(model);
  REQUIRE(report.repelling_fixed_end.has_value());
  CHECK(*report.repelling_fixed_end == End::One);
  CHECK(report.obstructed_twist_end == End::One);
  for (const auto& entry : report.ends) {
    if (entry.end != End::One) continue;
    CHECK(entry.fixed);
    REQUIRE(entry.branch_derivative.has_value());
    // symbolic oracle: g'(w) = 4(w-2)/w^3, g'(1) = -4, a = -1/4
    CHECK(std::abs(*entry.branch_derivative - Complex{-0.25, 0}) < 1e-9);
  }
}

TEST_CASE("a non-attracting fixed end is reported") {
  // Constructed model (not a covering; end analysis only): g = w^2 - w + 1
  // fixes 1 with derivative exactly 1.
  RationalMap g(poly({G("1"), G("-1"), G("1")}), poly({G("1")}));
  GMapModel model{std::move(g), ModelKind::XInjective, {}, SpherePoint::at({0.5, 0.5}), {}};
  EndReport report = end_dynamics(model);
  bool saw = false;
  for (const auto& entry : report.ends)
    if (entry.end == End::One) {
      CHECK(entry.fixed);
      REQUIRE(entry.branch_derivative.has_value());
      for (const auto& v : entry.verdicts) saw = saw || v == "NotAttracting";
    }
  CHECK(saw);
}

TEST_CASE("pcf check: rabbit is PCF hyperbolic") {
  PcfReport r = pcf_hyperbolic_check(rabbit_map());
  CHECK(r.pcf);
  CHECK(r.hyperbolic);
  CHECK(r.julia_compact_invariant);
}

TEST_CASE("pcf check: z2i is PCF subhyperbolic") {
  PcfReport r = pcf_hyperbolic_check(z2i_map());
  CHECK(r.pcf);
  CHECK(!r.hyperbolic);
  CHECK(!r.julia_compact_invariant);
  REQUIRE(r.portrait.has_value());
  OrbifoldSignature sig = orbifold_signature(*r.portrait);
  CHECK(sig.euler == 0);
}

TEST_CASE("pcf check: w^2 with trivial portrait") {
  RationalMap g(poly({G("0"), G("0"), G("1")}), poly({G("1")}));
  PcfReport r = pcf_hyperbolic_check(g);
  CHECK(r.pcf);
  CHECK(r.hyperbolic);  // both critical points are fixed
}

TEST_CASE("euclidean expansion certificate") {
  ExpansionCertificate cert = euclidean_expansion_certificate(z2i_map());
  CHECK(cert.degree == 2);
  CHECK(cert.factor == doctest::Approx(std::sqrt(2.0)));
  CHECK(cert.signature.signature() == std::vector<std::string>{"2", "4", "4"});
  CHECK_THROWS_AS(euclidean_expansion_certificate(rabbit_map()), Error);
}

TEST_CASE("pcf conjugation covariance under an end permutation") {
  // Conjugate z2i's g by the Mobius involution s(w) = 1 - w swapping 0 and 1:
  // h = s o g o s has portrait the s-image of g's portrait.
  // g(1-w) = (w+1)^2/(w-1)^2; h(w) = 1 - g(1-w) = -4w/(w-1)^2.
  RationalMap h(poly({G("0"), G("-4")}), poly({G("1"), G("-2"), G("1")}));
  PcfReport rh = pcf_hyperbolic_check(h);
  PcfReport rg = pcf_hyperbolic_check(z2i_map());
  REQUIRE(rh.pcf);
  REQUIRE(rg.pcf);
  OrbifoldSignature sh = orbifold_signature(*rh.portrait);
  OrbifoldSignature sg = orbifold_signature(*rg.portrait);
  CHECK(sh.signature() == sg.signature());
  CHECK(sh.euler == sg.euler);
}

TEST_CASE("systole proxy") {
  // 2 pi^2 / (6 ln 10) at mu = 1e-6
  CHECK(systole_proxy({1e-6, 0}) == doctest::Approx(2 * M_PI * M_PI / (6 * std::log(10.0))));
  // clamp at d = 1/2
  double clamp = 2 * M_PI * M_PI / std::log(2.0);
  CHECK(systole_proxy({0.5, 0}) == doctest::Approx(clamp));
  CHECK(systole_proxy({1.5, 1}) == doctest::Approx(clamp));  // d clamped at 1/2
  CHECK_THROWS_AS(systole_proxy({0, 0}), Error);
  CHECK_THROWS_AS(systole_proxy({1, 0}), Error);
  // monotone decrease toward an end
  CHECK(systole_proxy({1e-8, 0}) < systole_proxy({1e-6, 0}));
}

TEST_CASE("inverse branch") {
  RationalMap g(poly({G("0"), G("0"), G("1")}), poly({G("1")}));  // w^2
  Complex r = inverse_branch(g, {4, 0}, {2.1, 0});
  CHECK(std::abs(r - Complex{2, 0}) < 1e-10);
  CHECK_THROWS_AS(inverse_branch(g, {4, 0}, {0, 0}), Error);  // critical seed
  // local inversion near a regular point of the z2i map
  RationalMap z2i = z2i_map();
  Complex target{1.1, 0.05};
  Complex w = inverse_branch(z2i, target, {0.95, 0});
  CHECK(std::abs(z2i.eval_finite(w) - target) < 1e-11);
}

TEST_CASE("x_properness") {
  GMapModel rabbit = build_model(rabbit_map(), ModelKind::XInjective);
  auto pr = x_properness(rabbit);
  CHECK(!pr.proper);
  REQUIRE(pr.extra_punctures.size() == 1);
  CHECK(*pr.extra_punctures[0].exact == G("-1"));

  GMapModel z2i = build_model(z2i_map(), ModelKind::XInjective);
  auto pz = x_properness(z2i);
  CHECK(!pz.proper);
  REQUIRE(pz.extra_punctures.size() == 1);
  CHECK(*pz.extra_punctures[0].exact == G("2"));
}

TEST_CASE("constant model report") {
  // The quartic example's covering Y presented by w^2.
  RationalMap y(poly({G("0"), G("0"), G("1")}), poly({G("1")}));
  GMapModel model = build_model(std::move(y), ModelKind::XConstant);
  auto report = constant_model_report(model);
  CHECK(report.y_degree == 2);
  CHECK(report.relation_constant);
  CHECK(report.lambda_constant);
  CHECK(report.phi_constant);
  CHECK(report.sigma_constant);
  CHECK(report.correspondence_constant);

  GMapModel inj = build_model(z2i_map(), ModelKind::XInjective);
  CHECK_THROWS_AS(constant_model_report(inj), Error);
  CHECK_THROWS_AS(x_properness(model), Error);
}

TEST_CASE("orbit synthesis on z2i crosses thresholds in order") {
  GMapModel model = build_model(z2i_map(), ModelKind::XInjective);
  std::vector<double> eps{0.1, 0.05};
  ModuliOrbit orbit = synthesize_orbit(model, 0.1, eps);
  CHECK(orbit.max_residual() < 1e-9);
  REQUIRE(orbit.points.size() > 4);
  // The proxy dips below each threshold, and between dips the orbit returns
  // within delta of the basepoint.
  size_t i = 0;
  for (double e : eps) {
    while (i < orbit.proxies.size() && orbit.proxies[i] >= e) ++i;
    REQUIRE(i < orbit.proxies.size());
    CHECK(orbit.labels[i] == "end");
  }
  CHECK(std::abs(orbit.points.back() - Complex{0, 2}) < 0.1 + 1e-9);
}

TEST_CASE("orbit synthesis without a repelling end fails") {
  GMapModel rabbit = build_model(rabbit_map(), ModelKind::XInjective);
  CHECK_THROWS_AS(synthesize_orbit(rabbit, 0.1, {0.1}), Error);
}

TEST_CASE("k = 0 orbit is the basepoint alone") {
  GMapModel model = build_model(z2i_map(), ModelKind::XInjective);
  ModuliOrbit orbit = synthesize_orbit(model, 0.1, {});
  REQUIRE(orbit.points.size() == 1);
  CHECK(orbit.points[0] == Complex{0, 2});
}
