#include "thurston/geometric_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace thurston {

// Twist sign convention, calibrated once against the curve algebra: the
// consistency tests pin act(x, 0/1) = 2/1 and act(y, 1/0) = -1/2.
int kTwistSignX = 1;
int kTwistSignY = 1;

namespace {

GaussianRational gr(long long re_num, long long re_den, long long im_num, long long im_den) {
  return GaussianRational(Rational(re_num, re_den), Rational(im_num, im_den));
}

// ------------------------- door words on the fixture ------------------------

struct OracleStar {
  Complex base;
  // arcs to 0, 1, m, and a far ray for infinity; order fixed as
  // letters 1 = around 0, 2 = around 1, 3 = around m, 4 = around inf.
  std::array<std::vector<Complex>, 4> arcs;
  std::array<double, 4> angles;
  DoorWord inf_substitution;  // u_inf expressed in the finite letters

  static OracleStar build(const PolynomialFixture& fixture, int attempt = 0);
};

double angle_of(Complex z) { return std::atan2(z.imag(), z.real()); }

OracleStar OracleStar::build(const PolynomialFixture& fixture, int attempt) {
  OracleStar star;
  Complex m = fixture.m.to_complex();
  star.base = Complex{-0.75, -0.85} +
              0.11 * attempt * Complex{std::cos(2.1 * attempt), std::sin(1.3 * attempt)};
  std::array<Complex, 3> targets{Complex{0, 0}, Complex{1, 0}, m};
  for (int j = 0; j < 3; ++j) {
    star.arcs[j] = {star.base, targets[j]};
    star.angles[j] = angle_of(targets[j] - star.base);
  }
  star.arcs[3] = {star.base, star.base + 48.0 * Complex{std::cos(-2.25), std::sin(-2.25)}};
  star.angles[3] = -2.25;

  // The angular relation: the product of the star generators in CCW order is
  // trivial; solve it for u_inf.
  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return star.angles[a] < star.angles[b]; });
  // rotate so the cycle starts right after the infinity letter
  std::vector<int> after;
  int pos = 0;
  for (int i = 0; i < 4; ++i)
    if (order[i] == 3) pos = i;
  for (int i = 1; i < 4; ++i) after.push_back(order[(pos + i) % 4]);
  // u_inf = (u_{a} u_{b} u_{c})^{-1} in that CCW order
  DoorWord prod;
  for (int j : after) prod.push_back(j + 1);
  star.inf_substitution = door_inverse(prod);
  return star;
}

bool seg_cross(Complex a, Complex b, Complex c, Complex d, double* t_out, int* sign_out) {
  Complex r = b - a, s = d - c;
  double cross_rs = r.real() * s.imag() - r.imag() * s.real();
  if (std::abs(cross_rs) < 1e-14 * (std::abs(r) * std::abs(s) + 1e-300)) return false;
  Complex ac = c - a;
  double t = (ac.real() * s.imag() - ac.imag() * s.real()) / cross_rs;
  double u = (ac.real() * r.imag() - ac.imag() * r.real()) / cross_rs;
  const double band = 1e-9;
  bool inside = t > band && t < 1 - band && u > band && u < 1 - band;
  bool outside = t < -band || t > 1 + band || u < -band || u > 1 + band;
  if (inside) {
    *t_out = t;
    *sign_out = cross_rs > 0 ? 1 : -1;
    return true;
  }
  if (outside) return false;
  *t_out = std::nan("");
  return true;
}

// Winding number of a closed polyline around a point; robust via summed
// angle increments.
int winding_number(const std::vector<Complex>& curve, Complex z0) {
  double total = 0;
  for (size_t i = 0; i + 1 < curve.size(); ++i) {
    Complex a = curve[i] - z0, b = curve[i + 1] - z0;
    total += std::arg(b / a);
  }
  double turns = total / (2 * M_PI);
  long k = std::lround(turns);
  if (std::abs(turns - k) > 0.2)
    throw Error(ErrorCode::RepresentativeDegenerate, "winding number did not close up");
  return static_cast<int>(k);
}

// Substituted, cyclically reduced door word of a closed polyline.
DoorWord closed_door_word(const OracleStar& star, const std::vector<Complex>& curve) {
  struct Hit {
    double pos;
    int letter;
  };
  std::vector<Hit> hits;
  for (size_t si = 0; si + 1 < curve.size(); ++si) {
    for (int j = 0; j < 4; ++j) {
      const auto& arc = star.arcs[j];
      for (size_t ai = 0; ai + 1 < arc.size(); ++ai) {
        double t;
        int sign;
        if (!seg_cross(curve[si], curve[si + 1], arc[ai], arc[ai + 1], &t, &sign)) continue;
        if (std::isnan(t))
          throw Error(ErrorCode::RepresentativeDegenerate,
                      "curve crosses an arc too close to an endpoint");
        hits.push_back({static_cast<double>(si) + t, sign > 0 ? j + 1 : -(j + 1)});
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.pos < b.pos; });
  DoorWord w;
  for (const auto& h : hits) {
    if (std::abs(h.letter) == 4) {
      DoorWord sub = h.letter > 0 ? star.inf_substitution : door_inverse(star.inf_substitution);
      w = door_concat(w, sub);
    } else {
      w = door_concat(w, {h.letter});
    }
  }
  // cyclic reduction
  while (w.size() >= 2 && w.front() == -w.back()) {
    w.erase(w.begin());
    w.pop_back();
  }
  // The abelianization must match the exact winding numbers around the
  // finite punctures; a mismatch means a crossing was missed (near-tangent
  // geometry) and the caller should retry with a perturbed star.
  int expo[3] = {0, 0, 0};
  for (int l : w) expo[std::abs(l) - 1] += l > 0 ? 1 : -1;
  Complex pts[3] = {Complex{0, 0}, Complex{1, 0}, star.arcs[2].back()};
  for (int j = 0; j < 3; ++j)
    if (expo[j] != winding_number(curve, pts[j]))
      throw Error(ErrorCode::CrossingAmbiguous, "door word disagrees with winding numbers");
  return w;
}

bool cyclic_equal_unoriented(const DoorWord& a, const DoorWord& b) {
  if (a.size() != b.size()) return false;
  if (a.empty()) return true;
  auto rot_eq = [](const DoorWord& u, const DoorWord& v) {
    for (size_t shift = 0; shift < u.size(); ++shift) {
      bool eq = true;
      for (size_t i = 0; i < u.size() && eq; ++i) eq = u[(shift + i) % u.size()] == v[i];
      if (eq) return true;
    }
    return false;
  };
  DoorWord binv = door_inverse(b);
  return rot_eq(a, b) || rot_eq(a, binv);
}

bool is_trivial_class(const DoorWord& w, const DoorWord& inf_sub) {
  if (w.empty()) return true;
  bool single = true;
  for (int l : w) single = single && l == w[0];
  if (single) return true;  // a power of one finite-puncture letter
  // powers of the infinity substitution word, up to rotation and inverse
  size_t n = inf_sub.size();
  if (n == 0 || w.size() % n != 0) return false;
  DoorWord pow_f, pow_b;
  DoorWord inv = door_inverse(inf_sub);
  for (size_t i = 0; i < w.size() / n; ++i) {
    pow_f = door_concat(pow_f, inf_sub);
    pow_b = door_concat(pow_b, inv);
  }
  auto rot_eq = [&](const DoorWord& u) {
    if (u.size() != w.size()) return false;
    for (size_t shift = 0; shift < u.size(); ++shift) {
      bool eq = true;
      for (size_t i = 0; i < u.size() && eq; ++i) eq = u[(shift + i) % u.size()] == w[i];
      if (eq) return true;
    }
    return false;
  };
  return rot_eq(pow_f) || rot_eq(pow_b);
}

// ------------------------ curve construction by twists ----------------------

struct TwistSpec {
  Complex center;
  double r0, r1;
  int direction;  // +1 or -1 full turn across the annulus
};

Complex apply_twist_point(const TwistSpec& t, Complex z) {
  double rho = std::abs(z - t.center);
  if (rho <= t.r0 || rho >= t.r1) return z;
  double frac = (t.r1 - rho) / (t.r1 - t.r0);
  double theta = 2 * M_PI * t.direction * frac;
  return t.center + (z - t.center) * Complex{std::cos(theta), std::sin(theta)};
}

std::vector<Complex> resample(const std::vector<Complex>& curve, double step, size_t cap) {
  std::vector<Complex> out;
  out.push_back(curve.front());
  for (size_t i = 0; i + 1 < curve.size(); ++i) {
    Complex a = curve[i], b = curve[i + 1];
    double len = std::abs(b - a);
    int pieces = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = 1; k <= pieces; ++k)
      out.push_back(a + (b - a) * (static_cast<double>(k) / pieces));
    if (out.size() > cap) {
      if (getenv("ORACLE_DEBUG"))
        fprintf(stderr, "[explode] in.size=%zu step=%g out=%zu\n", curve.size(), step, out.size());
      throw Error(ErrorCode::RepresentativeDegenerate, "curve representative exploded");
    }
  }
  return out;
}

// Collapse maximal runs lying in a `dev`-tube of a straight line. The curve
// moves by at most ~2*dev, far inside every puncture clearance, and the tube
// is puncture-free, so the homotopy class is untouched.
std::vector<Complex> thin(const std::vector<Complex>& curve, double dev) {
  std::vector<Complex> out{curve.front()};
  size_t anchor = 0;
  Complex dir{0, 0};
  bool have_dir = false;
  for (size_t i = 1; i < curve.size(); ++i) {
    Complex rel = curve[i] - curve[anchor];
    if (!have_dir) {
      if (std::abs(rel) < 1e-12) continue;
      dir = rel / std::abs(rel);
      have_dir = true;
      continue;
    }
    double deviation = std::abs((rel * std::conj(dir)).imag());
    if (deviation <= dev) continue;
    out.push_back(curve[i - 1]);
    anchor = i - 1;
    rel = curve[i] - curve[anchor];
    have_dir = std::abs(rel) >= 1e-12;
    if (have_dir) dir = rel / std::abs(rel);
  }
  out.push_back(curve.back());
  return out;
}

std::vector<Complex> apply_twist(const TwistSpec& t, std::vector<Complex> curve) {
  // Sample finely enough that the IMAGE segments stay short (the twist
  // stretches by up to 1 + 2 pi r1/(r1-r0)), then collapse straight runs.
  // Punctures can sit within ~0.03 of the annulus, so image segments must be
  // well below that to preserve the homotopy class.
  double stretch = 1.0 + 2 * M_PI * t.r1 / (t.r1 - t.r0);
  curve = resample(curve, 0.008 / stretch, 12000000);
  for (auto& z : curve) z = apply_twist_point(t, z);
  // The next twist amplifies any thinning error by its stretch factor, so
  // the deviation budget must stay well below clearance/stretch.
  return thin(curve, 1e-4);
}

struct CurveBuilder {
  PolynomialFixture fixture;
  TwistSpec twist_x, twist_y;
  std::array<std::vector<Complex>, 3> bases;  // E0, E1, EINF base curves
  OracleStar star;

  explicit CurveBuilder(const PolynomialFixture& f) : fixture(f), star(OracleStar::build(f)) {
    Complex m = fixture.m.to_complex();
    // Base curves as focal ellipses with verified clearances (m = 2i):
    // E0: around {0, m}; E1: around {1, m}; EINF: around {0, 1}.
    bases[0] = ellipse((Complex{0, 0} + m) / 2.0, Complex{0, 0}, m, 1.3);
    bases[1] = ellipse((Complex{1, 0} + m) / 2.0, Complex{1, 0}, m, 1.25);
    bases[2] = ellipse(Complex{0.5, 0}, Complex{0, 0}, Complex{1, 0}, 1.6);
    // Twist annuli: round circles isotopic to the E0 and E1 bases.
    twist_x = {Complex{0, 1}, 1.08, 1.36, kTwistSignX};
    twist_y = {Complex{0.947, 1.224}, 1.25, 1.45, kTwistSignY};
  }

  static std::vector<Complex> ellipse(Complex center, Complex f1, Complex f2, double a) {
    Complex axis = f2 - f1;
    double c = std::abs(axis) / 2;
    double b = std::sqrt(a * a - c * c);
    Complex major = axis / std::abs(axis);
    Complex minor = major * Complex{0, 1};
    std::vector<Complex> out;
    const int n = 160;
    for (int i = 0; i <= n; ++i) {
      double th = 2 * M_PI * i / n;
      out.push_back(center + major * (a * std::cos(th)) + minor * (b * std::sin(th)));
    }
    return out;
  }

  std::vector<Complex> curve_for(const Slope& s) const {
    FreeWord w = slope_to_word(s);
    int base_idx = s.parity() == ParityClass::E0 ? 0 : s.parity() == ParityClass::E1 ? 1 : 2;
    std::vector<Complex> curve = bases[base_idx];
    // act(w, base) applies the leftmost letter last in matrix order, so the
    // homeomorphisms compose with the rightmost letter acting first.
    const auto& ls = w.letters();
    for (auto it = ls.rbegin(); it != ls.rend(); ++it) {
      TwistSpec t;
      switch (*it) {
        case Letter::x: t = twist_x; break;
        case Letter::X: t = twist_x; t.direction = -t.direction; break;
        case Letter::y: t = twist_y; break;
        case Letter::Y: t = twist_y; t.direction = -t.direction; break;
      }
      curve = apply_twist(t, curve);
    }
    return curve;
  }

  // A word w with act(w, base(parity)) = s, built from an explicit Gamma(2)
  // matrix with the prescribed column.
  static FreeWord slope_to_word(const Slope& s) {
    const Int p = s.p(), q = s.q();
    auto build = [&](Int a, Int b, Int c, Int d) { return word_of_matrix(TwistMatrix(a, b, c, d)); };
    switch (s.parity()) {
      case ParityClass::E0: {
        // M (1,0)^T = (p,q): first column (p,q); p d - q b = 1 with d odd
        // (automatic mod 2) and b even (adjustable since p is odd).
        auto [g, x0, y0] = ext_gcd(p, q);
        if (g < 0) { x0 = -x0; y0 = -y0; }
        Int d0 = x0, b0 = -y0;
        for (Int k : {Int(0), Int(1), Int(-1), Int(2), Int(-2)}) {
          Int bb = b0 + k * p, dd = d0 + k * q;
          if (bb % 2 == 0 && dd % 2 != 0) return build(p, bb, q, dd);
        }
        break;
      }
      case ParityClass::E1: {
        // M (0,1)^T = (p,q): second column (p,q); a q - c p = 1 with a odd
        // (automatic) and c even (adjustable since q is odd).
        auto [g, x0, y0] = ext_gcd(q, p);
        if (g < 0) { x0 = -x0; y0 = -y0; }
        Int a0 = x0, c0 = -y0;
        for (Int k : {Int(0), Int(1), Int(-1), Int(2), Int(-2)}) {
          Int aa = a0 + k * p, cc = c0 + k * q;
          if (aa % 2 != 0 && cc % 2 == 0) return build(aa, p, cc, q);
        }
        break;
      }
      case ParityClass::EINF: {
        // M (1,1)^T = (p,q): solve p d + a q = 1 + p q over odd a, d; the
        // determinant is then 1 identically and b, c are even automatically.
        // Smallest |a| first, so short words come out of the reduction.
        Int range = 2 * abs(p) + 2 * abs(q) + 3;
        for (Int step = 0; step <= 2 * range; ++step) {
          Int a = (step % 2 == 0) ? Int(step / 2) : Int(-(step / 2) - 1);
          if (a % 2 == 0) continue;
          Int num = 1 + p * q - a * q;
          if (num % p != 0) continue;
          Int d = num / p;
          if (d % 2 == 0) continue;
          Int b = p - a, c = q - d;
          if (b % 2 != 0 || c % 2 != 0) continue;
          if (a * d - b * c != 1) continue;
          return build(a, b, c, d);
        }
        break;
      }
    }
    throw Error(ErrorCode::RepresentativeDegenerate,
                "no Gamma(2) word found for slope " + s.str());
  }

  static std::tuple<Int, Int, Int> ext_gcd(Int a, Int b) {
    if (b == 0) return {a, 1, 0};
    auto [g, x, y] = ext_gcd(b, Int(a % b));
    return {g, y, Int(x - (a / b) * y)};
  }
};

}  // namespace

PolynomialFixture z2i_polynomial_fixture() {
  // z^2 + i with postcritical set {i, i-1, -i, inf}, conjugated by
  // mu(z) = i - z so the marked points sit at {0, 1, 2i, inf}:
  // F(w) = -(w - i)^2 = -w^2 + 2i w + 1.
  GaussianPoly num(std::vector<GaussianRational>{
      gr(1, 1, 0, 1), gr(0, 1, 2, 1), gr(-1, 1, 0, 1)});
  GaussianPoly den(std::vector<GaussianRational>{gr(1, 1, 0, 1)});
  return {RationalMap(std::move(num), std::move(den)), gr(0, 1, 2, 1)};
}

std::vector<Complex> oracle_curve(const Slope& s, const PolynomialFixture& fixture) {
  CurveBuilder builder(fixture);
  return builder.curve_for(s);
}

Slope oracle_classify(const std::vector<Complex>& curve, const PolynomialFixture& fixture,
                      const Int& height_bound) {
  // Near-tangent crossings can slip past the segment predicate; a winding
  // mismatch inside closed_door_word detects that, and a perturbed star
  // makes the geometry transversal.
  Error last(ErrorCode::RepresentativeDegenerate, "unreadable curve");
  for (int attempt = 0; attempt < 6; ++attempt) {
    OracleStar star = OracleStar::build(fixture, attempt);
    CurveBuilder builder(fixture);
    try {
      DoorWord w = closed_door_word(star, curve);
      if (getenv("ORACLE_DEBUG") && attempt == 0) {
        fprintf(stderr, "[classify] len %zu:", w.size());
        for (int l : w) fprintf(stderr, " %d", l);
        fprintf(stderr, "\n");
      }
      if (is_trivial_class(w, star.inf_substitution)) return Slope::trivial();
      for (Int h = 1; h <= height_bound; ++h) {
        for (Int q = 0; q <= h; ++q)
          for (Int p = (q == 0 ? Int(1) : Int(-h)); p <= (q == 0 ? Int(1) : h); ++p) {
            if (q != 0 && gcd(abs(p), q) != 1) continue;
            Slope cand(p, q);
            if (cand.height() != h) continue;
            DoorWord cw = closed_door_word(star, builder.curve_for(cand));
            if (cyclic_equal_unoriented(w, cw)) return cand;  // curve_for mirrors internally
          }
      }
      throw Error(ErrorCode::RepresentativeDegenerate,
                  "component matched no slope within the bound");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CrossingAmbiguous) throw;
      last = e;
    }
  }
  throw last;
}

SlopePullbackResult geometric_oracle(const Slope& s, const PolynomialFixture& fixture) {
  if (s.is_trivial()) throw Error(ErrorCode::TrivialCurve, "cannot pull back o");
  CurveBuilder builder(fixture);
  std::vector<Complex> curve = resample(builder.curve_for(s), 0.01, 4000000);

  // Lift the closed curve through the polynomial: continue every fiber point
  // along one lap and read off the sheet permutation.
  const RationalMap& F = fixture.polynomial;
  const int d = F.degree();
  std::vector<Complex> start;
  for (const auto& [pt, mult] : F.preimages(SpherePoint::at(curve.front()))) {
    if (pt.is_inf)
      throw Error(ErrorCode::RepresentativeDegenerate, "curve base point has a lift at infinity");
    for (int k = 0; k < mult; ++k) start.push_back(pt.z);
  }
  if (static_cast<int>(start.size()) != d)
    throw Error(ErrorCode::RepresentativeDegenerate, "bad fiber over the curve basepoint");

  auto newton = [&](Complex target, Complex w, bool& ok) {
    ok = false;
    for (int it = 0; it < 40; ++it) {
      Complex f = F.eval_finite(w) - target;
      if (std::abs(f) < 1e-11 * (1 + std::abs(target))) { ok = true; return w; }
      Complex df = F.derivative(w);
      if (std::abs(df) < 1e-14) return w;
      w -= f / df;
    }
    ok = std::abs(F.eval_finite(w) - target) < 1e-11 * (1 + std::abs(target));
    return w;
  };

  std::vector<std::vector<Complex>> lap_paths(d);
  std::vector<Complex> cur = start;
  for (int i = 0; i < d; ++i) lap_paths[i].push_back(start[i]);
  for (size_t seg = 0; seg + 1 < curve.size(); ++seg) {
    Complex a = curve[seg], b = curve[seg + 1];
    double lo = 0, hi = 1;
    int halvings = 0;
    while (lo < 1) {
      Complex target = a + hi * (b - a);
      std::vector<Complex> next = cur;
      bool all_ok = true;
      for (int i = 0; i < d && all_ok; ++i) {
        bool ok;
        next[i] = newton(target, cur[i], ok);
        double sep = 1e300;
        for (int j = 0; j < d; ++j)
          if (j != i) sep = std::min(sep, std::abs(cur[i] - cur[j]));
        all_ok = ok && std::abs(next[i] - cur[i]) < 0.45 * sep;
      }
      if (all_ok) {
        cur = next;
        for (int i = 0; i < d; ++i) lap_paths[i].push_back(cur[i]);
        lo = hi;
        hi = 1;
        halvings = 0;
      } else {
        hi = lo + (hi - lo) / 2;
        if (++halvings > 48)
          throw Error(ErrorCode::RepresentativeDegenerate, "curve lift stalled");
      }
    }
  }
  Perm sigma(d, -1);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j)
      if (std::abs(cur[i] - start[j]) < 1e-6) sigma[i] = j;
    if (sigma[i] < 0)
      throw Error(ErrorCode::RepresentativeDegenerate, "lift endpoint missed the fiber");
  }

  // Components = cycles of sigma; degree = cycle length; the component path
  // is the concatenation of the lifted laps along the cycle.
  std::vector<bool> seen(d, false);
  std::map<Slope, Rational> weights;
  for (int i = 0; i < d; ++i) {
    if (seen[i]) continue;
    std::vector<Complex> component;
    int k = 0, curi = i;
    do {
      seen[curi] = true;
      const auto& path = lap_paths[curi];
      component.insert(component.end(), path.begin(), path.end());
      curi = sigma[curi];
      ++k;
    } while (curi != i);
    component.push_back(component.front());
    Slope cls = oracle_classify(component, fixture);
    if (!cls.is_trivial()) weights[cls] += Rational(1, k);
  }

  SlopePullbackResult result;
  result.source = s;
  result.k = 0;  // not geometric
  if (weights.empty()) {
    result.image = Slope::trivial();
    result.multiplier = 0;
    return result;
  }
  if (weights.size() > 1)
    throw Error(ErrorCode::RepresentativeDegenerate,
                "pullback has several essential classes on four points");
  result.image = weights.begin()->first;
  result.multiplier = weights.begin()->second;
  return result;
}

}  // namespace thurston
