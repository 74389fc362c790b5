#include "thurston/correspondence.hpp"

#include <algorithm>
#include <cmath>

namespace thurston {

namespace {

using LComplex = std::complex<long double>;

const GaussianRational kOne{Rational(1)};

GaussianRational gr_int(long long v) { return GaussianRational(Rational(v)); }

}  // namespace

// ------------------------------ RationalMap --------------------------------

RationalMap::RationalMap(GaussianPoly num, GaussianPoly den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (num_.is_zero() || den_.is_zero())
    throw Error(ErrorCode::BadArgument, "rational map needs nonzero numerator and denominator");
  degree_ = std::max(num_.degree(), den_.degree());
  if (degree_ < 2)
    throw Error(ErrorCode::BadArgument, "rational map degree must be >= 2");
  if (resultant(num_, den_).is_zero())
    throw Error(ErrorCode::BadArgument, "numerator and denominator share a root");
}

SpherePoint RationalMap::eval(const SpherePoint& w) const {
  if (w.is_inf) {
    int dn = num_.degree(), dd = den_.degree();
    if (dn > dd) return SpherePoint::infinity();
    if (dn < dd) return SpherePoint::at_exact(GaussianRational());
    return SpherePoint::at_exact(num_.leading() / den_.leading());
  }
  if (w.exact) {
    GaussianRational d = den_.eval(*w.exact);
    if (d.is_zero()) return SpherePoint::infinity();
    return SpherePoint::at_exact(num_.eval(*w.exact) / d);
  }
  Complex d = den_.eval(w.z);
  if (std::abs(d) == 0.0) return SpherePoint::infinity();
  Complex n = num_.eval(w.z);
  Complex v = n / d;
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return SpherePoint::infinity();
  return SpherePoint::at(v);
}

Complex RationalMap::eval_finite(const Complex& w) const {
  return num_.eval(w) / den_.eval(w);
}

Complex RationalMap::derivative(const Complex& w) const {
  Complex n = num_.eval(w), d = den_.eval(w);
  Complex np = num_.derivative().eval(w), dp = den_.derivative().eval(w);
  return (np * d - n * dp) / (d * d);
}

int RationalMap::local_degree(const SpherePoint& a) const {
  const int d = degree_;
  if (a.is_inf) {
    SpherePoint v = eval(a);
    GaussianPoly numR = num_.reversed(d), denR = den_.reversed(d);
    if (v.is_inf) return denR.order_at(GaussianRational());
    return (numR - denR.scale(*v.exact)).order_at(GaussianRational());
  }
  if (a.exact) {
    SpherePoint v = eval(a);
    if (v.is_inf) return den_.order_at(*a.exact);
    return (num_ - den_.scale(*v.exact)).order_at(*a.exact);
  }
  // Numeric fallback: count vanishing derivatives of num - v*den at a.
  Complex v = eval_finite(a.z);
  std::vector<Complex> c = num_.complex_coeffs();
  std::vector<Complex> dc = den_.complex_coeffs();
  c.resize(std::max(c.size(), dc.size()), Complex{0, 0});
  for (size_t i = 0; i < dc.size(); ++i) c[i] -= v * dc[i];
  double scale = 0;
  for (const auto& x : c) scale = std::max(scale, std::abs(x));
  int order = 0;
  std::vector<Complex> cur = c;
  while (!cur.empty() && order <= d) {
    Complex val{0, 0};
    for (size_t i = cur.size(); i-- > 0;) val = val * a.z + cur[i];
    if (std::abs(val) > 1e-6 * scale) break;
    ++order;
    std::vector<Complex> next;
    for (size_t i = 1; i < cur.size(); ++i) next.push_back(cur[i] * static_cast<double>(i));
    cur = std::move(next);
  }
  return std::max(order, 1) == order ? order : 1;
}

GaussianRational RationalMap::chart_derivative_exact(const SpherePoint& e) const {
  // Derivative at an exact fixed point, in the 1/w chart at infinity.
  if (e.is_inf) {
    GaussianPoly numR = num_.reversed(degree_), denR = den_.reversed(degree_);
    // h(u) = denR/numR with h(0) = 0; h'(0) = denR'(0) / numR(0).
    GaussianRational n0 = numR.eval(GaussianRational());
    if (n0.is_zero() || !denR.eval(GaussianRational()).is_zero())
      throw Error(ErrorCode::BadArgument, "infinity is not a fixed point");
    return denR.derivative().eval(GaussianRational()) / n0;
  }
  if (!e.exact) throw Error(ErrorCode::BadArgument, "chart derivative needs an exact point");
  GaussianRational n = num_.eval(*e.exact), d = den_.eval(*e.exact);
  if (d.is_zero() || !(n / d == *e.exact))
    throw Error(ErrorCode::BadArgument, "not a fixed point");
  GaussianRational np = num_.derivative().eval(*e.exact), dp = den_.derivative().eval(*e.exact);
  return (np * d - n * dp) / (d * d);
}

std::vector<std::pair<SpherePoint, int>> RationalMap::preimages(const SpherePoint& v,
                                                                const RootOptions& opt) const {
  std::vector<std::pair<SpherePoint, int>> out;
  const int d = degree_;
  if (v.is_inf || v.exact) {
    GaussianPoly p;
    if (v.is_inf) p = den_;
    else p = num_ - den_.scale(*v.exact);
    int drop = d - std::max(p.degree(), 0);
    if (p.degree() < 0) throw Error(ErrorCode::BadArgument, "constant map");
    for (const auto& r : find_roots(p, opt)) {
      if (r.exact) out.push_back({SpherePoint::at_exact(*r.exact), r.multiplicity});
      else out.push_back({SpherePoint::at(r.z), r.multiplicity});
    }
    if (drop > 0) out.push_back({SpherePoint::infinity(), drop});
    return out;
  }
  // Numeric target.
  std::vector<Complex> c = num_.complex_coeffs(), dc = den_.complex_coeffs();
  c.resize(d + 1, Complex{0, 0});
  dc.resize(d + 1, Complex{0, 0});
  for (int i = 0; i <= d; ++i) c[i] -= v.z * dc[i];
  double scale = 0;
  for (const auto& x : c) scale = std::max(scale, std::abs(x));
  int deg = d;
  while (deg > 0 && std::abs(c[deg]) < 1e-13 * scale) --deg;
  c.resize(deg + 1);
  int drop = d - deg;
  for (const Complex& r : aberth(c, opt.tol_res, opt.max_iter))
    out.push_back({SpherePoint::at(r), 1});
  if (drop > 0) out.push_back({SpherePoint::infinity(), drop});
  return out;
}

std::vector<std::pair<SpherePoint, int>> RationalMap::critical_points(const RootOptions& opt) const {
  std::vector<std::pair<SpherePoint, int>> out;
  GaussianPoly w = num_.derivative() * den_ - num_ * den_.derivative();
  if (!w.is_zero())
    for (const auto& r : find_roots(w, opt)) {
      auto pt = r.exact ? SpherePoint::at_exact(*r.exact) : SpherePoint::at(r.z);
      out.push_back({pt, r.multiplicity});
    }
  int inf_deg = local_degree(SpherePoint::infinity());
  if (inf_deg > 1) out.push_back({SpherePoint::infinity(), inf_deg - 1});
  return out;
}

std::string RationalMap::str() const {
  auto side = [](const GaussianPoly& p) {
    std::string s;
    for (int i = p.degree(); i >= 0; --i) {
      const auto& c = p.coeffs()[i];
      if (c.is_zero()) continue;
      if (!s.empty()) s += " + ";
      s += "(" + c.str() + ")";
      if (i == 1) s += " w";
      else if (i > 1) s += " w^" + std::to_string(i);
    }
    return s.empty() ? std::string("0") : s;
  };
  return "(" + side(num_) + ") / (" + side(den_) + ")";
}

// --------------------------------- ends ------------------------------------

const char* end_name(End e) {
  switch (e) {
    case End::Zero: return "0";
    case End::One: return "1";
    case End::Inf: return "inf";
  }
  return "?";
}

SpherePoint end_point(End e) {
  switch (e) {
    case End::Zero: return SpherePoint::at_exact(GaussianRational());
    case End::One: return SpherePoint::at_exact(kOne);
    case End::Inf: return SpherePoint::infinity();
  }
  return SpherePoint::infinity();
}

std::optional<End> end_of_point(const SpherePoint& p, double tol) {
  if (p.is_inf) return End::Inf;
  if (p.exact) {
    if (p.exact->is_zero()) return End::Zero;
    if (*p.exact == kOne) return End::One;
    return std::nullopt;  // exactness decides
  }
  for (End e : {End::Zero, End::One, End::Inf})
    if (chordal(p, end_point(e)) < tol) return e;
  return std::nullopt;
}

ParityClass end_parity(End e) {
  // Slope dictionary: the end 0 degenerates the 1/0 curve, end 1 the 0/1
  // curve, end infinity the 1/1 curve.
  switch (e) {
    case End::Zero: return ParityClass::E0;
    case End::One: return ParityClass::E1;
    case End::Inf: return ParityClass::EINF;
  }
  return ParityClass::E0;
}

// ------------------------------- build_model --------------------------------

namespace {

bool same_point(const SpherePoint& a, const SpherePoint& b, double tol = 1e-9) {
  if (a.is_inf || b.is_inf) return a.is_inf && b.is_inf;
  if (a.exact && b.exact) return *a.exact == *b.exact;
  return chordal(a, b) < tol;
}

}  // namespace

GMapModel build_model(RationalMap g, ModelKind kind, const ModelOptions& options) {
  RootOptions ropt;
  ropt.tol_res = options.tol_res;
  ropt.max_iter = options.max_iter;

  // Covering condition: every critical value lies in the ends.
  for (const auto& [c, branching] : g.critical_points(ropt)) {
    SpherePoint v = g.eval(c);
    if (!end_of_point(v, 1e-8))
      throw Error(ErrorCode::NotACovering,
                  "critical value " + v.str() + " escapes the ends {0,1,inf}");
  }

  GMapModel model{std::move(g), kind, {}, SpherePoint::infinity(), options};

  // Punctures of W: preimages of the three ends.
  std::vector<SpherePoint> punctures;
  for (End e : {End::Zero, End::One, End::Inf})
    for (const auto& [p, mult] : model.g.preimages(end_point(e), ropt)) {
      bool seen = false;
      for (const auto& q : punctures) seen = seen || same_point(p, q);
      if (!seen) punctures.push_back(p);
    }
  for (const auto& p : punctures)
    if (!end_of_point(p, 1e-9)) model.extra_punctures.push_back(p);
  std::sort(model.extra_punctures.begin(), model.extra_punctures.end(),
            [](const SpherePoint& a, const SpherePoint& b) {
              if (a.is_inf != b.is_inf) return b.is_inf;
              if (std::abs(a.z.real() - b.z.real()) > 1e-12) return a.z.real() < b.z.real();
              return a.z.imag() < b.z.imag();
            });

  if (kind == ModelKind::XInjective) {
    // Interior fixed points: roots of num - w den, plus infinity if fixed.
    GaussianPoly shift({GaussianRational(), kOne});  // w
    GaussianPoly f = model.g.num() - model.g.den() * shift;
    std::vector<SpherePoint> fixed;
    if (f.degree() >= 1)
      for (const auto& r : find_roots(f, ropt))
        fixed.push_back(r.exact ? SpherePoint::at_exact(*r.exact) : SpherePoint::at(r.z));
    if (model.g.eval(SpherePoint::infinity()).is_inf) fixed.push_back(SpherePoint::infinity());

    std::optional<SpherePoint> best;
    for (const auto& p : fixed) {
      if (end_of_point(p, 1e-9)) continue;
      if (p.is_inf) continue;  // interior means off the ends, but prefer finite anyway
      if (!best) { best = p; continue; }
      double cur = std::abs(p.z), old = std::abs(best->z);
      if (cur < old - 1e-9 || (std::abs(cur - old) <= 1e-9 && p.z.imag() > best->z.imag()))
        best = p;
    }
    if (!best)
      throw Error(ErrorCode::NoInteriorFixedPoint, "all fixed points lie in the ends");
    model.basepoint = *best;
  } else {
    // A deterministic regular basepoint for the covering Y.
    for (long long k = 4;; ++k) {
      SpherePoint cand = SpherePoint::at_exact(gr_int(k));
      bool ok = !end_of_point(cand, 1e-9);
      for (const auto& p : model.extra_punctures) ok = ok && chordal(cand, p) > 0.15;
      if (ok) { model.basepoint = cand; break; }
      if (k > 64) throw Error(ErrorCode::NoInteriorFixedPoint, "no regular basepoint found");
    }
  }
  return model;
}

// ------------------------------- end dynamics -------------------------------

bool EndReport::no_fixed_end() const {
  for (const auto& e : ends)
    if (e.fixed) return false;
  return true;
}

EndReport end_dynamics(const GMapModel& model) {
  EndReport report;
  for (End e : {End::Zero, End::One, End::Inf}) {
    EndEntry entry;
    entry.end = e;
    SpherePoint ep = end_point(e);
    SpherePoint image = model.g.eval(ep);
    entry.image = end_of_point(image, 1e-9);
    entry.has_w_end = entry.image.has_value();
    if (model.kind == ModelKind::XConstant) {
      entry.verdicts.push_back("NotFixed");
      report.ends.push_back(std::move(entry));
      continue;
    }
    if (entry.has_w_end) entry.local_degree_y = model.g.local_degree(ep);
    entry.fixed = entry.image && *entry.image == e;
    if (!entry.fixed) {
      entry.verdicts.push_back("NotFixed");
      report.ends.push_back(std::move(entry));
      continue;
    }
    if (entry.local_degree_y == entry.local_degree_x) {
      GaussianRational gp = model.g.chart_derivative_exact(ep);
      Complex a = Complex{1, 0} / gp.to_complex();
      entry.branch_derivative = a;
      double mag = std::abs(a);
      if (mag > 0 && mag < 1) {
        entry.verdicts.push_back("ObstructedTwistFamily");
        report.obstructed_twist_end = e;
      }
      if (std::abs(gp.to_complex()) > 1) {
        entry.verdicts.push_back("RepellingEnd");
        report.repelling_fixed_end = e;
      }
      if (mag >= 1) entry.verdicts.push_back("NotAttracting");
    } else {
      // Ramified fixed end: the correspondence branch has unequal local
      // degrees, so no derivative is reported; g is superattracting there.
      entry.verdicts.push_back("RamifiedFixedEnd");
    }
    report.ends.push_back(std::move(entry));
  }
  return report;
}

// --------------------------- critical orbit tests ---------------------------

PcfReport pcf_hyperbolic_check(const RationalMap& g, int bound, double tol) {
  PcfReport report;
  report.bound = bound;
  auto criticals = g.critical_points();

  auto find_in = [&](const std::vector<SpherePoint>& pts, const SpherePoint& p) -> int {
    for (size_t i = 0; i < pts.size(); ++i)
      if (same_point(pts[i], p, tol)) return static_cast<int>(i);
    return -1;
  };

  bool all_pcf = true;
  for (const auto& [c, branching] : criticals) {
    CriticalOrbit orbit;
    orbit.point = c;
    orbit.branching = branching;
    SpherePoint cur = c;
    orbit.orbit.push_back(cur);
    for (int k = 0; k < bound; ++k) {
      cur = g.eval(cur);
      int idx = find_in(orbit.orbit, cur);
      if (idx >= 0) {
        orbit.preperiod = idx;
        orbit.period = static_cast<int>(orbit.orbit.size()) - idx;
        break;
      }
      orbit.orbit.push_back(cur);
    }
    if (orbit.preperiod < 0) all_pcf = false;
    report.orbits.push_back(std::move(orbit));
  }
  report.pcf = all_pcf;
  if (!all_pcf) return report;

  // Hyperbolic iff every cycle entered by a critical orbit contains a
  // critical point.
  bool hyperbolic = true;
  for (const auto& orbit : report.orbits) {
    bool cycle_has_critical = false;
    for (size_t i = orbit.preperiod; i < orbit.orbit.size(); ++i)
      for (const auto& [c, b] : criticals)
        cycle_has_critical = cycle_has_critical || same_point(orbit.orbit[i], c, tol);
    hyperbolic = hyperbolic && cycle_has_critical;
  }
  report.hyperbolic = hyperbolic;
  report.julia_compact_invariant = hyperbolic;

  // Postcritical portrait: forward orbits of critical values.
  std::vector<SpherePoint> marked;
  for (const auto& [c, b] : criticals) {
    SpherePoint v = g.eval(c);
    while (find_in(marked, v) < 0) {
      marked.push_back(v);
      v = g.eval(v);
    }
  }
  Portrait portrait;
  for (const auto& p : marked) portrait.points.push_back(p.str());
  for (const auto& p : marked) {
    SpherePoint v = g.eval(p);
    int idx = find_in(marked, v);
    portrait.map[p.str()] = marked[idx].str();
    portrait.local_degree[p.str()] = Int(g.local_degree(p));
  }
  for (const auto& [c, b] : criticals) {
    if (find_in(marked, c) >= 0) continue;
    SpherePoint v = g.eval(c);
    int idx = find_in(marked, v);
    portrait.extra_critical[marked[idx].str()].push_back(Int(b + 1));
  }
  portrait.degree = Int(g.degree());
  report.portrait = std::move(portrait);
  return report;
}

ExpansionCertificate euclidean_expansion_certificate(const RationalMap& g) {
  PcfReport pcf = pcf_hyperbolic_check(g);
  if (!pcf.pcf)
    throw Error(ErrorCode::NotEuclidean, "map is not critically finite within the bound");
  OrbifoldSignature sig = orbifold_signature(*pcf.portrait);
  if (!sig.euclidean())
    throw Error(ErrorCode::NotEuclidean, "orbifold Euler characteristic is not zero");
  ExpansionCertificate cert{Int(g.degree()), std::sqrt(static_cast<double>(g.degree())),
                            std::move(sig)};
  return cert;
}

// ------------------------------ orbit synthesis -----------------------------

double systole_proxy(const Complex& mu) {
  double d = std::min({std::abs(mu), std::abs(mu - Complex{1, 0}),
                       std::abs(mu) > 0 ? 1.0 / std::abs(mu) : 0.0});
  if (d == 0.0 || !std::isfinite(std::abs(mu)))
    throw Error(ErrorCode::AtEnd, "systole proxy undefined at an end");
  d = std::min(d, 0.5);
  return 2 * M_PI * M_PI / std::log(1.0 / d);
}

Complex inverse_branch(const RationalMap& g, const Complex& target, const Complex& seed,
                       double tol_sep) {
  Complex w = seed;
  double dscale = 1.0 + std::abs(target);
  if (std::abs(g.derivative(w)) < 1e-12 * dscale)
    throw Error(ErrorCode::BranchCollision, "seed is (nearly) critical");
  bool converged = false;
  for (int it = 0; it < 80; ++it) {
    Complex f = g.eval_finite(w) - target;
    if (std::abs(f) < 1e-12 * dscale) { converged = true; break; }
    Complex df = g.derivative(w);
    if (std::abs(df) < 1e-14 * dscale)
      throw Error(ErrorCode::BranchCollision, "derivative collapsed during refinement");
    w -= f / df;
  }
  if (!converged && std::abs(g.eval_finite(w) - target) >= 1e-12 * dscale)
    throw Error(ErrorCode::ConvergenceFailure, "inverse branch did not converge");
  for (const auto& [p, mult] : g.preimages(SpherePoint::at(target))) {
    if (p.is_inf || std::abs(p.z - w) < 1e-9) continue;
    if (std::abs(p.z - w) < tol_sep)
      throw Error(ErrorCode::BranchCollision, "two preimages within separation tolerance");
  }
  return w;
}

namespace {

std::vector<LComplex> long_coeffs(const GaussianPoly& p) {
  std::vector<LComplex> out;
  out.reserve(p.coeffs().size());
  for (const auto& c : p.coeffs())
    out.push_back(LComplex{static_cast<long double>(to_double(c.re)),
                           static_cast<long double>(to_double(c.im))});
  return out;
}

// Exact Taylor data for the fixed-end equation g(e + x) = e + xi, written as
// A(x) = xi * B(x) with A(0) = 0 and B(0) != 0 (the 1/w chart at infinity).
// The inverse branch derivative at the end is a = B(0)/A'(0) = 1/g'(e).
struct EndChart {
  std::vector<LComplex> A, B;
  LComplex a;

  LComplex evalA(LComplex t) const {
    LComplex r{0, 0};
    for (size_t i = A.size(); i-- > 0;) r = r * t + A[i];
    return r;
  }
  LComplex evalB(LComplex t) const {
    LComplex r{0, 0};
    for (size_t i = B.size(); i-- > 0;) r = r * t + B[i];
    return r;
  }
  LComplex evalAp(LComplex t) const {
    LComplex r{0, 0};
    for (size_t i = A.size(); i-- > 1;) r = r * t + A[i] * static_cast<long double>(i);
    return r;
  }
  LComplex evalBp(LComplex t) const {
    LComplex r{0, 0};
    for (size_t i = B.size(); i-- > 1;) r = r * t + B[i] * static_cast<long double>(i);
    return r;
  }

  // The inverse branch in the chart: solve A(x) = xi B(x) near x = a xi.
  LComplex pull(LComplex xi) const {
    LComplex x = a * xi;
    for (int it = 0; it < 64; ++it) {
      LComplex f = evalA(x) - xi * evalB(x);
      LComplex df = evalAp(x) - xi * evalBp(x);
      if (std::abs(df) == 0.0L) break;
      LComplex step = f / df;
      x -= step;
      if (std::abs(step) < 1e-16L * std::abs(x)) break;
    }
    return x;
  }

  // The forward map in the chart: xi = A(x)/B(x).
  LComplex push(LComplex x) const { return evalA(x) / evalB(x); }
};

EndChart make_end_chart(const RationalMap& g, End e) {
  GaussianPoly A, B;
  if (e == End::Inf) {
    A = g.den().reversed(g.degree());
    B = g.num().reversed(g.degree());
  } else {
    GaussianRational ev = e == End::Zero ? GaussianRational() : kOne;
    A = (g.num() - g.den().scale(ev)).taylor_at(ev);
    B = g.den().taylor_at(ev);
  }
  EndChart chart;
  chart.A = long_coeffs(A);
  chart.B = long_coeffs(B);
  if (chart.A.size() < 2 || std::abs(chart.A[0]) != 0.0L || chart.B.empty() ||
      std::abs(chart.B[0]) == 0.0L)
    throw Error(ErrorCode::NoRepellingEnd, "end is not an unramified fixed end");
  chart.a = chart.B[0] / chart.A[1];
  return chart;
}

LComplex to_lc(const Complex& z) {
  return {static_cast<long double>(z.real()), static_cast<long double>(z.imag())};
}

// Targets for branch continuation. Values near a fixed end are expressed in
// the end chart (mu = e + xi, or mu = 1/xi at infinity) so that the Newton
// residual num - mu*den can be rearranged to avoid catastrophic cancellation:
//   finite e:  P_e(w) - xi*den(w),  P_e = num - e*den
//   infinity:  xi*num(w) - den(w).
struct LiftTarget {
  std::optional<End> near;
  LComplex value;  // xi in the chart, or mu in the plane
};

LiftTarget classify_target(LComplex mu) {
  if (std::abs(mu) > 12.0L) return {End::Inf, LComplex{1, 0} / mu};
  if (std::abs(mu) < 0.06L) return {End::Zero, mu};
  if (std::abs(mu - LComplex{1, 0}) < 0.06L) return {End::One, mu - LComplex{1, 0}};
  return {std::nullopt, mu};
}

LComplex plane_of_target(const LiftTarget& t) {
  if (!t.near) return t.value;
  switch (*t.near) {
    case End::Zero: return t.value;
    case End::One: return LComplex{1, 0} + t.value;
    case End::Inf: return LComplex{1, 0} / t.value;
  }
  return t.value;
}

// The unknown is tracked in a local coordinate around one of several exact
// centers (the punctures of W, where the polynomials nearly vanish and
// monomial evaluation would cancel catastrophically), in the plane, or in
// the 1/w chart at infinity.
struct Lifter {
  struct Basis {
    bool at_inf = false;
    LComplex center{0, 0};
    // Local-coordinate coefficients of num, den, num - 0*den, num - 1*den:
    // shifted to the center, or the degree-d reversals at infinity.
    std::vector<LComplex> num, den, p_zero, p_one;
  };

  struct W {
    int basis = 0;  // index into bases; 0 is the plane
    LComplex eta{0, 0};
  };

  std::vector<Basis> bases;

  explicit Lifter(const GMapModel& model) {
    const RationalMap& g = model.g;
    GaussianPoly pz = g.num();
    GaussianPoly po = g.num() - g.den();
    auto add_basis = [&](const SpherePoint& p) {
      Basis b;
      if (p.is_inf) {
        b.at_inf = true;
        int d = g.degree();
        b.num = long_coeffs(g.num().reversed(d));
        b.den = long_coeffs(g.den().reversed(d));
        b.p_zero = long_coeffs(pz.reversed(d));
        b.p_one = long_coeffs(po.reversed(d));
      } else if (p.exact) {
        b.center = to_lc(p.z);
        b.num = long_coeffs(g.num().taylor_at(*p.exact));
        b.den = long_coeffs(g.den().taylor_at(*p.exact));
        b.p_zero = long_coeffs(pz.taylor_at(*p.exact));
        b.p_one = long_coeffs(po.taylor_at(*p.exact));
      } else {
        b.center = to_lc(p.z);
        b.num = shift_numeric(long_coeffs(g.num()), b.center);
        b.den = shift_numeric(long_coeffs(g.den()), b.center);
        b.p_zero = shift_numeric(long_coeffs(pz), b.center);
        b.p_one = shift_numeric(long_coeffs(po), b.center);
      }
      bases.push_back(std::move(b));
    };
    // Plane basis first.
    Basis plane;
    plane.num = long_coeffs(g.num());
    plane.den = long_coeffs(g.den());
    plane.p_zero = long_coeffs(pz);
    plane.p_one = long_coeffs(po);
    bases.push_back(std::move(plane));
    add_basis(SpherePoint::infinity());
    std::vector<SpherePoint> centers{end_point(End::Zero), end_point(End::One)};
    for (End e : {End::Zero, End::One, End::Inf})
      for (const auto& [p, mult] : g.preimages(end_point(e))) {
        if (p.is_inf) continue;
        bool dup = false;
        for (const auto& q : centers) dup = dup || same_point(p, q, 1e-9);
        if (!dup) centers.push_back(p);
      }
    for (const auto& c : centers) add_basis(c);
  }

  static std::vector<LComplex> shift_numeric(std::vector<LComplex> c, LComplex a) {
    std::vector<LComplex> out;
    out.reserve(c.size());
    while (!c.empty()) {
      std::vector<LComplex> q(c.size() > 1 ? c.size() - 1 : 0);
      LComplex carry{0, 0};
      for (size_t i = c.size(); i-- > 0;) {
        LComplex val = c[i] + carry * a;
        if (i == 0) out.push_back(val);
        else { q[i - 1] = val; carry = val; }
      }
      c = std::move(q);
    }
    return out;
  }

  static LComplex evalp(const std::vector<LComplex>& c, LComplex z) {
    LComplex r{0, 0};
    for (size_t i = c.size(); i-- > 0;) r = r * z + c[i];
    return r;
  }
  static LComplex evald(const std::vector<LComplex>& c, LComplex z) {
    LComplex r{0, 0};
    for (size_t i = c.size(); i-- > 1;) r = r * z + c[i] * static_cast<long double>(i);
    return r;
  }

  LComplex plane_value(const W& w) const {
    const Basis& b = bases[w.basis];
    if (b.at_inf) return LComplex{1, 0} / w.eta;
    return b.center + w.eta;
  }

  // Residual and its scale;d_out gets the eta-derivative when requested.
  LComplex f(const LiftTarget& t, const W& w, long double* scale = nullptr,
             LComplex* d_out = nullptr) const {
    const Basis& b = bases[w.basis];
    const std::vector<LComplex>* up;
    const std::vector<LComplex>* vp;
    LComplex vscale{1, 0};
    bool swap_uv = false;
    if (!t.near) {
      up = &b.num;
      vp = &b.den;
      vscale = t.value;
    } else {
      switch (*t.near) {
        case End::Zero: up = &b.p_zero; vp = &b.den; vscale = t.value; break;
        case End::One: up = &b.p_one; vp = &b.den; vscale = t.value; break;
        case End::Inf: up = &b.num; vp = &b.den; vscale = t.value; swap_uv = true; break;
      }
    }
    LComplex u = evalp(*up, w.eta), v = evalp(*vp, w.eta);
    LComplex fu, fv;
    if (swap_uv) { fu = vscale * u; fv = v; }
    else { fu = u; fv = vscale * v; }
    if (scale) *scale = std::abs(fu) + std::abs(fv);
    if (d_out) {
      LComplex du = evald(*up, w.eta), dv = evald(*vp, w.eta);
      *d_out = swap_uv ? vscale * du - dv : du - vscale * dv;
    }
    return fu - fv;
  }

  // Chordal distance between two unknown states (for branch continuity).
  long double chordal_w(const W& a, const W& b) const {
    const Basis& ba = bases[a.basis];
    const Basis& bb = bases[b.basis];
    if (a.basis == b.basis) {
      if (ba.at_inf) {
        // chordal(1/x, 1/y) = |x - y| / sqrt((1+|x|^2)(1+|y|^2))
        return std::abs(a.eta - b.eta) /
               std::sqrt((1 + std::norm(a.eta)) * (1 + std::norm(b.eta)));
      }
      LComplex x = ba.center + a.eta, y = ba.center + b.eta;
      return std::abs(a.eta - b.eta) / std::sqrt((1 + std::norm(x)) * (1 + std::norm(y)));
    }
    LComplex x = plane_value(a), y = plane_value(b);
    if (!std::isfinite(std::abs(x)) || !std::isfinite(std::abs(y))) return 1.0L;
    return std::abs(x - y) / std::sqrt((1 + std::norm(x)) * (1 + std::norm(y)));
  }

  // Re-express the unknown in the best basis when it leaves its window.
  W normalize(const W& w) const {
    const Basis& b = bases[w.basis];
    bool inside = w.basis != 0 &&
                  (b.at_inf ? std::abs(w.eta) < 0.04L : std::abs(w.eta) < 0.03L);
    if (inside) return w;
    LComplex plane = plane_value(w);
    if (!std::isfinite(std::abs(plane))) return w;
    // Nearest center within its window, else infinity, else the plane.
    for (size_t i = 2; i < bases.size(); ++i)
      if (std::abs(plane - bases[i].center) < 0.02L)
        return {static_cast<int>(i), plane - bases[i].center};
    if (std::abs(plane) > 40.0L) return {1, LComplex{1, 0} / plane};
    return {0, plane};
  }

  W newton(const LiftTarget& t, W w, bool& ok) const {
    ok = false;
    for (int it = 0; it < 80; ++it) {
      long double scale;
      LComplex d;
      LComplex fv = f(t, w, &scale, &d);
      if (std::abs(fv) < 1e-15L * scale) { ok = true; return w; }
      if (std::abs(d) == 0.0L) return w;
      w.eta -= fv / d;
    }
    long double scale;
    LComplex fv = f(t, w, &scale);
    ok = std::abs(fv) < 1e-15L * scale;
    return w;
  }

  // Continue the branch through a ladder of targets. The chordal continuity
  // guard rejects sheet jumps; segments between same-kind rungs are halved
  // adaptively until each Newton hop is both convergent and continuous.
  W continue_branch(const std::vector<LiftTarget>& ladder, W w) const {
    for (size_t k = 1; k < ladder.size(); ++k) {
      const LiftTarget& a = ladder[k - 1];
      const LiftTarget& b = ladder[k];
      bool same_kind = a.near == b.near;
      long double lo = 0, hi = 1;
      int consecutive_failures = 0;
      long steps = 0;
      while (lo < 1) {
        if (++steps > 400000)
          throw Error(ErrorCode::ContinuationStall, "branch continuation exceeded its step budget");
        LiftTarget t = b;
        if (same_kind) t.value = a.value + (b.value - a.value) * LComplex{hi, 0};
        bool ok;
        W cand = newton(t, w, ok);
        if (ok && chordal_w(w, cand) < 0.08L) {
          w = normalize(cand);
          lo = hi;
          hi = 1;
          consecutive_failures = 0;
          if (!same_kind) break;
        } else {
          if (!same_kind)
            throw Error(ErrorCode::ContinuationStall, "branch continuation failed at a chart seam");
          hi = lo + (hi - lo) / 2;
          if (++consecutive_failures > 200)
            throw Error(ErrorCode::ContinuationStall, "branch continuation stalled");
        }
      }
    }
    return w;
  }

  // Chordal pullback residual of the step: chordal(g(w), target).
  double residual(const LiftTarget& t, const W& w) const {
    long double scale;
    LComplex fv = f(t, w, &scale);
    const Basis& b = bases[w.basis];
    LComplex denv = evalp(b.den, w.eta);
    LComplex numv = evalp(b.num, w.eta);
    // |g(w) - mu| in the target's own chart, cancellation-free:
    //   plane / finite end: f / den;  infinity chart: f / num.
    long double r;
    if (t.near && *t.near == End::Inf) r = std::abs(fv) / std::abs(numv);
    else r = std::abs(fv) / std::abs(denv);
    // Convert to a chordal bound (the chart distance dominates chordal near
    // the end; in the plane divide by the standard factors).
    LComplex gv_plane = b.at_inf ? LComplex{0, 0} : numv / denv;
    if (!t.near && !b.at_inf) {
      long double fac = std::sqrt((1 + std::norm(gv_plane)) * (1 + std::norm(t.value)));
      return static_cast<double>(r / fac);
    }
    return static_cast<double>(std::min(r, (long double)1.0L));
  }
};

// Ladder of targets from a plane point toward the endpoint, cruising in the
// plane and descending radially (geometrically) in the chart near an end.
std::vector<LiftTarget> ladder_to(const LComplex& from, const LiftTarget& to) {
  std::vector<LiftTarget> out;
  out.push_back({std::nullopt, from});
  LComplex cruise_target;
  if (!to.near) {
    cruise_target = to.value;
  } else if (*to.near == End::Inf) {
    LComplex dir = to.value / std::abs(to.value);  // direction of xi = 1/mu
    cruise_target = LComplex{1, 0} / (dir * LComplex{0.125L, 0});
  } else {
    LComplex dir = std::abs(to.value) > 0 ? to.value / std::abs(to.value) : LComplex{0.6L, 0.8L};
    cruise_target = plane_of_target({to.near, dir * LComplex{0.05L, 0}});
  }
  auto seg_near_end = [](LComplex a, LComplex b) {
    for (int i = 1; i < 12; ++i) {
      LComplex p = a + (b - a) * LComplex{i / 12.0L, 0};
      if (std::min(std::abs(p), std::abs(p - LComplex{1, 0})) < 0.05L || std::abs(p) > 11.0L)
        return true;
    }
    return false;
  };
  if (seg_near_end(from, cruise_target)) out.push_back({std::nullopt, LComplex{0.4L, 2.2L}});
  out.push_back({std::nullopt, cruise_target});
  if (to.near) {
    LComplex dir = std::abs(to.value) > 0 ? to.value / std::abs(to.value)
                                          : LComplex{0.6L, 0.8L};
    long double mag = *to.near == End::Inf ? 0.125L : 0.05L;
    long double goal = std::abs(to.value);
    while (mag > goal * 4) {
      out.push_back({to.near, dir * LComplex{mag, 0}});
      mag /= 4;
    }
    out.push_back(to);
  }
  return out;
}

}  // namespace

double ModuliOrbit::max_residual() const {
  double worst = 0;
  for (double r : residuals) worst = std::max(worst, r);
  return worst;
}

ModuliOrbit synthesize_orbit(const GMapModel& model, double delta,
                             const std::vector<double>& epsilons) {
  if (model.kind != ModelKind::XInjective)
    throw Error(ErrorCode::WrongKind, "orbit synthesis needs an X-Injective model");
  EndReport report = end_dynamics(model);
  if (!report.repelling_fixed_end)
    throw Error(ErrorCode::NoRepellingEnd, "no repelling fixed end for the pullback branch");
  const End e = *report.repelling_fixed_end;
  EndChart chart = make_end_chart(model.g, e);
  Lifter lifter(model);

  const LComplex m_star = to_lc(model.basepoint.z);
  auto to_chart = [&](LComplex mu) -> LComplex {
    switch (e) {
      case End::Zero: return mu;
      case End::One: return mu - LComplex{1, 0};
      case End::Inf: return LComplex{1, 0} / mu;
    }
    return mu;
  };
  auto from_chart = [&](LComplex xi) -> LComplex {
    switch (e) {
      case End::Zero: return xi;
      case End::One: return LComplex{1, 0} + xi;
      case End::Inf: return LComplex{1, 0} / xi;
    }
    return xi;
  };
  auto proxy_of_chart = [&](LComplex xi) -> double {
    long double d = std::min(std::abs(xi), 0.5L);
    if (d == 0.0L) throw Error(ErrorCode::AtEnd, "orbit hit the end exactly");
    return static_cast<double>(2.0L * M_PIl * M_PIl / std::log(1.0L / d));
  };

  ModuliOrbit orbit;
  // Current point: plane value plus, while hugging the repelling end, the
  // chart offset xi (the plane value degrades to the end itself there).
  LComplex mu = m_star;
  std::optional<LComplex> mu_chart;

  auto record = [&](const char* label, double resid) {
    orbit.points.push_back(
        Complex{static_cast<double>(mu.real()), static_cast<double>(mu.imag())});
    orbit.labels.push_back(label);
    orbit.proxies.push_back(mu_chart ? proxy_of_chart(*mu_chart)
                                     : systole_proxy(orbit.points.back()));
    orbit.residuals.push_back(resid);
  };
  record("start", 0.0);

  const long double chart_radius = 0.04L;

  for (double eps : epsilons) {
    // Phase A: the branch fixing the repelling end, until the proxy < eps.
    int guard = 0;
    while (orbit.proxies.back() >= eps) {
      if (++guard > 40000)
        throw Error(ErrorCode::ConvergenceFailure, "end phase did not reach its threshold");
      if (!mu_chart && std::abs(to_chart(mu)) < chart_radius) mu_chart = to_chart(mu);
      if (mu_chart) {
        LComplex xi = *mu_chart;
        LComplex next = chart.pull(xi);
        LComplex back = chart.push(next);
        double resid = static_cast<double>(std::abs(back - xi));
        mu_chart = next;
        mu = from_chart(next);
        record("end", resid);
        continue;
      }
      // Far from the end: one continuation step of the end-fixing branch,
      // anchored at a nearby point where the branch is the chart inverse.
      LComplex xi0{chart_radius, 0};
      if (e != End::Inf) {
        LComplex d = m_star - from_chart(LComplex{0, 0});
        xi0 = (d / std::abs(d)) * LComplex{chart_radius, 0};
      }
      Lifter::W anchor{0, from_chart(chart.pull(xi0))};
      anchor = lifter.normalize(anchor);
      std::vector<LiftTarget> ladder = ladder_to(from_chart(xi0), classify_target(mu));
      Lifter::W w = lifter.continue_branch(ladder, anchor);
      double resid = lifter.residual(classify_target(mu), w);
      mu = lifter.plane_value(w);
      if (std::abs(to_chart(mu)) < chart_radius) mu_chart = to_chart(mu);
      record("end", resid);
    }

    // Phase B: the branch fixing the basepoint, until within delta.
    int guard_b = 0;
    while (true) {
      if (!mu_chart && std::abs(mu - m_star) < static_cast<long double>(delta)) break;
      if (++guard_b > 4000)
        throw Error(ErrorCode::ConvergenceFailure, "base phase did not reach delta");
      LiftTarget target = mu_chart ? LiftTarget{e, *mu_chart} : classify_target(mu);
      std::vector<LiftTarget> ladder = ladder_to(m_star, target);
      Lifter::W w = lifter.continue_branch(ladder, Lifter::W{0, m_star});
      double resid = lifter.residual(target, w);
      mu = lifter.plane_value(w);
      mu_chart.reset();
      if (std::abs(to_chart(mu)) < chart_radius) mu_chart = to_chart(mu);
      record("base", resid);
    }
  }
  return orbit;
}


// -------------------------------- X verdicts --------------------------------

ConstantModelReport constant_model_report(const GMapModel& model) {
  if (model.kind != ModelKind::XConstant)
    throw Error(ErrorCode::WrongKind, "constant-model report needs an X-Constant model");
  return {true, true, true, true, true, Int(model.g.degree())};
}

PropernessResult x_properness(const GMapModel& model) {
  if (model.kind != ModelKind::XInjective)
    throw Error(ErrorCode::WrongKind, "properness is an X-Injective question");
  return {model.extra_punctures.empty(), model.extra_punctures};
}

}  // namespace thurston
