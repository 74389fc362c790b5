#include "thurston/lambda_engine.hpp"

#include <algorithm>
#include <set>

namespace thurston {

// ----------------------------- PullbackSpec -------------------------------

void PullbackSpec::validate() const {
  auto unique_ids = [](const std::vector<std::string>& ids, const char* side) {
    std::set<std::string> seen;
    for (const auto& id : ids) {
      if (id == kTrivialId)
        throw Error(ErrorCode::MalformedSpec, std::string(side) + " uses reserved id 'o'");
      if (!seen.insert(id).second)
        throw Error(ErrorCode::MalformedSpec, "duplicate curve id " + id);
    }
  };
  unique_ids(domain_curves, "domain");
  unique_ids(codomain_curves, "codomain");
  if (entries.size() != domain_curves.size())
    throw Error(ErrorCode::MalformedSpec, "entries must align with domain_curves");
  std::set<std::string> codomain(codomain_curves.begin(), codomain_curves.end());
  for (size_t j = 0; j < entries.size(); ++j) {
    Int degree_sum = 0;
    for (const auto& comp : entries[j]) {
      if (comp.degree < 1)
        throw Error(ErrorCode::MalformedSpec, "component degree must be >= 1");
      if (comp.curve != kTrivialId && !codomain.count(comp.curve))
        throw Error(ErrorCode::MalformedSpec, "unknown component curve " + comp.curve);
      degree_sum += comp.degree;
    }
    if (covering_degree && degree_sum > *covering_degree)
      throw Error(ErrorCode::MalformedSpec,
                  "component degrees of " + domain_curves[j] + " exceed covering degree");
  }
}

LambdaMatrix::LambdaMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids)
    : row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)),
      data_(row_ids_.size() * col_ids_.size(), Rational(0)) {}

LambdaMatrix build_lambda(const PullbackSpec& spec) {
  spec.validate();
  LambdaMatrix m(spec.codomain_curves, spec.domain_curves);
  std::map<std::string, size_t> row_index;
  for (size_t i = 0; i < spec.codomain_curves.size(); ++i) row_index[spec.codomain_curves[i]] = i;
  for (size_t j = 0; j < spec.entries.size(); ++j) {
    for (const auto& comp : spec.entries[j]) {
      if (comp.curve == kTrivialId) continue;
      m.at(row_index.at(comp.curve), j) += Rational(1, comp.degree);
    }
  }
  return m;
}

std::vector<std::string> kernel_columns(const LambdaMatrix& m) {
  std::vector<std::string> out;
  for (size_t j = 0; j < m.cols(); ++j) {
    bool zero = true;
    for (size_t i = 0; i < m.rows() && zero; ++i) zero = m.at(i, j) == 0;
    if (zero) out.push_back(m.col_ids()[j]);
  }
  return out;
}

InvarianceResult invariance_check(const PullbackSpec& spec) {
  spec.validate();
  std::set<std::string> domain(spec.domain_curves.begin(), spec.domain_curves.end());
  std::set<std::string> preimage;
  for (const auto& comps : spec.entries)
    for (const auto& comp : comps)
      if (comp.curve != kTrivialId) preimage.insert(comp.curve);
  std::vector<std::string> escaping;
  for (const auto& c : preimage)
    if (!domain.count(c)) escaping.push_back(c);
  if (!escaping.empty()) return {InvarianceKind::Neither, escaping};
  if (preimage.size() == domain.size()) return {InvarianceKind::CompletelyInvariant, {}};
  return {InvarianceKind::Invariant, {}};
}

// ------------------------------- Portrait ---------------------------------

void Portrait::validate() const {
  std::set<std::string> pts(points.begin(), points.end());
  if (pts.size() != points.size())
    throw Error(ErrorCode::MalformedSpec, "duplicate portrait points");
  for (const auto& x : points) {
    auto it = map.find(x);
    if (it == map.end())
      throw Error(ErrorCode::MalformedSpec, "portrait map not total: missing " + x);
    if (!pts.count(it->second))
      throw Error(ErrorCode::MalformedSpec, "portrait maps " + x + " outside the marked set");
  }
  for (const auto& [x, d] : local_degree) {
    if (!pts.count(x)) throw Error(ErrorCode::MalformedSpec, "degree at unknown point " + x);
    if (d < 1) throw Error(ErrorCode::MalformedSpec, "local degree must be >= 1");
  }
  for (const auto& [x, ds] : extra_critical) {
    if (!pts.count(x)) throw Error(ErrorCode::MalformedSpec, "extra_critical at unknown point " + x);
    for (const Int& d : ds)
      if (d < 2) throw Error(ErrorCode::MalformedSpec, "extra critical degree must be >= 2");
  }
  if (degree) {
    // Fiber degree sums may not exceed the declared covering degree.
    for (const auto& x : points) {
      Int sum = 0;
      for (const auto& y : points)
        if (map.at(y) == x) sum += local_degree.count(y) ? local_degree.at(y) : Int(1);
      if (extra_critical.count(x))
        for (const Int& d : extra_critical.at(x)) sum += d;
      if (sum > *degree)
        throw Error(ErrorCode::MalformedSpec, "fiber over " + x + " exceeds declared degree");
    }
  }
}

namespace {

Int lcm_int(const Int& a, const Int& b) { return a / gcd(a, b) * b; }

}  // namespace

std::vector<std::string> OrbifoldSignature::signature() const {
  std::vector<Int> finite;
  int infinities = 0;
  for (const auto& x : points) {
    const Nu& v = nu.at(x);
    if (!v) ++infinities;
    else if (*v > 1) finite.push_back(*v);
  }
  std::sort(finite.begin(), finite.end());
  std::vector<std::string> out;
  for (const Int& v : finite) out.push_back(v.str());
  for (int i = 0; i < infinities; ++i) out.push_back("inf");
  return out;
}

OrbifoldSignature orbifold_signature(const Portrait& p) {
  p.validate();
  auto deg = [&](const std::string& x) {
    auto it = p.local_degree.find(x);
    return it == p.local_degree.end() ? Int(1) : it->second;
  };

  std::map<std::string, Nu> nu;
  for (const auto& x : p.points) {
    Int v = 1;
    auto it = p.extra_critical.find(x);
    if (it != p.extra_critical.end())
      for (const Int& d : it->second) v = lcm_int(v, d);
    nu[x] = v;
  }

  // A cycle whose internal local degrees multiply to more than 1 forces nu
  // to infinity on its members (the point is an iterated preimage of itself
  // with unbounded cumulative degree).
  for (const auto& start : p.points) {
    std::vector<std::string> path{start};
    std::set<std::string> seen{start};
    std::string cur = start;
    while (true) {
      cur = p.map.at(cur);
      if (seen.count(cur)) break;
      seen.insert(cur);
      path.push_back(cur);
    }
    auto it = std::find(path.begin(), path.end(), cur);
    Int product = 1;
    for (auto jt = it; jt != path.end(); ++jt) product *= deg(*jt);
    if (product > 1)
      for (auto jt = it; jt != path.end(); ++jt) nu[*jt] = std::nullopt;
  }

  // Least fixpoint of nu(f(y)) divisible by nu(y) * deg(y); infinity absorbs
  // and propagates forward. Finite values divide a fixed global bound, so
  // the loop terminates.
  bool changed = true;
  int guard = 0;
  while (changed) {
    if (++guard > 10000)
      throw Error(ErrorCode::ConvergenceFailure, "orbifold fixpoint did not stabilize");
    changed = false;
    for (const auto& y : p.points) {
      const std::string& x = p.map.at(y);
      if (!nu[y]) {
        if (nu[x]) { nu[x] = std::nullopt; changed = true; }
        continue;
      }
      if (!nu[x]) continue;
      Int need = *nu[y] * deg(y);
      Int merged = lcm_int(*nu[x], need);
      if (merged != *nu[x]) { nu[x] = merged; changed = true; }
    }
  }

  OrbifoldSignature sig;
  sig.points = p.points;
  sig.nu = nu;
  sig.euler = Rational(2);
  for (const auto& x : p.points) {
    if (!nu[x]) sig.euler -= 1;
    else sig.euler -= Rational(*nu[x] - 1, *nu[x]);
  }
  return sig;
}

// --------------------------- spectral radius ------------------------------

namespace {

// Dense rational polynomial, coefficients low-to-high.
using Poly = std::vector<Rational>;

void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

Rational eval(const Poly& p, const Rational& t) {
  Rational r(0);
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * t + *it;
  return r;
}

Poly derivative(const Poly& p) {
  Poly d;
  for (size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * Int(i));
  return d;
}

Poly rem(Poly a, const Poly& b) {
  while (degree(a) >= degree(b) && !a.empty()) {
    Rational q = a.back() / b.back();
    int shift = degree(a) - degree(b);
    for (size_t i = 0; i < b.size(); ++i) a[i + shift] -= q * b[i];
    a.pop_back();
    trim(a);
  }
  return a;
}

Poly poly_gcd(Poly a, Poly b) {
  trim(a); trim(b);
  while (!b.empty()) {
    Poly r = rem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    Rational lead = a.back();
    for (auto& c : a) c /= lead;
  }
  return a;
}

// Exact quotient for divisible polynomials.
Poly divide_exact(Poly a, const Poly& g) {
  trim(a);
  if (a.empty()) return a;
  Poly q(std::max(degree(a) - degree(g) + 1, 0), Rational(0));
  while (!a.empty() && degree(a) >= degree(g)) {
    int shift = degree(a) - degree(g);
    Rational c = a.back() / g.back();
    q[shift] = c;
    for (size_t j = 0; j < g.size(); ++j) a[j + shift] -= c * g[j];
    trim(a);
  }
  return q;
}

std::vector<Poly> sturm_chain(const Poly& p) {
  std::vector<Poly> chain{p, derivative(p)};
  trim(chain[0]); trim(chain[1]);
  while (!chain.back().empty() && degree(chain.back()) > 0) {
    Poly r = rem(chain[chain.size() - 2], chain.back());
    for (auto& c : r) c = -c;
    trim(r);
    if (r.empty()) break;
    chain.push_back(std::move(r));
  }
  return chain;
}

int sign_variations(const std::vector<Poly>& chain, const Rational& t) {
  int variations = 0, prev = 0;
  for (const auto& p : chain) {
    if (p.empty()) continue;
    Rational v = eval(p, t);
    int s = v == 0 ? 0 : (v > 0 ? 1 : -1);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++variations;
    prev = s;
  }
  return variations;
}

// Number of distinct real roots in (a, b] of the square-free p.
int roots_in(const std::vector<Poly>& chain, const Rational& a, const Rational& b) {
  return sign_variations(chain, a) - sign_variations(chain, b);
}

// det(xI - M) by Faddeev-LeVerrier; exact over Q.
Poly characteristic_polynomial(const LambdaMatrix& m) {
  const size_t n = m.rows();
  std::vector<Rational> A(n * n), Ak(n * n);
  for (size_t i = 0; i < n * n; ++i) A[i] = m.at(i / n, i % n);
  Ak = A;
  Poly coeff(n + 1, Rational(0));
  coeff[n] = 1;
  Rational ck;
  for (size_t k = 1; k <= n; ++k) {
    Rational tr(0);
    for (size_t i = 0; i < n; ++i) tr += Ak[i * n + i];
    ck = -tr / Int(k);
    coeff[n - k] = ck;
    if (k == n) break;
    // Ak+1 = M (Ak + ck I)
    std::vector<Rational> B = Ak;
    for (size_t i = 0; i < n; ++i) B[i * n + i] += ck;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        Rational s(0);
        for (size_t l = 0; l < n; ++l) s += A[i * n + l] * B[l * n + j];
        Ak[i * n + j] = s;
      }
  }
  return coeff;
}

// Any nonzero rational kernel vector of (M - rho I), by Gaussian elimination.
std::vector<Rational> exact_kernel_vector(const LambdaMatrix& m, const Rational& rho) {
  const size_t n = m.rows();
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) a[i][j] = m.at(i, j) - (i == j ? rho : Rational(0));
  std::vector<size_t> pivot_col;
  size_t row = 0;
  for (size_t col = 0; col < n && row < n; ++col) {
    size_t sel = row;
    while (sel < n && a[sel][col] == 0) ++sel;
    if (sel == n) continue;
    std::swap(a[sel], a[row]);
    for (size_t i = 0; i < n; ++i) {
      if (i == row || a[i][col] == 0) continue;
      Rational f = a[i][col] / a[row][col];
      for (size_t j = col; j < n; ++j) a[i][j] -= f * a[row][j];
    }
    pivot_col.push_back(col);
    ++row;
  }
  std::vector<bool> is_pivot(n, false);
  for (size_t c : pivot_col) is_pivot[c] = true;
  size_t free_col = n;
  for (size_t c = 0; c < n; ++c)
    if (!is_pivot[c]) { free_col = c; break; }
  std::vector<Rational> v(n, Rational(0));
  if (free_col == n) return v;  // no kernel (should not happen for an eigenvalue)
  v[free_col] = 1;
  for (size_t r = 0; r < pivot_col.size(); ++r) {
    size_t c = pivot_col[r];
    v[c] = -a[r][free_col] / a[r][c];
  }
  return v;
}

std::vector<Rational> mat_vec(const LambdaMatrix& m, const std::vector<Rational>& v) {
  std::vector<Rational> out(m.rows(), Rational(0));
  for (size_t i = 0; i < m.rows(); ++i)
    for (size_t j = 0; j < m.cols(); ++j) out[i] += m.at(i, j) * v[j];
  return out;
}

void normalize_by_max(std::vector<Rational>& v) {
  Rational mx(0);
  for (const auto& c : v) if (abs(c) > mx) mx = abs(c);
  if (mx != 0)
    for (auto& c : v) c /= mx;
}

Rational rq(const LambdaMatrix& m, const std::vector<Rational>& v) {
  std::vector<Rational> mv = mat_vec(m, v);
  Rational nume(0), deno(0);
  for (size_t i = 0; i < v.size(); ++i) {
    nume += v[i] * mv[i];
    deno += v[i] * v[i];
  }
  return deno == 0 ? Rational(0) : nume / deno;
}

// Witness for an irrational largest root: inverse iteration with a rational
// shift just beyond the certified bracket, iterated until the exact Rayleigh
// quotient lands inside it.
std::vector<Rational> inverse_iteration_witness(const LambdaMatrix& m, const Rational& lo,
                                                const Rational& hi) {
  const size_t n = m.rows();
  Rational pad = hi - lo;
  if (pad == 0) pad = Rational(1, Int("1000000000000"));
  Rational mu = hi + pad;
  std::vector<Rational> v(n, Rational(1));
  for (int iter = 0; iter < 40; ++iter) {
    // Solve (M - mu I) w = v exactly.
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) a[i][j] = m.at(i, j) - (i == j ? mu : Rational(0));
      a[i][n] = v[i];
    }
    for (size_t col = 0, row = 0; col < n && row < n; ++col) {
      size_t sel = row;
      for (size_t i = row; i < n; ++i)
        if (abs(a[i][col]) > abs(a[sel][col])) sel = i;
      if (a[sel][col] == 0) continue;
      std::swap(a[sel], a[row]);
      for (size_t i = 0; i < n; ++i) {
        if (i == row || a[i][col] == 0) continue;
        Rational f = a[i][col] / a[row][col];
        for (size_t j = col; j <= n; ++j) a[i][j] -= f * a[row][j];
      }
      ++row;
    }
    std::vector<Rational> w(n);
    for (size_t i = 0; i < n; ++i) w[i] = a[i][n] / a[i][i];
    normalize_by_max(w);
    v = std::move(w);
    Rational q = rq(m, v);
    if (lo <= q && q <= hi) return v;
  }
  throw Error(ErrorCode::ConvergenceFailure, "witness Rayleigh quotient did not enter the bracket");
}

SpectralRadius spectral_radius_small(const LambdaMatrix& m) {
  const size_t n = m.rows();
  const Rational width_goal(1, Int("1000000000"));

  Poly p = characteristic_polynomial(m);
  Poly g = poly_gcd(p, derivative(p));
  Poly sf = degree(g) > 0 ? divide_exact(p, g) : p;
  auto chain = sturm_chain(sf);

  Rational bound(1);
  for (size_t i = 0; i < n; ++i) {
    Rational row_sum(0);
    for (size_t j = 0; j < n; ++j) row_sum += m.at(i, j);
    if (row_sum + 1 > bound) bound = row_sum + 1;
  }

  SpectralRadius out;
  if (roots_in(chain, Rational(0), bound) == 0) {
    // No positive roots: the radius of a nonnegative matrix is 0.
    out.lo = out.hi = Rational(0);
    out.exact = true;
    out.witness = exact_kernel_vector(m, Rational(0));
    if (std::all_of(out.witness.begin(), out.witness.end(), [](const Rational& c) { return c == 0; }))
      out.witness.assign(n, Rational(0));
    return out;
  }

  // Keep the rightmost root bracketed in (lo, hi].
  Rational lo(0), hi = bound;
  while (true) {
    if (hi - lo <= width_goal && roots_in(chain, lo, hi) == 1) {
      Rational candidate = simplest_rational_in(lo, hi);
      if (eval(sf, candidate) == 0 && roots_in(chain, candidate, hi) == 0) {
        out.lo = out.hi = candidate;
        out.exact = true;
        out.witness = exact_kernel_vector(m, candidate);
        return out;
      }
      break;
    }
    Rational mid = (lo + hi) / 2;
    if (roots_in(chain, mid, hi) >= 1) lo = mid; else hi = mid;
    // Rational roots are caught early; try the simplest candidate each round.
    Rational candidate = simplest_rational_in(lo, hi);
    if (eval(sf, candidate) == 0 && roots_in(chain, candidate, hi) == 0) {
      out.lo = out.hi = candidate;
      out.exact = true;
      out.witness = exact_kernel_vector(m, candidate);
      return out;
    }
  }
  out.lo = lo;
  out.hi = hi;
  out.exact = false;
  out.witness = inverse_iteration_witness(m, lo, hi);
  return out;
}

SpectralRadius spectral_radius_power(const LambdaMatrix& m) {
  const size_t n = m.rows();
  const Rational width_goal(1, Int("1000000000"));
  std::vector<double> a(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) a[i * n + j] = to_double(m.at(i, j)) + (i == j ? 1.0 : 0.0);
  std::vector<double> v(n, 1.0), w(n);
  for (long iter = 0; iter < 500000; ++iter) {
    double mx = 0;
    for (size_t i = 0; i < n; ++i) {
      double s = 0;
      for (size_t j = 0; j < n; ++j) s += a[i * n + j] * v[j];
      w[i] = s;
      mx = std::max(mx, s);
    }
    double lo = 1e300, hi = 0;
    for (size_t i = 0; i < n; ++i) {
      if (v[i] <= 0) { lo = 0; hi = 1e300; break; }
      lo = std::min(lo, w[i] / v[i]);
      hi = std::max(hi, w[i] / v[i]);
    }
    for (size_t i = 0; i < n; ++i) v[i] = w[i] / mx;
    if (iter > 16 && hi - lo < 2e-10) break;
  }
  // Certify with exact Collatz-Wielandt bounds on the shifted matrix.
  std::vector<Rational> vr(n);
  for (size_t i = 0; i < n; ++i) vr[i] = Rational(std::max(v[i], 1e-300));
  std::vector<Rational> wr = mat_vec(m, vr);
  Rational lo = wr[0] / vr[0] + 1, hi = lo;  // shifted ratios (M+I)v / v
  for (size_t i = 0; i < n; ++i) {
    Rational r = wr[i] / vr[i] + 1;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  SpectralRadius out;
  out.lo = lo - 1;
  out.hi = hi - 1;
  if (out.lo < 0) out.lo = 0;
  out.exact = false;
  out.witness = vr;
  if (out.hi - out.lo > width_goal)
    throw Error(ErrorCode::ConvergenceFailure,
                "power iteration did not certify the spectral radius to 1e-9");
  return out;
}

}  // namespace

Rational SpectralRadius::rayleigh_quotient(const LambdaMatrix& m) const {
  return rq(m, witness);
}

SpectralRadius spectral_radius(const LambdaMatrix& m) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::NotSquare, "spectral radius requires a square (invariant) matrix");
  std::set<std::string> r(m.row_ids().begin(), m.row_ids().end());
  std::set<std::string> c(m.col_ids().begin(), m.col_ids().end());
  if (r != c)
    throw Error(ErrorCode::NotSquare, "row and column curve sets differ");
  for (size_t i = 0; i < m.rows(); ++i)
    for (size_t j = 0; j < m.cols(); ++j)
      if (m.at(i, j) < 0)
        throw Error(ErrorCode::BadArgument, "lambda matrices are nonnegative");
  if (m.rows() == 0) {
    SpectralRadius out;
    out.lo = out.hi = Rational(0);
    out.exact = true;
    return out;
  }
  if (m.rows() <= 8) return spectral_radius_small(m);
  return spectral_radius_power(m);
}

ThurstonVerdict thurston_verdict(const LambdaMatrix& m, const OrbifoldSignature& orb) {
  if (!orb.hyperbolic())
    throw Error(ErrorCode::EuclideanOrbifold,
                "verdict requires a hyperbolic orbifold; the Euclidean relationship is more subtle");
  SpectralRadius rho = spectral_radius(m);
  bool obstructed;
  if (rho.exact) obstructed = rho.lo >= 1;
  else if (rho.hi < 1) obstructed = false;
  else if (rho.lo >= 1) obstructed = true;
  else
    throw Error(ErrorCode::ConvergenceFailure, "spectral radius bracket straddles 1");
  return {obstructed, std::move(rho)};
}

}  // namespace thurston
