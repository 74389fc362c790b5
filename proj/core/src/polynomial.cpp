#include "thurston/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace thurston {

// --------------------------- GaussianRational ------------------------------

GaussianRational GaussianRational::operator/(const GaussianRational& o) const {
  Rational n = o.norm();
  if (n == 0) throw Error(ErrorCode::BadArgument, "division by zero Gaussian rational");
  GaussianRational t = (*this) * o.conj();
  return {t.re / n, t.im / n};
}

std::string GaussianRational::str() const {
  if (im == 0) return rational_to_string(re);
  std::string i_part;
  if (im == 1) i_part = "i";
  else if (im == -1) i_part = "-i";
  else i_part = rational_to_string(im) + "i";
  if (re == 0) return i_part;
  if (im > 0 && im != 1) return rational_to_string(re) + "+" + i_part;
  if (im == 1) return rational_to_string(re) + "+i";
  return rational_to_string(re) + i_part;
}

std::optional<GaussianRational> GaussianRational::parse(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (c != ' ') s += c;
  if (s.empty()) return std::nullopt;
  // Split at the last top-level +/- that is not a leading sign and not inside
  // a fraction; fractions contain only digits and '/'.
  auto parse_part = [](std::string t, bool imag) -> std::optional<Rational> {
    if (imag) {
      if (t.empty() || t.back() != 'i') return std::nullopt;
      t.pop_back();
      if (t.empty() || t == "+") t = "1";
      else if (t == "-") t = "-1";
      // allow "3/4*i" spelling
      if (!t.empty() && t.back() == '*') t.pop_back();
    }
    return rational_from_string(t);
  };
  bool has_i = s.back() == 'i';
  size_t split = std::string::npos;
  for (size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != '/' && s[k - 1] != '+' && s[k - 1] != '-' &&
        s[k - 1] != 'e') {
      split = k;
      break;
    }
  }
  if (!has_i) {
    auto re = rational_from_string(s);
    if (!re) return std::nullopt;
    return GaussianRational(*re);
  }
  if (split == std::string::npos) {
    auto im = parse_part(s, true);
    if (!im) return std::nullopt;
    return GaussianRational(Rational(0), *im);
  }
  auto re = rational_from_string(s.substr(0, split));
  auto im = parse_part(s.substr(split), true);
  if (!re || !im) return std::nullopt;
  return GaussianRational(*re, *im);
}

// ------------------------------ GaussianPoly -------------------------------

GaussianPoly::GaussianPoly(std::vector<GaussianRational> coeffs) : coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
}

GaussianPoly GaussianPoly::constant(GaussianRational c) {
  return GaussianPoly(std::vector<GaussianRational>{std::move(c)});
}

GaussianRational GaussianPoly::eval(const GaussianRational& a) const {
  GaussianRational r;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) r = r * a + *it;
  return r;
}

Complex GaussianPoly::eval(const Complex& z) const {
  Complex r{0, 0};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) r = r * z + it->to_complex();
  return r;
}

GaussianPoly GaussianPoly::derivative() const {
  std::vector<GaussianRational> d;
  for (size_t i = 1; i < coeffs_.size(); ++i)
    d.push_back(coeffs_[i] * GaussianRational(Rational(Int(i))));
  return GaussianPoly(std::move(d));
}

GaussianPoly GaussianPoly::operator+(const GaussianPoly& o) const {
  std::vector<GaussianRational> c(std::max(coeffs_.size(), o.coeffs_.size()));
  for (size_t i = 0; i < c.size(); ++i) {
    if (i < coeffs_.size()) c[i] = c[i] + coeffs_[i];
    if (i < o.coeffs_.size()) c[i] = c[i] + o.coeffs_[i];
  }
  return GaussianPoly(std::move(c));
}

GaussianPoly GaussianPoly::operator-(const GaussianPoly& o) const {
  return *this + o.scale(GaussianRational(Rational(-1)));
}

GaussianPoly GaussianPoly::operator*(const GaussianPoly& o) const {
  if (is_zero() || o.is_zero()) return GaussianPoly();
  std::vector<GaussianRational> c(coeffs_.size() + o.coeffs_.size() - 1);
  for (size_t i = 0; i < coeffs_.size(); ++i)
    for (size_t j = 0; j < o.coeffs_.size(); ++j) c[i + j] = c[i + j] + coeffs_[i] * o.coeffs_[j];
  return GaussianPoly(std::move(c));
}

GaussianPoly GaussianPoly::scale(const GaussianRational& s) const {
  std::vector<GaussianRational> c = coeffs_;
  for (auto& x : c) x = x * s;
  return GaussianPoly(std::move(c));
}

int GaussianPoly::order_at(const GaussianRational& a) const {
  if (is_zero()) throw Error(ErrorCode::BadArgument, "order of the zero polynomial");
  // Synthetic division by (w - a) while the remainder vanishes.
  std::vector<GaussianRational> c = coeffs_;
  int order = 0;
  while (true) {
    GaussianRational r;
    std::vector<GaussianRational> q(c.size() > 0 ? c.size() - 1 : 0);
    for (size_t i = c.size(); i-- > 0;) {
      GaussianRational coeff = c[i] + r * a;
      if (i == 0) {
        if (!coeff.is_zero()) return order;
        break;
      }
      q[i - 1] = coeff;
      r = coeff;
    }
    ++order;
    c = std::move(q);
    if (c.empty()) return order;
  }
}

GaussianPoly GaussianPoly::taylor_at(const GaussianRational& a) const {
  // Repeated synthetic division by (w - a); the remainders are the shifted
  // coefficients, lowest first.
  std::vector<GaussianRational> c = coeffs_, out;
  out.reserve(coeffs_.size());
  while (!c.empty()) {
    std::vector<GaussianRational> q(c.size() > 1 ? c.size() - 1 : 0);
    GaussianRational carry;
    for (size_t i = c.size(); i-- > 0;) {
      GaussianRational val = c[i] + carry * a;
      if (i == 0) out.push_back(val);
      else {
        q[i - 1] = val;
        carry = val;
      }
    }
    c = std::move(q);
  }
  return GaussianPoly(std::move(out));
}

GaussianPoly GaussianPoly::reversed(int d) const {
  std::vector<GaussianRational> c(d + 1);
  for (size_t i = 0; i < coeffs_.size(); ++i) c[d - i] = coeffs_[i];
  return GaussianPoly(std::move(c));
}

std::vector<Complex> GaussianPoly::complex_coeffs() const {
  std::vector<Complex> c;
  c.reserve(coeffs_.size());
  for (const auto& g : coeffs_) c.push_back(g.to_complex());
  return c;
}

GaussianRational resultant(const GaussianPoly& a, const GaussianPoly& b) {
  int n = a.degree(), m = b.degree();
  if (n < 0 || m < 0) return GaussianRational();
  if (n == 0 && m == 0) return GaussianRational(Rational(1));
  int size = n + m;
  if (size == 0) return GaussianRational(Rational(1));
  // Sylvester matrix, then exact Gaussian elimination tracking the sign.
  std::vector<std::vector<GaussianRational>> s(size, std::vector<GaussianRational>(size));
  for (int r = 0; r < m; ++r)
    for (int i = 0; i <= n; ++i) s[r][r + (n - i)] = a.coeffs()[i];
  for (int r = 0; r < n; ++r)
    for (int i = 0; i <= m; ++i) s[m + r][r + (m - i)] = b.coeffs()[i];
  GaussianRational det(Rational(1));
  for (int col = 0; col < size; ++col) {
    int sel = -1;
    for (int i = col; i < size; ++i)
      if (!s[i][col].is_zero()) { sel = i; break; }
    if (sel < 0) return GaussianRational();
    if (sel != col) {
      std::swap(s[sel], s[col]);
      det = -det;
    }
    det = det * s[col][col];
    for (int i = col + 1; i < size; ++i) {
      if (s[i][col].is_zero()) continue;
      GaussianRational f = s[i][col] / s[col][col];
      for (int j = col; j < size; ++j) s[i][j] = s[i][j] - f * s[col][j];
    }
  }
  return det;
}

// -------------------------------- Aberth -----------------------------------

namespace {

double coeff_scale(const std::vector<Complex>& c, double x) {
  double s = 0, p = 1;
  for (const auto& a : c) {
    s += std::abs(a) * p;
    p *= x;
  }
  return s;
}


}  // namespace

std::vector<Complex> aberth(const std::vector<Complex>& coeffs_in, double tol_res, int max_iter) {
  std::vector<Complex> c = coeffs_in;
  while (!c.empty() && std::abs(c.back()) == 0.0) c.pop_back();
  if (c.size() <= 1) return {};
  int n = static_cast<int>(c.size()) - 1;

  // Zero roots split off exactly.
  int zeros = 0;
  while (zeros < n && std::abs(c[zeros]) == 0.0) ++zeros;
  std::vector<Complex> roots(zeros, Complex{0, 0});
  if (zeros > 0) c.erase(c.begin(), c.begin() + zeros);
  n -= zeros;
  if (n == 0) return roots;

  // Cauchy-style radius for initial guesses.
  double radius = 0;
  for (int i = 0; i < n; ++i) radius = std::max(radius, std::pow(std::abs(c[i] / c[n]), 1.0 / (n - i)));
  radius = std::max(radius, 1e-6) * 1.2;

  std::vector<Complex> z(n);
  for (int i = 0; i < n; ++i) {
    double theta = 2 * M_PI * i / n + 0.43;
    z[i] = radius * Complex{std::cos(theta), std::sin(theta)};
  }

  for (int iter = 0; iter < max_iter; ++iter) {
    double worst = 0;
    for (int i = 0; i < n; ++i) {
      Complex p{0, 0}, dp{0, 0};
      for (int k = n; k >= 0; --k) {
        dp = dp * z[i] + p;
        p = p * z[i] + c[k];
      }
      double denom_scale = coeff_scale(c, std::abs(z[i]));
      worst = std::max(worst, std::abs(p) / (denom_scale > 0 ? denom_scale : 1.0));
      Complex newton = dp != Complex{0, 0} ? p / dp : Complex{0, 0};
      Complex sum{0, 0};
      for (int j = 0; j < n; ++j)
        if (j != i && z[i] != z[j]) sum += 1.0 / (z[i] - z[j]);
      Complex denom = 1.0 - newton * sum;
      Complex step = denom != Complex{0, 0} ? newton / denom : newton;
      if (dp == Complex{0, 0} && p != Complex{0, 0})
        step = 0.5 * (std::abs(z[i]) + 1.0) * Complex{std::cos(0.77 * (iter + i)), std::sin(0.77 * (iter + i))};
      z[i] -= step;
    }
    if (worst < tol_res) break;
    if (iter + 1 == max_iter)
      throw Error(ErrorCode::ConvergenceFailure, "root finding residual certificate not met");
  }
  roots.insert(roots.end(), z.begin(), z.end());
  return roots;
}

std::vector<RootEstimate> find_roots(const GaussianPoly& p, const RootOptions& opt) {
  std::vector<RootEstimate> out;
  if (p.degree() <= 0) return out;

  // Exact pass: peel off Gaussian-rational roots found by rounding numeric
  // roots to small denominators and verifying exactly.
  GaussianPoly work = p;
  bool progress = true;
  while (progress && work.degree() > 0) {
    progress = false;
    std::vector<Complex> numeric = aberth(work.complex_coeffs(), opt.tol_res, opt.max_iter);
    for (const Complex& r : numeric) {
      // Generous small-denominator candidates; the verification below is
      // exact, so a wrong guess only costs time. Multiple roots come out of
      // Aberth with roughly sqrt(residual) accuracy.
      auto approx = [&](double v) -> std::optional<Rational> {
        for (long long den = 1; den <= opt.exact_denominator_bound; ++den) {
          double scaled = v * den;
          if (std::abs(scaled) > 1e17) return std::nullopt;
          if (std::abs(scaled - std::llround(scaled)) < 0.01)
            return Rational(Int(std::llround(scaled)), Int(den));
        }
        return std::nullopt;
      };
      auto re = approx(r.real());
      auto im = approx(r.imag());
      if (!re || !im) continue;
      GaussianRational cand(*re, *im);
      if (std::abs(cand.to_complex() - r) > 1e-4) continue;
      int ord = work.order_at(cand);
      if (ord == 0) continue;
      // Deflate exactly ord times.
      for (int k = 0; k < ord; ++k) {
        std::vector<GaussianRational> q(work.coeffs().size() - 1);
        GaussianRational carry;
        for (size_t i = work.coeffs().size(); i-- > 1;) {
          carry = work.coeffs()[i] + carry * cand;
          q[i - 1] = carry;
        }
        work = GaussianPoly(std::move(q));
      }
      bool merged = false;
      for (auto& e : out)
        if (e.exact && *e.exact == cand) { e.multiplicity += ord; merged = true; }
      if (!merged) out.push_back({cand.to_complex(), ord, cand});
      progress = true;
      break;
    }
  }

  if (work.degree() > 0) {
    std::vector<Complex> numeric = aberth(work.complex_coeffs(), opt.tol_res, opt.max_iter);
    // Group residual numeric roots into multiplicity clusters.
    std::vector<bool> used(numeric.size(), false);
    for (size_t i = 0; i < numeric.size(); ++i) {
      if (used[i]) continue;
      RootEstimate e{numeric[i], 1, std::nullopt};
      Complex sum = numeric[i];
      for (size_t j = i + 1; j < numeric.size(); ++j) {
        if (used[j]) continue;
        if (std::abs(numeric[j] - numeric[i]) < opt.cluster) {
          used[j] = true;
          ++e.multiplicity;
          sum += numeric[j];
        }
      }
      e.z = sum / static_cast<double>(e.multiplicity);
      out.push_back(e);
    }
  }
  return out;
}

// ------------------------------ SpherePoint --------------------------------

std::string SpherePoint::str() const {
  if (is_inf) return "inf";
  if (exact) return exact->str();
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g%+.12gi", z.real(), z.imag());
  return buf;
}

double chordal(const Complex& a, const Complex& b) {
  return std::abs(a - b) / std::sqrt((1 + std::norm(a)) * (1 + std::norm(b)));
}

double chordal(const SpherePoint& a, const SpherePoint& b) {
  if (a.is_inf && b.is_inf) return 0;
  if (a.is_inf) return 1 / std::sqrt(1 + std::norm(b.z));
  if (b.is_inf) return 1 / std::sqrt(1 + std::norm(a.z));
  return chordal(a.z, b.z);
}

}  // namespace thurston
