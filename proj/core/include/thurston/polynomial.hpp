#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "thurston/errors.hpp"
#include "thurston/rational.hpp"

namespace thurston {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Gaussian rationals a + b i with exact rational parts.
// ---------------------------------------------------------------------------

struct GaussianRational {
  Rational re, im;

  GaussianRational() : re(0), im(0) {}
  GaussianRational(Rational r) : re(std::move(r)), im(0) {}
  GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  bool is_zero() const { return re == 0 && im == 0; }
  GaussianRational conj() const { return {re, -im}; }
  Rational norm() const { return re * re + im * im; }
  Complex to_complex() const { return {to_double(re), to_double(im)}; }

  GaussianRational operator+(const GaussianRational& o) const { return {re + o.re, im + o.im}; }
  GaussianRational operator-(const GaussianRational& o) const { return {re - o.re, im - o.im}; }
  GaussianRational operator-() const { return {-re, -im}; }
  GaussianRational operator*(const GaussianRational& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  GaussianRational operator/(const GaussianRational& o) const;
  bool operator==(const GaussianRational& o) const = default;

  // "a/b+c/d i" and the usual degenerate spellings ("1", "-i", "1/2-3/4i").
  std::string str() const;
  static std::optional<GaussianRational> parse(const std::string& s);
};

// ---------------------------------------------------------------------------
// Polynomials over the Gaussian rationals, coefficients low-to-high.
// ---------------------------------------------------------------------------

class GaussianPoly {
 public:
  GaussianPoly() = default;
  explicit GaussianPoly(std::vector<GaussianRational> coeffs);

  static GaussianPoly constant(GaussianRational c);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }  // -1 for zero
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<GaussianRational>& coeffs() const { return coeffs_; }
  const GaussianRational& leading() const { return coeffs_.back(); }

  GaussianRational eval(const GaussianRational& a) const;
  Complex eval(const Complex& z) const;

  GaussianPoly derivative() const;
  GaussianPoly operator+(const GaussianPoly& o) const;
  GaussianPoly operator-(const GaussianPoly& o) const;
  GaussianPoly operator*(const GaussianPoly& o) const;
  GaussianPoly scale(const GaussianRational& c) const;

  // Exact order of vanishing at a (0 when p(a) != 0).
  int order_at(const GaussianRational& a) const;

  // Coefficients of p(a + t) as a polynomial in t.
  GaussianPoly taylor_at(const GaussianRational& a) const;

  // Coefficients reversed against a declared degree d >= degree():
  // returns q with q(u) = u^d p(1/u).
  GaussianPoly reversed(int d) const;

  std::vector<Complex> complex_coeffs() const;

 private:
  std::vector<GaussianRational> coeffs_;  // trimmed: leading coeff nonzero
};

// Sylvester resultant; nonzero iff the polynomials are coprime.
GaussianRational resultant(const GaussianPoly& a, const GaussianPoly& b);

// ---------------------------------------------------------------------------
// Root finding: Aberth-Ehrlich with relative-residual certification, plus an
// exact deflation pass for Gaussian-rational roots.
// ---------------------------------------------------------------------------

struct RootEstimate {
  Complex z;
  int multiplicity = 1;
  std::optional<GaussianRational> exact;
};

struct RootOptions {
  double tol_res = 1e-12;     // relative residual certificate
  double cluster = 2e-5;      // multiplicity grouping radius
  int max_iter = 400;
  int exact_denominator_bound = 64;  // candidate search for exact roots
};

// All finite roots of p with multiplicity (sum = degree). Throws
// ConvergenceFailure when the residual certificate cannot be met.
std::vector<RootEstimate> find_roots(const GaussianPoly& p, const RootOptions& opt = {});

// Convenience for double-precision polynomials (no exact pass).
std::vector<Complex> aberth(const std::vector<Complex>& coeffs, double tol_res = 1e-12,
                            int max_iter = 400);

// ---------------------------------------------------------------------------
// Points on the Riemann sphere with optional exact coordinates.
// ---------------------------------------------------------------------------

struct SpherePoint {
  bool is_inf = false;
  Complex z{0.0, 0.0};
  std::optional<GaussianRational> exact;  // finite points only

  static SpherePoint infinity() { return {true, {0, 0}, std::nullopt}; }
  static SpherePoint at(Complex w) { return {false, w, std::nullopt}; }
  static SpherePoint at_exact(GaussianRational g) {
    SpherePoint p{false, g.to_complex(), std::move(g)};
    return p;
  }
  std::string str() const;
};

double chordal(const SpherePoint& a, const SpherePoint& b);
double chordal(const Complex& a, const Complex& b);

}  // namespace thurston
