#pragma once

#include <optional>
#include <string>
#include <vector>

#include "thurston/curve_algebra.hpp"
#include "thurston/lambda_engine.hpp"
#include "thurston/polynomial.hpp"

namespace thurston {

// ---------------------------------------------------------------------------
// Rational maps over the Gaussian rationals, with chart-correct behaviour at
// infinity. The moduli-space correspondence for four marked points is
// presented by such a map: Y = g on the Hurwitz curve, X the inclusion
// (X-Injective) or a constant (X-Constant).
// ---------------------------------------------------------------------------

class RationalMap {
 public:
  RationalMap(GaussianPoly num, GaussianPoly den);  // coprime, degree >= 2

  int degree() const { return degree_; }
  const GaussianPoly& num() const { return num_; }
  const GaussianPoly& den() const { return den_; }

  SpherePoint eval(const SpherePoint& w) const;
  Complex eval_finite(const Complex& w) const;      // may overflow to inf
  Complex derivative(const Complex& w) const;       // (n'd - nd')/d^2

  // Exact local degree of the map at a point with exact coordinates (or inf).
  int local_degree(const SpherePoint& a) const;

  // Derivative at an exact fixed point, computed in charts (1/w at inf).
  GaussianRational chart_derivative_exact(const SpherePoint& fixed_point) const;

  // All preimages of v with multiplicity, infinity included.
  std::vector<std::pair<SpherePoint, int>> preimages(const SpherePoint& v,
                                                     const RootOptions& opt = {}) const;

  // Critical points with branching order (local degree - 1), infinity included.
  std::vector<std::pair<SpherePoint, int>> critical_points(const RootOptions& opt = {}) const;

  std::string str() const;

 private:
  GaussianPoly num_, den_;
  int degree_;
};

// The three ends of moduli space for four marked points.
enum class End { Zero, One, Inf };
const char* end_name(End e);
SpherePoint end_point(End e);
std::optional<End> end_of_point(const SpherePoint& p, double tol = 1e-9);
// Cusp class of each end under the slope dictionary.
ParityClass end_parity(End e);

enum class ModelKind { XInjective, XConstant };

struct ModelOptions {
  double tol_res = 1e-12;
  double tol_sep = 1e-6;
  int max_iter = 400;
};

struct GMapModel {
  RationalMap g;  // the g-map Y o X^-1 (X-Injective); the covering Y (X-Constant)
  ModelKind kind = ModelKind::XInjective;
  std::vector<SpherePoint> extra_punctures;  // g^{-1}(ends) \ ends
  SpherePoint basepoint;                     // m*
  ModelOptions options;
};

// Computes punctures, verifies the unramified-covering condition (all
// critical values in the ends), and selects the basepoint: the interior
// fixed point of smallest magnitude, ties to positive imaginary part.
GMapModel build_model(RationalMap g, ModelKind kind, const ModelOptions& options = {});

// ------------------------------ end dynamics -------------------------------

struct EndEntry {
  End end;
  std::optional<End> image;   // g(e) when it is an end
  bool has_w_end = false;     // e is a puncture of W, i.e. g(e) lies in the ends
  bool fixed = false;         // g(e) == e
  int local_degree_x = 1;
  int local_degree_y = 0;     // local degree of g at e when has_w_end
  std::optional<Complex> branch_derivative;  // a, when fixed with equal local degrees
  std::vector<std::string> verdicts;
};

struct EndReport {
  std::vector<EndEntry> ends;
  std::optional<End> repelling_fixed_end;
  std::optional<End> obstructed_twist_end;  // 0 < |a| < 1
  bool no_fixed_end() const;
};

EndReport end_dynamics(const GMapModel& model);

// --------------------------- critical orbit tests --------------------------

struct CriticalOrbit {
  SpherePoint point;
  int branching;          // local degree - 1
  std::vector<SpherePoint> orbit;  // forward orbit of the point
  int preperiod = -1;     // -1 when no cycle detected within the bound
  int period = 0;
};

struct PcfReport {
  bool pcf = false;
  int bound = 64;
  bool hyperbolic = false;  // every critical orbit lands in a cycle containing a critical point
  bool julia_compact_invariant = false;  // pcf && hyperbolic certificate
  std::vector<CriticalOrbit> orbits;
  std::optional<Portrait> portrait;  // postcritical portrait when pcf
};

PcfReport pcf_hyperbolic_check(const RationalMap& g, int bound = 64, double tol = 1e-9);

struct ExpansionCertificate {
  Int degree;           // expansion factor is sqrt(degree)
  double factor;
  OrbifoldSignature signature;
};

// Requires a PCF map with Euclidean orbifold; throws NotEuclidean otherwise.
ExpansionCertificate euclidean_expansion_certificate(const RationalMap& g);

// ------------------------------ orbit synthesis ----------------------------

// Plumbing systole surrogate 2*pi^2 / log(1/d), d = min(|u|, |u-1|, 1/|u|)
// clamped at 1/2; strictly decreasing toward every end. Throws AtEnd.
double systole_proxy(const Complex& mu);

// Newton-refined local inverse; throws BranchCollision near multiple
// preimages or critical points.
Complex inverse_branch(const RationalMap& g, const Complex& target, const Complex& seed,
                       double tol_sep = 1e-6);

struct ModuliOrbit {
  std::vector<Complex> points;       // mu_0 .. mu_N, pullback direction
  std::vector<std::string> labels;   // branch used to reach each point ("start", "end", "base")
  std::vector<double> proxies;       // systole proxy per point
  // Per-step pullback residual chordal(g(mu_{k+1}), mu_k), recorded during
  // synthesis in whichever chart represents the points faithfully (deep-end
  // points round to the end itself in double coordinates).
  std::vector<double> residuals;

  double max_residual() const;
};

ModuliOrbit synthesize_orbit(const GMapModel& model, double delta,
                             const std::vector<double>& epsilons);

// ------------------------------ X verdicts ---------------------------------

struct ConstantModelReport {
  // The five equivalent conditions: pullback relation, lambda, phi, sigma,
  // and the correspondence are all constant.
  bool relation_constant, lambda_constant, phi_constant, sigma_constant, correspondence_constant;
  Int y_degree;
};

ConstantModelReport constant_model_report(const GMapModel& model);  // WrongKind unless X-Constant

struct PropernessResult {
  bool proper;
  std::vector<SpherePoint> extra_punctures;
};

PropernessResult x_properness(const GMapModel& model);  // WrongKind unless X-Injective

}  // namespace thurston
