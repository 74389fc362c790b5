#pragma once

#include <array>

#include "thurston/virtual_endo.hpp"

namespace thurston {

// ---------------------------------------------------------------------------
// Geometric slope-pullback oracle, fully independent of the wreath pipeline:
// curves are drawn as polygonal loops on the marked dynamical sphere, lifted
// through the actual Thurston polynomial by numeric continuation, split into
// components, and classified back to slopes by signed crossings against a
// reference star.
// ---------------------------------------------------------------------------

struct PolynomialFixture {
  RationalMap polynomial;   // normalized so the marked points are 0, 1, m, inf
  GaussianRational m;       // the fourth marked point (the moduli basepoint)
};

// z^2 + i conjugated by z -> i - z: F(w) = -(w - i)^2 on {0, 1, 2i, inf}.
PolynomialFixture z2i_polynomial_fixture();

// Image class and exact multiplier of the pullback of the slope-s curve.
// The k field is not geometric and is reported as 0.
SlopePullbackResult geometric_oracle(const Slope& s, const PolynomialFixture& fixture);

// Exposed for tests: a polygonal representative of the slope-s curve on the
// fixture's marked sphere, and the class lookup used by the oracle.
std::vector<Complex> oracle_curve(const Slope& s, const PolynomialFixture& fixture);
Slope oracle_classify(const std::vector<Complex>& curve, const PolynomialFixture& fixture,
                      const Int& height_bound = 40);

}  // namespace thurston
