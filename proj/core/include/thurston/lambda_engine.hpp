#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "thurston/errors.hpp"
#include "thurston/rational.hpp"

namespace thurston {

// ---------------------------------------------------------------------------
// Declared pullback combinatorics and the induced linear transformation
// lambda_f : R[S_B] -> R[S_A] with entries sum(1/deg) over preimage
// components. Everything exact rational.
// ---------------------------------------------------------------------------

inline constexpr const char* kTrivialId = "o";

struct PullbackComponent {
  std::string curve;  // codomain curve id, or "o" for a trivial component
  Int degree = 1;
};

struct PullbackSpec {
  std::vector<std::string> domain_curves;    // S_B side: inputs of lambda_f
  std::vector<std::string> codomain_curves;  // S_A side: preimage components
  // entries[j] lists the preimage components of domain_curves[j]
  std::vector<std::vector<PullbackComponent>> entries;
  std::optional<Int> covering_degree;

  void validate() const;  // throws MalformedSpec
};

class LambdaMatrix {
 public:
  LambdaMatrix() = default;
  LambdaMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids);

  size_t rows() const { return row_ids_.size(); }
  size_t cols() const { return col_ids_.size(); }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<std::string>& col_ids() const { return col_ids_; }

  const Rational& at(size_t i, size_t j) const { return data_[i * cols() + j]; }
  Rational& at(size_t i, size_t j) { return data_[i * cols() + j]; }

 private:
  std::vector<std::string> row_ids_, col_ids_;
  std::vector<Rational> data_;
};

LambdaMatrix build_lambda(const PullbackSpec& spec);

// Columns (domain curves) whose entries are all exactly zero.
std::vector<std::string> kernel_columns(const LambdaMatrix& m);

enum class InvarianceKind { Invariant, CompletelyInvariant, Neither };

struct InvarianceResult {
  InvarianceKind kind;
  std::vector<std::string> escaping;  // nonempty only for Neither
};

// Set-level comparison of f^{-1}(Gamma) with Gamma over the declared ids.
InvarianceResult invariance_check(const PullbackSpec& spec);

// ---------------------------------------------------------------------------
// Orbifold signatures: the least admissible ramification function nu_f and
// chi(O_f) = 2 - sum(1 - 1/nu).
// ---------------------------------------------------------------------------

struct Portrait {
  std::vector<std::string> points;
  std::map<std::string, std::string> map;         // total on points
  std::map<std::string, Int> local_degree;        // >= 1, default 1
  std::map<std::string, std::vector<Int>> extra_critical;  // x -> local degrees of
                                                           // non-marked critical preimages
  std::optional<Int> degree;

  void validate() const;  // throws MalformedSpec
};

// nullopt encodes infinity.
using Nu = std::optional<Int>;

struct OrbifoldSignature {
  std::vector<std::string> points;
  std::map<std::string, Nu> nu;
  Rational euler;

  bool hyperbolic() const { return euler < 0; }
  bool euclidean() const { return euler == 0; }
  // Finite nu values > 1 sorted ascending, then one "inf" per infinite point.
  std::vector<std::string> signature() const;
};

OrbifoldSignature orbifold_signature(const Portrait& p);

// ---------------------------------------------------------------------------
// Spectral radius of a nonnegative rational matrix. For n <= 8 the value is
// isolated exactly from the characteristic polynomial with a Sturm chain;
// rational answers come back exact. Larger matrices use double power
// iteration certified after the fact by exact Collatz-Wielandt bounds.
// ---------------------------------------------------------------------------

struct SpectralRadius {
  Rational lo, hi;  // certified enclosure; lo == hi iff exact
  bool exact = false;
  std::vector<Rational> witness;  // Perron vector approximation

  Rational rayleigh_quotient(const LambdaMatrix& m) const;
};

inline constexpr const char* kSpectralWidthGoal = "1e-9";

SpectralRadius spectral_radius(const LambdaMatrix& m);  // throws NotSquare

struct ThurstonVerdict {
  bool obstructed;
  SpectralRadius rho;
};

// Obstructed iff rho >= 1, decided exactly for n <= 8. Refuses non-hyperbolic
// orbifolds (the Euclidean relationship is more subtle and out of scope).
ThurstonVerdict thurston_verdict(const LambdaMatrix& m, const OrbifoldSignature& orb);

}  // namespace thurston
