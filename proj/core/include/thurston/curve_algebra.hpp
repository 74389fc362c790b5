#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "thurston/errors.hpp"
#include "thurston/rational.hpp"

namespace thurston {

// ---------------------------------------------------------------------------
// Slopes: curve classes on the four-marked sphere.
//
// A nontrivial class is a reduced fraction p/q with q >= 0 (and p = 1 when
// q = 0). The symbol o for inessential/peripheral classes is a tagged
// variant, not a sentinel fraction.
// ---------------------------------------------------------------------------

enum class ParityClass { E0, E1, EINF };  // (p,q) mod 2: (1,0), (0,1), (1,1)

const char* parity_name(ParityClass c);

class Slope {
 public:
  Slope() : trivial_(true) {}
  Slope(Int p, Int q);

  static Slope trivial() { return Slope(); }

  bool is_trivial() const { return trivial_; }
  const Int& p() const;
  const Int& q() const;

  // max(|p|, |q|); the Farey height used by the search routines.
  Int height() const;

  ParityClass parity() const;

  std::string str() const;  // "p/q" or "o"
  static std::optional<Slope> parse(const std::string& s);

  bool operator==(const Slope& o) const;
  // Trivial first, then by (height, q, p); a deterministic total order.
  std::strong_ordering operator<=>(const Slope& o) const;

 private:
  bool trivial_ = false;
  Int p_ = 1, q_ = 0;
};

// Geometric intersection number 2|p1 q2 - p2 q1|. Throws TrivialCurve.
Int intersection(const Slope& a, const Slope& b);

// ---------------------------------------------------------------------------
// Free words over {x, y}, always freely reduced.
// Serialization: x, X = x^-1, y, Y = y^-1.
// ---------------------------------------------------------------------------

enum class Letter : std::uint8_t { x, X, y, Y };

Letter inverse(Letter l);
char letter_char(Letter l);

class FreeWord {
 public:
  FreeWord() = default;
  explicit FreeWord(std::vector<Letter> letters);

  static FreeWord one() { return FreeWord(); }
  static FreeWord gen(Letter l) { return FreeWord(std::vector<Letter>{l}); }
  static std::optional<FreeWord> parse(const std::string& s);

  bool empty() const { return letters_.empty(); }
  size_t size() const { return letters_.size(); }
  const std::vector<Letter>& letters() const { return letters_; }

  FreeWord operator*(const FreeWord& o) const;
  FreeWord inverse() const;
  FreeWord pow(long long k) const;
  FreeWord conjugate(const FreeWord& by) const;  // by * this * by^-1

  // Cyclically reduced representative (for conjugacy-class comparisons).
  FreeWord cyclic_reduction() const;

  std::string str() const;

  bool operator==(const FreeWord& o) const = default;

 private:
  void push(Letter l);
  std::vector<Letter> letters_;
};

// ---------------------------------------------------------------------------
// Gamma(2)/{+-I} as a faithful matrix model of PMod(S^2, 4 points).
// Generators: x -> [[1,2],[0,1]], y -> [[1,0],[-2,1]].
// Equality is always mod +-I.
// ---------------------------------------------------------------------------

class TwistMatrix {
 public:
  TwistMatrix();  // identity
  TwistMatrix(Int a, Int b, Int c, Int d);  // throws NotInGammaTwo

  const Int& a() const { return a_; }
  const Int& b() const { return b_; }
  const Int& c() const { return c_; }
  const Int& d() const { return d_; }
  Int trace() const { return a_ + d_; }

  TwistMatrix operator*(const TwistMatrix& o) const;
  TwistMatrix inverse() const;

  bool is_identity() const;          // +-I
  bool operator==(const TwistMatrix& o) const;  // mod +-I

  std::string str() const;

 private:
  Int a_, b_, c_, d_;
};

// Dehn twist power: T_s^k = [[1-2kpq, 2kp^2], [-2kq^2, 1+2kpq]].
// Throws TrivialCurve, ZeroPower.
TwistMatrix twist_matrix(const Slope& s, long long k);

TwistMatrix matrix_of_word(const FreeWord& w);

// Gamma(2) word problem by greedy Euclidean reduction on the first column.
FreeWord word_of_matrix(const TwistMatrix& m);

// classify_parabolic outcome.
struct Identity {};
struct Twist {
  Slope slope;
  Int power;
  bool operator==(const Twist& o) const = default;
};
struct NonParabolic {
  Int trace;                    // |trace| > 2
  bool pseudo_anosov = true;
  bool operator==(const NonParabolic& o) const = default;
};
using ParabolicClass = std::variant<Identity, Twist, NonParabolic>;

ParabolicClass classify_parabolic(const TwistMatrix& m);

// Mobius action of matrix_of_word(w) on slopes: (p,q) -> (ap+bq, cp+dq),
// reduced and normalized. Preserves the parity class. Throws TrivialCurve.
Slope act(const FreeWord& w, const Slope& s);
Slope act(const TwistMatrix& m, const Slope& s);

}  // namespace thurston
