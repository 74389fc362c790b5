#include "thurston/curve_algebra.hpp"

#include <random>

#include "doctest.h"

using namespace thurston;

namespace {

FreeWord W(const std::string& s) { return *FreeWord::parse(s); }
Slope S(const std::string& s) { return *Slope::parse(s); }

// Independent 2x2 oracle over long long, used to freeze expected matrices.
struct M2 {
  long long a, b, c, d;
  M2 mul(const M2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

bool same_mod_sign(const TwistMatrix& m, const M2& o) {
  if (m.a() == o.a && m.b() == o.b && m.c() == o.c && m.d() == o.d) return true;
  return m.a() == -o.a && m.b() == -o.b && m.c() == -o.c && m.d() == -o.d;
}

}  // namespace

TEST_CASE("slope normalization and parsing") {
  CHECK(Slope(2, 4) == Slope(1, 2));
  CHECK(Slope(-1, -2) == Slope(1, 2));
  CHECK(Slope(1, -2) == Slope(-1, 2));
  CHECK(Slope(5, 0) == Slope(1, 0));
  CHECK(Slope(0, -7) == Slope(0, 1));
  CHECK(S("1/0").str() == "1/0");
  CHECK(S("o").is_trivial());
  CHECK(!Slope::parse("1/").has_value());
  CHECK(!Slope::parse("0/0").has_value());
  CHECK_THROWS_AS(Slope::trivial().p(), Error);
}

TEST_CASE("parity classes") {
  CHECK(S("1/0").parity() == ParityClass::E0);
  CHECK(S("0/1").parity() == ParityClass::E1);
  CHECK(S("1/1").parity() == ParityClass::EINF);
  CHECK(S("3/2").parity() == ParityClass::E0);
  CHECK(S("2/5").parity() == ParityClass::E1);
  CHECK(S("-3/5").parity() == ParityClass::EINF);
}

TEST_CASE("intersection numbers") {
  CHECK(intersection(S("0/1"), S("1/0")) == 2);
  CHECK(intersection(S("1/2"), S("1/2")) == 0);
  // 2|1*5 - 3*2| by hand
  CHECK(intersection(S("1/2"), S("3/5")) == 2);
  CHECK(intersection(S("1/2"), S("3/5")) == intersection(S("3/5"), S("1/2")));
  CHECK_THROWS_AS(intersection(Slope::trivial(), S("1/2")), Error);
}

TEST_CASE("twist matrices at the generators") {
  TwistMatrix tx = twist_matrix(S("1/0"), 1);
  CHECK(tx == TwistMatrix(1, 2, 0, 1));
  TwistMatrix ty = twist_matrix(S("0/1"), 1);
  CHECK(ty == TwistMatrix(1, 0, -2, 1));
  // (1/1, 1) -> [[-1,2],[-2,3]], which is +-(xy)^-1.
  TwistMatrix tz = twist_matrix(S("1/1"), 1);
  CHECK(tz == TwistMatrix(-1, 2, -2, 3));
  TwistMatrix xy = matrix_of_word(W("xy"));
  CHECK(tz == xy.inverse());
  CHECK_THROWS_AS(twist_matrix(Slope::trivial(), 1), Error);
  CHECK_THROWS_AS(twist_matrix(S("1/2"), 0), Error);
}

TEST_CASE("matrix_of_word basics") {
  CHECK(matrix_of_word(FreeWord::one()).is_identity());
  CHECK(matrix_of_word(W("x")) == TwistMatrix(1, 2, 0, 1));
  // 2x2 multiplication oracle: x*y = [[-3,2],[-2,1]]
  M2 ox{1, 2, 0, 1}, oy{1, 0, -2, 1};
  CHECK(same_mod_sign(matrix_of_word(W("xy")), ox.mul(oy)));
  CHECK(same_mod_sign(matrix_of_word(W("xyXY")), ox.mul(oy).mul(M2{1, -2, 0, 1}).mul(M2{1, 0, 2, 1})));
  CHECK(matrix_of_word(W("xX")).is_identity());
}

TEST_CASE("word_of_matrix on the named cases") {
  CHECK(word_of_matrix(TwistMatrix()).empty());
  CHECK(word_of_matrix(TwistMatrix(1, 2, 0, 1)) == W("x"));
  CHECK(word_of_matrix(TwistMatrix(-1, 2, -2, 3)) == W("YX"));
  CHECK_THROWS_AS(TwistMatrix(1, 1, 0, 1), Error);   // parity fails
  CHECK_THROWS_AS(TwistMatrix(3, 2, 2, 1), Error);   // det fails
}

TEST_CASE("word_of_matrix round trips on random words") {
  std::mt19937 rng(20240817);
  std::uniform_int_distribution<int> letter(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Letter> ls;
    int n = 1 + trial % 17;
    for (int i = 0; i < n; ++i) ls.push_back(static_cast<Letter>(letter(rng)));
    FreeWord w(ls);
    TwistMatrix m = matrix_of_word(w);
    FreeWord back = word_of_matrix(m);
    CHECK(matrix_of_word(back) == m);
    CHECK(back == w);  // the representation is faithful and reduction greedy-canonical
  }
}

TEST_CASE("classify_parabolic") {
  CHECK(std::holds_alternative<Identity>(classify_parabolic(TwistMatrix())));

  auto t = classify_parabolic(twist_matrix(S("1/2"), 3));
  REQUIRE(std::holds_alternative<Twist>(t));
  CHECK(std::get<Twist>(t) == Twist{S("1/2"), 3});

  // x*y has trace -2 and is the inverse twist about 1/1.
  auto z = classify_parabolic(matrix_of_word(W("xy")));
  REQUIRE(std::holds_alternative<Twist>(z));
  CHECK(std::get<Twist>(z) == Twist{S("1/1"), -1});

  // A pseudo-Anosov: x*y^-1 = [[5,2],[2,1]]? check trace > 2.
  auto pa = classify_parabolic(matrix_of_word(W("xY")));
  REQUIRE(std::holds_alternative<NonParabolic>(pa));
  CHECK(abs(std::get<NonParabolic>(pa).trace) > 2);
  CHECK(std::get<NonParabolic>(pa).pseudo_anosov);
}

TEST_CASE("act on slopes") {
  CHECK(act(FreeWord::one(), S("1/0")) == S("1/0"));
  CHECK(act(W("x"), S("0/1")) == S("2/1"));
  CHECK(act(W("y"), S("1/0")) == S("-1/2"));
  CHECK_THROWS_AS(act(W("x"), Slope::trivial()), Error);
}

TEST_CASE("invariant: twist round trip over |p|,|q| <= 50") {
  for (long long q = 0; q <= 50; ++q) {
    for (long long p = (q == 0 ? 1 : -50); p <= (q == 0 ? 1 : 50); ++p) {
      if (q != 0 && (p == 0 && q != 1)) continue;
      if (gcd(Int(p < 0 ? -p : p), Int(q)) != 1) continue;
      Slope s(p, q);
      for (long long k = -3; k <= 3; ++k) {
        if (k == 0) continue;
        auto cls = classify_parabolic(twist_matrix(s, k));
        REQUIRE(std::holds_alternative<Twist>(cls));
        const Twist& tw = std::get<Twist>(cls);
        CHECK(tw.slope == s);
        CHECK(tw.power == k);
      }
    }
  }
}

TEST_CASE("invariant: conjugation equivariance, 100 random cases") {
  std::mt19937 rng(7u);
  std::uniform_int_distribution<int> letter(0, 3), len(0, 10), pq(-20, 20), kk(-3, 3);
  int done = 0;
  while (done < 100) {
    std::vector<Letter> ls;
    int n = len(rng);
    for (int i = 0; i < n; ++i) ls.push_back(static_cast<Letter>(letter(rng)));
    FreeWord w(ls);
    long long p = pq(rng), q = pq(rng), k = kk(rng);
    if ((p == 0 && q == 0) || k == 0) continue;
    Slope s{Int(p), Int(q)};
    TwistMatrix m = matrix_of_word(w);
    TwistMatrix conj = m * twist_matrix(s, k) * m.inverse();
    auto cls = classify_parabolic(conj);
    REQUIRE(std::holds_alternative<Twist>(cls));
    CHECK(std::get<Twist>(cls) == Twist{act(w, s), Int(k)});
    ++done;
  }
}

TEST_CASE("invariant: no nonempty reduced word of length <= 12 maps to +-I") {
  // Iterative DFS over reduced words with incremental matrix products.
  struct Frame { TwistMatrix m; Letter last; int depth; };
  std::vector<Frame> stack;
  const Letter all[4] = {Letter::x, Letter::X, Letter::y, Letter::Y};
  static const TwistMatrix gen[4] = {TwistMatrix(1, 2, 0, 1), TwistMatrix(1, -2, 0, 1),
                                     TwistMatrix(1, 0, -2, 1), TwistMatrix(1, 0, 2, 1)};
  long long visited = 0;
  for (int i = 0; i < 4; ++i) stack.push_back({gen[i], all[i], 1});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    ++visited;
    REQUIRE(!f.m.is_identity());
    if (f.depth == 12) continue;
    for (int i = 0; i < 4; ++i) {
      if (all[i] == inverse(f.last)) continue;
      stack.push_back({f.m * gen[i], all[i], f.depth + 1});
    }
  }
  CHECK(visited == 4ll * ((pow(Int(3), 12) - 1) / 2).convert_to<long long>());
}

TEST_CASE("invariant: act preserves parity and intersection") {
  std::mt19937 rng(11u);
  std::uniform_int_distribution<int> letter(0, 3), len(1, 12), pq(-30, 30);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Letter> ls;
    int n = len(rng);
    for (int i = 0; i < n; ++i) ls.push_back(static_cast<Letter>(letter(rng)));
    FreeWord w(ls);
    long long p1 = pq(rng), q1 = pq(rng), p2 = pq(rng), q2 = pq(rng);
    if ((p1 == 0 && q1 == 0) || (p2 == 0 && q2 == 0)) continue;
    Slope s1{Int(p1), Int(q1)}, s2{Int(p2), Int(q2)};
    CHECK(act(w, s1).parity() == s1.parity());
    CHECK(intersection(act(w, s1), act(w, s2)) == intersection(s1, s2));
  }
}

TEST_CASE("free word algebra") {
  CHECK(W("xX").empty());
  CHECK((W("xy") * W("Yx")) == W("xx"));
  CHECK(W("xyX").inverse() == W("xYX"));
  CHECK(W("xy").pow(2) == W("xyxy"));
  CHECK(W("xy").pow(-1) == W("YX"));
  CHECK(W("Xyx").cyclic_reduction() == W("y"));
  CHECK(W("xyX").conjugate(W("x")) == W("xxyXX"));
  CHECK(!FreeWord::parse("xz").has_value());
}
