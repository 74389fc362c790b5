#include "thurston/curve_algebra.hpp"

#include <algorithm>

namespace thurston {

const char* parity_name(ParityClass c) {
  switch (c) {
    case ParityClass::E0: return "E0";
    case ParityClass::E1: return "E1";
    case ParityClass::EINF: return "EINF";
  }
  return "?";
}

// ------------------------------- Slope ------------------------------------

Slope::Slope(Int p, Int q) : trivial_(false), p_(std::move(p)), q_(std::move(q)) {
  if (p_ == 0 && q_ == 0) throw Error(ErrorCode::BadArgument, "0/0 is not a slope");
  Int g = gcd(abs(p_), abs(q_));
  if (g > 1) { p_ /= g; q_ /= g; }
  if (q_ < 0) { p_ = -p_; q_ = -q_; }
  if (q_ == 0) p_ = 1;
  if (p_ == 0) q_ = 1;
}

const Int& Slope::p() const {
  if (trivial_) throw Error(ErrorCode::TrivialCurve, "trivial class has no slope");
  return p_;
}

const Int& Slope::q() const {
  if (trivial_) throw Error(ErrorCode::TrivialCurve, "trivial class has no slope");
  return q_;
}

Int Slope::height() const { return std::max(abs(p()), abs(q())); }

ParityClass Slope::parity() const {
  bool podd = (p() % 2) != 0, qodd = (q() % 2) != 0;
  if (podd && !qodd) return ParityClass::E0;
  if (!podd && qodd) return ParityClass::E1;
  return ParityClass::EINF;  // gcd=1 rules out (0,0)
}

std::string Slope::str() const {
  if (trivial_) return "o";
  return p_.str() + "/" + q_.str();
}

std::optional<Slope> Slope::parse(const std::string& s) {
  if (s == "o") return Slope::trivial();
  auto slash = s.find('/');
  auto is_int = [](const std::string& t) {
    if (t.empty()) return false;
    size_t i = (t[0] == '-') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (!isdigit(static_cast<unsigned char>(t[i]))) return false;
    return true;
  };
  if (slash == std::string::npos) {
    if (!is_int(s)) return std::nullopt;
    return Slope(Int(s), 1);
  }
  std::string a = s.substr(0, slash), b = s.substr(slash + 1);
  if (!is_int(a) || !is_int(b)) return std::nullopt;
  Int p(a), q(b);
  if (p == 0 && q == 0) return std::nullopt;
  return Slope(p, q);
}

bool Slope::operator==(const Slope& o) const {
  if (trivial_ || o.trivial_) return trivial_ == o.trivial_;
  return p_ == o.p_ && q_ == o.q_;
}

std::strong_ordering Slope::operator<=>(const Slope& o) const {
  if (trivial_ != o.trivial_) return trivial_ ? std::strong_ordering::less : std::strong_ordering::greater;
  if (trivial_) return std::strong_ordering::equal;
  Int ha = height(), hb = o.height();
  if (ha != hb) return ha < hb ? std::strong_ordering::less : std::strong_ordering::greater;
  if (q_ != o.q_) return q_ < o.q_ ? std::strong_ordering::less : std::strong_ordering::greater;
  if (p_ != o.p_) return p_ < o.p_ ? std::strong_ordering::less : std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Int intersection(const Slope& a, const Slope& b) {
  return 2 * abs(a.p() * b.q() - b.p() * a.q());
}

// ------------------------------ FreeWord ----------------------------------

Letter inverse(Letter l) {
  switch (l) {
    case Letter::x: return Letter::X;
    case Letter::X: return Letter::x;
    case Letter::y: return Letter::Y;
    case Letter::Y: return Letter::y;
  }
  return Letter::x;
}

char letter_char(Letter l) {
  switch (l) {
    case Letter::x: return 'x';
    case Letter::X: return 'X';
    case Letter::y: return 'y';
    case Letter::Y: return 'Y';
  }
  return '?';
}

FreeWord::FreeWord(std::vector<Letter> letters) {
  letters_.reserve(letters.size());
  for (Letter l : letters) push(l);
}

void FreeWord::push(Letter l) {
  if (!letters_.empty() && letters_.back() == thurston::inverse(l))
    letters_.pop_back();
  else
    letters_.push_back(l);
}

std::optional<FreeWord> FreeWord::parse(const std::string& s) {
  std::vector<Letter> ls;
  for (char c : s) {
    switch (c) {
      case 'x': ls.push_back(Letter::x); break;
      case 'X': ls.push_back(Letter::X); break;
      case 'y': ls.push_back(Letter::y); break;
      case 'Y': ls.push_back(Letter::Y); break;
      case ' ': break;
      default: return std::nullopt;
    }
  }
  return FreeWord(std::move(ls));
}

FreeWord FreeWord::operator*(const FreeWord& o) const {
  FreeWord r = *this;
  for (Letter l : o.letters_) r.push(l);
  return r;
}

FreeWord FreeWord::inverse() const {
  FreeWord r;
  for (auto it = letters_.rbegin(); it != letters_.rend(); ++it)
    r.letters_.push_back(thurston::inverse(*it));
  return r;
}

FreeWord FreeWord::pow(long long k) const {
  FreeWord base = k < 0 ? inverse() : *this;
  long long n = k < 0 ? -k : k;
  FreeWord r;
  for (long long i = 0; i < n; ++i) r = r * base;
  return r;
}

FreeWord FreeWord::conjugate(const FreeWord& by) const {
  return by * (*this) * by.inverse();
}

FreeWord FreeWord::cyclic_reduction() const {
  std::vector<Letter> ls = letters_;
  while (ls.size() >= 2 && ls.front() == thurston::inverse(ls.back())) {
    ls.erase(ls.begin());
    ls.pop_back();
  }
  FreeWord r;
  r.letters_ = std::move(ls);
  return r;
}

std::string FreeWord::str() const {
  std::string s;
  s.reserve(letters_.size());
  for (Letter l : letters_) s += letter_char(l);
  return s;
}

// ----------------------------- TwistMatrix --------------------------------

namespace {

void check_gamma2(const Int& a, const Int& b, const Int& c, const Int& d) {
  if (a * d - b * c != 1)
    throw Error(ErrorCode::NotInGammaTwo, "determinant is not 1");
  if (a % 2 == 0 || d % 2 == 0 || b % 2 != 0 || c % 2 != 0)
    throw Error(ErrorCode::NotInGammaTwo, "parity pattern fails (need a,d odd; b,c even)");
}

}  // namespace

TwistMatrix::TwistMatrix() : a_(1), b_(0), c_(0), d_(1) {}

TwistMatrix::TwistMatrix(Int a, Int b, Int c, Int d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
  check_gamma2(a_, b_, c_, d_);
}

TwistMatrix TwistMatrix::operator*(const TwistMatrix& o) const {
  TwistMatrix r;
  r.a_ = a_ * o.a_ + b_ * o.c_;
  r.b_ = a_ * o.b_ + b_ * o.d_;
  r.c_ = c_ * o.a_ + d_ * o.c_;
  r.d_ = c_ * o.b_ + d_ * o.d_;
  return r;
}

TwistMatrix TwistMatrix::inverse() const {
  TwistMatrix r;
  r.a_ = d_; r.b_ = -b_; r.c_ = -c_; r.d_ = a_;
  return r;
}

bool TwistMatrix::is_identity() const {
  return b_ == 0 && c_ == 0 && a_ == d_ && (a_ == 1 || a_ == -1);
}

bool TwistMatrix::operator==(const TwistMatrix& o) const {
  if (a_ == o.a_ && b_ == o.b_ && c_ == o.c_ && d_ == o.d_) return true;
  return a_ == -o.a_ && b_ == -o.b_ && c_ == -o.c_ && d_ == -o.d_;
}

std::string TwistMatrix::str() const {
  return "[[" + a_.str() + "," + b_.str() + "],[" + c_.str() + "," + d_.str() + "]]";
}

TwistMatrix twist_matrix(const Slope& s, long long k) {
  if (s.is_trivial()) throw Error(ErrorCode::TrivialCurve, "cannot twist about o");
  if (k == 0) throw Error(ErrorCode::ZeroPower, "twist power must be nonzero");
  const Int &p = s.p(), &q = s.q();
  Int kk = k;
  return TwistMatrix(1 - 2 * kk * p * q, 2 * kk * p * p, -2 * kk * q * q, 1 + 2 * kk * p * q);
}

TwistMatrix matrix_of_word(const FreeWord& w) {
  static const TwistMatrix gx(1, 2, 0, 1), gX(1, -2, 0, 1), gy(1, 0, -2, 1), gY(1, 0, 2, 1);
  TwistMatrix m;
  for (Letter l : w.letters()) {
    switch (l) {
      case Letter::x: m = m * gx; break;
      case Letter::X: m = m * gX; break;
      case Letter::y: m = m * gy; break;
      case Letter::Y: m = m * gY; break;
    }
  }
  return m;
}

namespace {

// Nearest integer to a/b for b != 0, ties toward zero (any tie rule works
// here: the relevant remainders are odd against even moduli).
Int round_div(const Int& a, const Int& b) {
  Int q = a / b, r = a - q * b;
  if (2 * abs(r) > abs(b)) q += (r > 0) == (b > 0) ? 1 : -1;
  return q;
}

void append_power(std::vector<Letter>& out, Letter pos, const Int& n) {
  Letter l = n > 0 ? pos : inverse(pos);
  for (Int i = abs(n); i > 0; --i) out.push_back(l);
}

}  // namespace

FreeWord word_of_matrix(const TwistMatrix& m) {
  // Peel generators from the left: while the first column is not (+-1, 0),
  // one of x^n, y^n strictly reduces max(|a|, |c|). a stays odd and c even
  // throughout, so the comparison never ties and remainders are strict.
  Int a = m.a(), b = m.b(), c = m.c(), d = m.d();
  std::vector<Letter> out;
  while (c != 0) {
    if (abs(a) > abs(c)) {
      Int n = round_div(a, 2 * c);
      append_power(out, Letter::x, n);
      a -= 2 * n * c;
      b -= 2 * n * d;
    } else {
      Int n = -round_div(c, 2 * a);
      append_power(out, Letter::y, n);
      c += 2 * n * a;
      d += 2 * n * b;
    }
  }
  // Now +-[[1, b], [0, 1]].
  Int power = (a == 1) ? Int(b / 2) : Int(-b / 2);
  append_power(out, Letter::x, power);
  return FreeWord(std::move(out));
}

ParabolicClass classify_parabolic(const TwistMatrix& m) {
  if (m.is_identity()) return Identity{};
  Int tr = m.trace();
  if (abs(tr) != 2) return NonParabolic{tr, abs(tr) > 2};
  // Normalize sign so the trace is +2, then read off
  //   [[1-2kpq, 2kp^2], [-2kq^2, 1+2kpq]].
  Int sgn = tr > 0 ? 1 : -1;
  Int a = sgn * m.a(), b = sgn * m.b(), c = sgn * m.c();
  Int u = b / 2;         // k p^2
  Int v = -c / 2;        // k q^2
  Int w = (1 - a) / 2;   // k p q
  Int k = (u != 0 && v != 0) ? Int(gcd(abs(u), abs(v))) : (u != 0 ? Int(abs(u)) : Int(abs(v)));
  if ((u != 0 && u < 0) || (u == 0 && v < 0)) k = -k;
  Int p2 = u / k, q2 = v / k;
  Int p = sqrt(p2), q = sqrt(q2);
  if (q == 0) return Twist{Slope(1, 0), k};
  if (p == 0) return Twist{Slope(0, 1), k};
  if ((w / k) < 0) p = -p;
  return Twist{Slope(p, q), k};
}

Slope act(const TwistMatrix& m, const Slope& s) {
  if (s.is_trivial()) throw Error(ErrorCode::TrivialCurve, "cannot act on o");
  return Slope(m.a() * s.p() + m.b() * s.q(), m.c() * s.p() + m.d() * s.q());
}

Slope act(const FreeWord& w, const Slope& s) { return act(matrix_of_word(w), s); }

}  // namespace thurston
