#include "thurston/rational.hpp"

#include <cctype>

#include "thurston/errors.hpp"

namespace thurston {

std::string rational_to_string(const Rational& r) {
  std::string s = num(r).str();
  if (den(r) != 1) s += "/" + den(r).str();
  return s;
}

std::optional<Rational> rational_from_string(const std::string& raw) {
  if (raw.empty()) return std::nullopt;
  bool neg = raw[0] == '-';
  std::string s = (raw[0] == '-' || raw[0] == '+') ? raw.substr(1) : raw;
  if (s.empty()) return std::nullopt;
  auto digits = [](const std::string& t) {
    if (t.empty()) return false;
    for (char c : t)
      if (!isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  Rational r;
  auto slash = s.find('/');
  auto dot = s.find('.');
  if (slash != std::string::npos) {
    std::string a = s.substr(0, slash), b = s.substr(slash + 1);
    if (!digits(a) || !digits(b)) return std::nullopt;
    Int q(b);
    if (q == 0) return std::nullopt;
    r = Rational(Int(a), q);
  } else if (dot != std::string::npos) {
    std::string a = s.substr(0, dot), b = s.substr(dot + 1);
    if (b.empty() || !digits(b) || (!a.empty() && !digits(a))) return std::nullopt;
    Int scale = 1;
    for (size_t i = 0; i < b.size(); ++i) scale *= 10;
    Int whole(a.empty() ? Int(0) : Int(a));
    r = Rational(whole * scale + Int(b), scale);
  } else {
    if (!digits(s)) return std::nullopt;
    r = Rational(Int(s));
  }
  return neg ? Rational(-r) : r;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

namespace {

// 0 < lo <= hi
Rational simplest_pos(const Rational& lo, const Rational& hi) {
  if (den(lo) == 1) return lo;
  Int fl = num(lo) / den(lo);
  Int fh = num(hi) / den(hi);
  if (fl < fh) return Rational(fl + 1);
  Rational rlo = Rational(1) / (hi - Rational(fl));
  Rational rhi = Rational(1) / (lo - Rational(fl));
  return Rational(fl) + Rational(1) / simplest_pos(rlo, rhi);
}

}  // namespace

Rational simplest_rational_in(const Rational& lo, const Rational& hi) {
  if (lo <= 0 && 0 <= hi) return Rational(0);
  if (hi < 0) return -simplest_rational_in(-hi, -lo);
  return simplest_pos(lo, hi);
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::TrivialCurve: return "TrivialCurve";
    case ErrorCode::ZeroPower: return "ZeroPower";
    case ErrorCode::NotInGammaTwo: return "NotInGammaTwo";
    case ErrorCode::MalformedSpec: return "MalformedSpec";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::EuclideanOrbifold: return "EuclideanOrbifold";
    case ErrorCode::NotACovering: return "NotACovering";
    case ErrorCode::NoInteriorFixedPoint: return "NoInteriorFixedPoint";
    case ErrorCode::BranchCollision: return "BranchCollision";
    case ErrorCode::AtEnd: return "AtEnd";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::NotEuclidean: return "NotEuclidean";
    case ErrorCode::FiberDegenerate: return "FiberDegenerate";
    case ErrorCode::ContinuationStall: return "ContinuationStall";
    case ErrorCode::SheetCollision: return "SheetCollision";
    case ErrorCode::CrossingAmbiguous: return "CrossingAmbiguous";
    case ErrorCode::UnknownGenerator: return "UnknownGenerator";
    case ErrorCode::NotInDomain: return "NotInDomain";
    case ErrorCode::InternalNonParabolic: return "InternalNonParabolic";
    case ErrorCode::NoRepellingEnd: return "NoRepellingEnd";
    case ErrorCode::NoSection: return "NoSection";
    case ErrorCode::RepresentativeDegenerate: return "RepresentativeDegenerate";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::FixtureUnknown: return "FixtureUnknown";
    case ErrorCode::BadArgument: return "BadArgument";
  }
  return "UnknownError";
}

}  // namespace thurston
