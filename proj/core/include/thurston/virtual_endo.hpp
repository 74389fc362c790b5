#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thurston/monodromy.hpp"

namespace thurston {

// ---------------------------------------------------------------------------
// The virtual endomorphism phi_f on the pure mapping class group, computed
// by lifting through the covering Y and projecting along the inclusion X.
// ---------------------------------------------------------------------------

class VirtualEndo {
 public:
  VirtualEndo(GMapModel model, MonodromyOptions opt = {});

  const GMapModel& model() const { return model_; }
  const WreathRecursion& recursion() const { return rec_; }
  const MonodromyTable& table() const { return rec_.table; }
  const SubgroupData& subgroup() const { return subgroup_; }

  bool in_domain(const FreeWord& w) const { return rec_.table.fixes_base(w); }
  // Minimal k >= 1 with w^k in the domain (the base-sheet cycle length).
  long long entry_power(const FreeWord& w) const;

  // phi(w) for w in H_f; throws NotInDomainError carrying entry_power.
  FreeWord phi(const FreeWord& w) const;

 private:
  GMapModel model_;
  WreathRecursion rec_;
  SubgroupData subgroup_;
};

// ---------------------------------------------------------------------------
// Slope pullback and its reports.
// ---------------------------------------------------------------------------

struct SlopePullbackResult {
  Slope source;
  long long k = 1;          // minimal twist power entering the domain
  Slope image;              // trivial when the twist dies
  Int image_power = 0;      // k'
  Rational multiplier = 0;  // k'/k

  bool operator==(const SlopePullbackResult& o) const = default;
};

// Any map on slopes; the wreath-based pullback and the declarative plugins
// implement it, and the searches run against the interface.
class SlopeMap {
 public:
  virtual ~SlopeMap() = default;
  virtual SlopePullbackResult pull(const Slope& s) const = 0;
};

class WreathSlopeMap : public SlopeMap {
 public:
  explicit WreathSlopeMap(const VirtualEndo& ve) : ve_(ve) {}
  SlopePullbackResult pull(const Slope& s) const override;

 private:
  const VirtualEndo& ve_;
};

SlopePullbackResult slope_pullback(const VirtualEndo& ve, const Slope& s);

// ---------------------------------------------------------------------------
// Searches over the Farey tree.
// ---------------------------------------------------------------------------

enum class AttractorVerdict { Finite, Horizon };

struct AttractorReport {
  AttractorVerdict verdict;
  std::vector<Slope> attractor;           // closed under the map (Finite)
  std::vector<Slope> escaping_frontier;   // evidence (Horizon)
  long explored = 0;
  Int height_bound, growth_allowance;
  bool closure_certified = false;         // re-applied map stays inside
};

// BFS of all slopes of height <= H under the slope map; Finite when the
// forward closure stabilizes within D steps inside height 4*H.
AttractorReport fga_search(const SlopeMap& map, const Int& height_bound, int depth_bound,
                           int jobs = 1);

struct ObstructedTwistWitness {
  Slope slope;
  Slope image;
  Rational multiplier;  // exactly 1 for a Thurston-obstruction witness
  ParityClass parity;
  bool super_obstruction = false;  // multiplier > 1, reported separately
};

struct ObstructedTwistReport {
  std::vector<ObstructedTwistWitness> witnesses;
  std::vector<ObstructedTwistWitness> super_obstructions;
  // Cross-validation against the end analysis.
  bool end_consistent = false;
  std::optional<End> obstructed_end;
};

ObstructedTwistReport obstructed_twist_search(const VirtualEndo& ve, const Int& height_bound);

struct KernelElement {
  FreeWord word;
  Int trace;  // |trace| of the matrix image
  enum class Kind { Parabolic, PseudoAnosov } kind;
};

// H_f elements of word length <= bound with trivial phi image, classified by
// trace; bound capped at 16.
std::vector<KernelElement> kernel_search(const VirtualEndo& ve, int length_bound);

// Index of phi(H_f) in F_2 via Stallings folding; 1 means surjective,
// nullopt infinite.
std::optional<Int> surjectivity_check(const VirtualEndo& ve);

struct SectionOrbit {
  Slope twist_slope;               // the k = 1 twist T
  FreeWord conjugator;             // g with phi(T^g) = T
  std::vector<FreeWord> words;     // h_0 = word of T, h_n = sigma(h_{n-1})
  std::vector<Slope> slopes;       // C_0 .. C_n
  bool chain_certified = false;    // phi(h_n) == h_{n-1} for all n
  bool pairwise_distinct = false;
  bool same_parity = false;
};

// Thurston-9-IV orbit: requires surjectivity and a k = 1 twist; throws
// NoSection when the preconditions fail within the search bounds.
SectionOrbit section_orbit(const VirtualEndo& ve, int n);

// Empirical contraction ratio estimate (never a certificate).
double contraction_ratio_estimate(const VirtualEndo& ve, int samples, int depth,
                                  unsigned seed = 2024);

}  // namespace thurston
