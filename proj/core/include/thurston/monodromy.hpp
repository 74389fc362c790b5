#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thurston/correspondence.hpp"
#include "thurston/curve_algebra.hpp"

namespace thurston {

using Perm = std::vector<int>;

Perm perm_identity(int n);
Perm perm_compose(const Perm& a, const Perm& b);  // apply a, then b
Perm perm_inverse(const Perm& a);
std::string perm_cycles(const Perm& a);  // "(1 2)(3)" style, 1-based

// Words over the peripheral generators of W_f: entries +j / -j refer to the
// puncture with (1-based) index j in the cut star's angular order.
using DoorWord = std::vector<int>;

DoorWord door_reduce(DoorWord w);
DoorWord door_concat(const DoorWord& a, const DoorWord& b);
DoorWord door_inverse(const DoorWord& a);

// ---------------------------------------------------------------------------
// Cut star: one arc from a common center to every puncture of W (the
// g-preimages of the ends), angularly ordered. The three arcs toward 0, 1,
// infinity double as the downstairs star, so the inclusion-induced projection
// of a shared peripheral generator is literally the matching downstairs one.
// ---------------------------------------------------------------------------

struct CutArc {
  SpherePoint puncture;
  std::vector<Complex> polyline;  // center -> puncture (truncated ray for inf)
  double angle;                   // initial direction at the center
};

struct CutStar {
  Complex center;                    // slightly off the basepoint
  Complex basepoint;                 // m*
  std::vector<CutArc> arcs;          // CCW by angle
  int arc_zero = -1, arc_one = -1, arc_inf = -1;  // indices of the shared arcs
  double loop_radius_scale = 0.3;

  // Loop polyline realizing one generator: out along the arc, once around
  // the puncture, and back. ccw=false traverses the inverse.
  std::vector<Complex> generator_loop(int arc_index, bool ccw = true) const;
  // Just the closed circle around the puncture (for sign calibration).
  std::vector<Complex> puncture_circle(int arc_index, bool ccw = true) const;
};

struct MonodromyOptions {
  double tol_res = 1e-10;
  double tol_sep = 1e-6;
  unsigned seed_perturbation = 0;
};

CutStar build_cut_star(const GMapModel& model, const MonodromyOptions& opt = {});

// All deg(g) points of the fiber over the basepoint; the basepoint sheet
// comes first (for X-Injective models it is the basepoint itself).
std::vector<Complex> compute_fiber(const GMapModel& model, const MonodromyOptions& opt = {});

struct LoopLift {
  Perm perm;                                    // sheet i ends at fiber[perm[i]]
  std::vector<std::vector<Complex>> paths;      // per-sheet lifted polylines
};

// Numeric continuation of a loop (a free word realized along the cut star)
// through the covering; residual-certified each step.
LoopLift lift_loop(const GMapModel& model, const CutStar& star, const FreeWord& loop,
                   const std::vector<Complex>& fiber, const MonodromyOptions& opt = {});

struct MonodromyTable {
  std::vector<Complex> fiber;
  Perm rho_x, rho_y, rho_z;  // rho_z = (rho_x rho_y)^-1
  int base_sheet = 0;

  Perm rho(const FreeWord& w) const;
  bool fixes_base(const FreeWord& w) const { return rho(w)[base_sheet] == base_sheet; }
};

MonodromyTable monodromy_table(const GMapModel& model, const CutStar& star,
                               const MonodromyOptions& opt = {});

// ---------------------------------------------------------------------------
// Wreath recursion: target sheet and restriction word (over the peripheral
// generators of W_f) per generator and sheet.
// ---------------------------------------------------------------------------

struct WreathRecursion {
  CutStar star;
  MonodromyTable table;
  // restrictions[t][i]: the door word of (connector_i . lift_t(i) . rev
  // connector_{t(i)}), t in {x, y}.
  std::array<std::vector<DoorWord>, 2> restrictions;
  int door_sign = 1;  // crossing-sign convention, calibrated at build time

  int degree() const { return static_cast<int>(table.fiber.size()); }

  // Restriction of an arbitrary word at a sheet, by composing the per-letter
  // data: w|_i = t1|_i . t2|_{rho(t1) i} . ...
  DoorWord restriction(const FreeWord& w, int sheet) const;
};

WreathRecursion wreath_recursion(const GMapModel& model, const MonodromyOptions& opt = {});

// The inclusion-induced projection: shared punctures map to the matched
// downstairs generator (x at 0, y at 1, (xy)^-1 at infinity), extra
// punctures to the empty word. X-Constant models kill every generator.
FreeWord x_star_project(const DoorWord& w, const WreathRecursion& rec, ModelKind kind);

// ---------------------------------------------------------------------------
// Subgroup machinery.
// ---------------------------------------------------------------------------

struct SubgroupData {
  std::vector<FreeWord> transversal;  // Schreier representatives, per sheet
  std::vector<FreeWord> generators;   // Schreier generators of the stabilizer
  Int index;                          // orbit size of the base sheet

  // membership: rho(w) fixes the base sheet (decided by the table)
};

SubgroupData hf_subgroup(const MonodromyTable& table);

// Stallings folding; returns the index of <words> in F_2, or nullopt for
// infinite index. {x, y} -> 1.
std::optional<Int> stallings_index(const std::vector<FreeWord>& words);

}  // namespace thurston
