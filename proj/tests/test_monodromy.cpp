#include "thurston/monodromy.hpp"

#include <random>
#include <set>

#include "doctest.h"

using namespace thurston;

namespace {

GaussianRational G(const std::string& s) { return *GaussianRational::parse(s); }

GaussianPoly poly(std::initializer_list<GaussianRational> c) {
  return GaussianPoly(std::vector<GaussianRational>(c));
}

GMapModel rabbit_model() {
  return build_model(RationalMap(poly({G("-1"), G("0"), G("1")}), poly({G("0"), G("0"), G("1")})),
                     ModelKind::XInjective);
}

GMapModel z2i_model() {
  return build_model(RationalMap(poly({G("4"), G("-4"), G("1")}), poly({G("0"), G("0"), G("1")})),
                     ModelKind::XInjective);
}

GMapModel quartic_constant_model() {
  // The degree-2 covering Y of the constant-sigma quartic example.
  return build_model(RationalMap(poly({G("0"), G("0"), G("1")}), poly({G("1")})),
                     ModelKind::XConstant);
}

bool is_transposition(const Perm& p) { return p.size() == 2 && p[0] == 1 && p[1] == 0; }
bool is_id(const Perm& p) {
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] != static_cast<int>(i)) return false;
  return true;
}

}  // namespace

TEST_CASE("permutation utilities") {
  Perm a{1, 0, 2}, b{0, 2, 1};
  CHECK(perm_compose(a, b) == Perm{2, 0, 1});
  CHECK(perm_inverse(Perm{2, 0, 1}) == Perm{1, 2, 0});
  CHECK(perm_cycles(Perm{1, 0, 2}) == "(1 2)(3)");
}

TEST_CASE("door word algebra") {
  CHECK(door_reduce({1, -1, 2}) == DoorWord{2});
  CHECK(door_concat({1, 2}, {-2, 3}) == DoorWord{1, 3});
  CHECK(door_inverse({1, -2}) == DoorWord{2, -1});
}

TEST_CASE("fibers of the fixtures") {
  // z2i: g(w) = 2i at w = 2i and w = (4-2i)/5.
  auto fiber_z = compute_fiber(z2i_model());
  REQUIRE(fiber_z.size() == 2);
  CHECK(std::abs(fiber_z[0] - Complex{0, 2}) < 1e-12);
  CHECK(std::abs(fiber_z[1] - Complex{0.8, -0.4}) < 1e-9);

  // rabbit: fiber {m*, -m*}.
  auto fiber_r = compute_fiber(rabbit_model());
  REQUIRE(fiber_r.size() == 2);
  CHECK(std::abs(fiber_r[0] + fiber_r[1]) < 1e-9);

  auto fiber_q = compute_fiber(quartic_constant_model());
  REQUIRE(fiber_q.size() == 2);
  CHECK(std::abs(fiber_q[0] + fiber_q[1]) < 1e-12);  // +-sqrt(basepoint)
}

TEST_CASE("monodromy tables match the local degrees over each end") {
  // Cycle lengths of rho over an end = local degrees of the preimages.
  // z2i: over 0 one double point (rho_x a 2-cycle); over 1 two simple points
  // (rho_y trivial); over inf one double point (rho_z a 2-cycle).
  auto star_z = build_cut_star(z2i_model());
  auto table_z = monodromy_table(z2i_model(), star_z);
  CHECK(is_transposition(table_z.rho_x));
  CHECK(is_id(table_z.rho_y));
  CHECK(is_transposition(table_z.rho_z));
  CHECK(is_id(perm_compose(perm_compose(table_z.rho_x, table_z.rho_y), table_z.rho_z)));

  // rabbit: over 0 two simple points; over 1 and inf one double point each.
  auto model_r = rabbit_model();
  auto star_r = build_cut_star(model_r);
  auto table_r = monodromy_table(model_r, star_r);
  CHECK(is_id(table_r.rho_x));
  CHECK(is_transposition(table_r.rho_y));
  CHECK(is_transposition(table_r.rho_z));

  // constant quartic Y = w^2: over 0 and inf double, over 1 simple.
  auto model_q = quartic_constant_model();
  auto star_q = build_cut_star(model_q);
  auto table_q = monodromy_table(model_q, star_q);
  CHECK(is_transposition(table_q.rho_x));
  CHECK(is_id(table_q.rho_y));
  CHECK(is_transposition(table_q.rho_z));
}

TEST_CASE("trivial loop lifts to the identity") {
  auto model = z2i_model();
  auto star = build_cut_star(model);
  auto fiber = compute_fiber(model);
  auto lift = lift_loop(model, star, *FreeWord::parse("xX"), fiber);
  CHECK(is_id(lift.perm));
}

TEST_CASE("wreath recursion cycle products are peripheral") {
  for (auto& model : {rabbit_model(), z2i_model(), quartic_constant_model()}) {
    WreathRecursion rec = wreath_recursion(model);
    const int d = rec.degree();
    for (int t = 0; t < 2; ++t) {
      const Perm& perm = t == 0 ? rec.table.rho_x : rec.table.rho_y;
      std::vector<bool> seen(d, false);
      std::vector<int> cycle_lengths;
      for (int i = 0; i < d; ++i) {
        if (seen[i]) continue;
        // product of restrictions along the cycle of i
        DoorWord prod;
        int cur = i, len = 0;
        do {
          seen[cur] = true;
          prod = door_concat(prod, rec.restrictions[t][cur]);
          cur = perm[cur];
          ++len;
        } while (cur != i);
        cycle_lengths.push_back(len);
        // cyclically reduce; expect a single peripheral letter (power +-1)
        DoorWord red = door_reduce(prod);
        while (red.size() >= 2 && red.front() == -red.back()) {
          red.erase(red.begin());
          red.pop_back();
        }
        REQUIRE(red.size() == 1);
      }
      // Multiset of cycle lengths = local degrees over the end.
      End e = t == 0 ? End::Zero : End::One;
      std::multiset<int> degrees;
      for (const auto& [p, mult] : model.g.preimages(end_point(e)))
        degrees.insert(model.g.local_degree(p));
      CHECK(std::multiset<int>(cycle_lengths.begin(), cycle_lengths.end()) == degrees);
    }
  }
}

TEST_CASE("two-path consistency: composed restrictions equal direct lifts") {
  auto model = z2i_model();
  WreathRecursion rec = wreath_recursion(model);
  auto fiber = rec.table.fiber;
  std::mt19937 rng(314159u);
  std::uniform_int_distribution<int> letter(0, 3), len(1, 6);
  int done = 0;
  while (done < 40) {
    std::vector<Letter> ls;
    int n = len(rng);
    for (int i = 0; i < n; ++i) ls.push_back(static_cast<Letter>(letter(rng)));
    FreeWord w(ls);
    if (w.empty()) continue;
    auto lift = lift_loop(model, rec.star, w, fiber);
    CHECK(lift.perm == rec.table.rho(w));
    ++done;
  }
}

TEST_CASE("x_star projection of shared and extra generators") {
  auto model = z2i_model();
  WreathRecursion rec = wreath_recursion(model);
  CHECK(x_star_project({}, rec, ModelKind::XInjective).empty());
  // shared punctures map to the matched generators
  CHECK(x_star_project({rec.star.arc_zero + 1}, rec, ModelKind::XInjective) ==
        FreeWord::gen(Letter::x));
  CHECK(x_star_project({rec.star.arc_one + 1}, rec, ModelKind::XInjective) ==
        FreeWord::gen(Letter::y));
  CHECK(x_star_project({rec.star.arc_inf + 1}, rec, ModelKind::XInjective) ==
        *FreeWord::parse("YX"));
  CHECK(x_star_project({-(rec.star.arc_zero + 1)}, rec, ModelKind::XInjective) ==
        FreeWord::gen(Letter::X));
  // the extra puncture (over 2) maps to the empty word
  int extra = -1;
  for (size_t i = 0; i < rec.star.arcs.size(); ++i) {
    int idx = static_cast<int>(i);
    if (idx != rec.star.arc_zero && idx != rec.star.arc_one && idx != rec.star.arc_inf)
      extra = idx;
  }
  REQUIRE(extra >= 0);
  CHECK(x_star_project({extra + 1}, rec, ModelKind::XInjective).empty());
  // X-Constant kills everything
  CHECK(x_star_project({rec.star.arc_zero + 1}, rec, ModelKind::XConstant).empty());
  CHECK_THROWS_AS(x_star_project({99}, rec, ModelKind::XInjective), Error);
}

TEST_CASE("hf_subgroup: index equals the covering degree, membership via rho") {
  for (auto& model : {rabbit_model(), z2i_model(), quartic_constant_model()}) {
    auto star = build_cut_star(model);
    auto table = monodromy_table(model, star);
    SubgroupData data = hf_subgroup(table);
    CHECK(data.index == model.g.degree());
    // Schreier generators stabilize the base sheet.
    for (const auto& g : data.generators) CHECK(table.fixes_base(g));
    // membership spot-check against rho on random words
    std::mt19937 rng(7u);
    std::uniform_int_distribution<int> letter(0, 3), len(0, 8);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<Letter> ls;
      int n = len(rng);
      for (int i = 0; i < n; ++i) ls.push_back(static_cast<Letter>(letter(rng)));
      FreeWord w(ls);
      CHECK(table.fixes_base(w) == (table.rho(w)[table.base_sheet] == table.base_sheet));
    }
  }
}

TEST_CASE("trivial monodromy gives the full group") {
  MonodromyTable table;
  table.fiber = {Complex{0, 0}};
  table.rho_x = table.rho_y = table.rho_z = perm_identity(1);
  SubgroupData data = hf_subgroup(table);
  CHECK(data.index == 1);
  CHECK(data.generators.size() == 2);  // x and y themselves
}

TEST_CASE("stallings folding index") {
  auto W = [](const char* s) { return *FreeWord::parse(s); };
  CHECK(stallings_index({W("x"), W("y")}) == Int(1));
  CHECK(!stallings_index({}).has_value());
  CHECK(!stallings_index({W("x")}).has_value());
  // <x^2, y^2, xy>: the even-length words, index 2.
  CHECK(stallings_index({W("xx"), W("yy"), W("xy")}) == Int(2));
  // <x^2, y, xyX>? y and conjugates: index 2 again.
  CHECK(stallings_index({W("xx"), W("y"), W("xyX")}) == Int(2));
  // A free factor of infinite index.
  CHECK(!stallings_index({W("xyX")}).has_value());
}
