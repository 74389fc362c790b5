#include "thurston/virtual_endo.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <set>
#include <thread>

namespace thurston {

// ------------------------------- VirtualEndo --------------------------------

VirtualEndo::VirtualEndo(GMapModel model, MonodromyOptions opt)
    : model_(std::move(model)),
      rec_(wreath_recursion(model_, opt)),
      subgroup_(hf_subgroup(rec_.table)) {}

long long VirtualEndo::entry_power(const FreeWord& w) const {
  Perm p = rec_.table.rho(w);
  int base = rec_.table.base_sheet;
  int cur = base;
  long long k = 0;
  do {
    cur = p[cur];
    ++k;
  } while (cur != base);
  return k;
}

FreeWord VirtualEndo::phi(const FreeWord& w) const {
  if (!in_domain(w))
    throw NotInDomainError("word does not stabilize the basepoint sheet", entry_power(w));
  DoorWord restriction = rec_.restriction(w, rec_.table.base_sheet);
  return x_star_project(restriction, rec_, model_.kind);
}

// ------------------------------ slope pullback -------------------------------

SlopePullbackResult slope_pullback(const VirtualEndo& ve, const Slope& s) {
  if (s.is_trivial()) throw Error(ErrorCode::TrivialCurve, "cannot pull back o");
  FreeWord tw = word_of_matrix(twist_matrix(s, 1));
  long long k = ve.entry_power(tw);
  FreeWord image_word = ve.phi(tw.pow(k));
  SlopePullbackResult result;
  result.source = s;
  result.k = k;
  ParabolicClass cls = classify_parabolic(matrix_of_word(image_word));
  if (std::holds_alternative<Identity>(cls)) {
    result.image = Slope::trivial();
    result.image_power = 0;
    result.multiplier = 0;
    return result;
  }
  if (std::holds_alternative<NonParabolic>(cls))
    throw Error(ErrorCode::InternalNonParabolic,
                "the image of a multitwist must be a multitwist; convention bug");
  const Twist& t = std::get<Twist>(cls);
  result.image = t.slope;
  result.image_power = t.power;
  result.multiplier = Rational(t.power, Int(k));
  return result;
}

SlopePullbackResult WreathSlopeMap::pull(const Slope& s) const { return slope_pullback(ve_, s); }

// --------------------------------- searches ---------------------------------

namespace {

std::vector<Slope> slopes_up_to_height(const Int& h) {
  std::vector<Slope> out;
  out.emplace_back(1, 0);
  for (Int q = 1; q <= h; ++q)
    for (Int p = -h; p <= h; ++p) {
      if (gcd(abs(p), q) != 1) continue;
      out.emplace_back(p, q);
    }
  return out;
}

}  // namespace

AttractorReport fga_search(const SlopeMap& map, const Int& height_bound, int depth_bound,
                           int jobs) {
  AttractorReport report;
  report.height_bound = height_bound;
  report.growth_allowance = 4 * height_bound;

  std::map<Slope, Slope> image;  // memoized functional graph, o -> o implicit
  std::vector<Slope> frontier = slopes_up_to_height(height_bound);
  std::set<Slope> seen(frontier.begin(), frontier.end());
  std::vector<Slope> escaping;

  auto evaluate = [&](const std::vector<Slope>& batch) {
    std::vector<Slope> images(batch.size());
    auto worker = [&](size_t from, size_t to) {
      for (size_t i = from; i < to; ++i) images[i] = map.pull(batch[i]).image;
    };
    if (jobs <= 1 || batch.size() < 64) {
      worker(0, batch.size());
    } else {
      std::vector<std::thread> threads;
      size_t chunk = (batch.size() + jobs - 1) / jobs;
      for (int t = 0; t < jobs; ++t) {
        size_t from = t * chunk, to = std::min(batch.size(), from + chunk);
        if (from < to) threads.emplace_back(worker, from, to);
      }
      for (auto& th : threads) th.join();
    }
    return images;
  };

  for (int depth = 0; depth < depth_bound && !frontier.empty(); ++depth) {
    std::vector<Slope> todo;
    for (const Slope& s : frontier)
      if (!image.count(s)) todo.push_back(s);
    std::vector<Slope> images = evaluate(todo);
    std::vector<Slope> next;
    for (size_t i = 0; i < todo.size(); ++i) {
      report.explored++;
      image[todo[i]] = images[i];
      const Slope& img = images[i];
      if (img.is_trivial()) continue;
      if (img.height() > report.growth_allowance) {
        escaping.push_back(todo[i]);
        continue;
      }
      if (seen.insert(img).second) next.push_back(img);
    }
    frontier = std::move(next);
  }

  if (!frontier.empty() || !escaping.empty()) {
    report.verdict = AttractorVerdict::Horizon;
    std::set<Slope> evidence(escaping.begin(), escaping.end());
    for (const Slope& s : frontier) evidence.insert(s);
    report.escaping_frontier.assign(evidence.begin(), evidence.end());
    if (report.escaping_frontier.size() > 32) report.escaping_frontier.resize(32);
    return report;
  }

  // Forward closure stabilized: the attractor is the set of recurrent
  // slopes (plus o when some orbit dies).
  report.verdict = AttractorVerdict::Finite;
  std::set<Slope> attractor;
  for (const auto& [s, img] : image) {
    // follow the orbit; any revisited node within the memo is recurrent
    std::set<Slope> path;
    Slope cur = s;
    while (!cur.is_trivial() && !path.count(cur)) {
      path.insert(cur);
      cur = image.at(cur);
    }
    if (cur.is_trivial()) {
      attractor.insert(Slope::trivial());
      continue;
    }
    // cur is on a cycle: collect it
    Slope walk = cur;
    do {
      attractor.insert(walk);
      walk = image.at(walk);
    } while (!(walk == cur));
  }
  report.attractor.assign(attractor.begin(), attractor.end());

  report.closure_certified = true;
  for (const Slope& s : report.attractor) {
    if (s.is_trivial()) continue;
    Slope img = map.pull(s).image;
    report.closure_certified = report.closure_certified && attractor.count(img) > 0;
  }
  return report;
}

ObstructedTwistReport obstructed_twist_search(const VirtualEndo& ve, const Int& height_bound) {
  ObstructedTwistReport report;
  WreathSlopeMap map(ve);
  for (const Slope& s : slopes_up_to_height(height_bound)) {
    SlopePullbackResult r = map.pull(s);
    if (r.image.is_trivial()) continue;
    if (r.multiplier == 1 && r.image.parity() == s.parity())
      report.witnesses.push_back({s, r.image, r.multiplier, s.parity(), false});
    else if (r.multiplier > 1)
      report.super_obstructions.push_back({s, r.image, r.multiplier, s.parity(), true});
  }
  EndReport ends = end_dynamics(ve.model());
  report.obstructed_end = ends.obstructed_twist_end;
  bool exists = !report.witnesses.empty();
  report.end_consistent = exists == ends.obstructed_twist_end.has_value();
  if (exists && ends.obstructed_twist_end) {
    ParityClass expect = end_parity(*ends.obstructed_twist_end);
    for (const auto& w : report.witnesses)
      report.end_consistent = report.end_consistent && w.parity == expect;
  }
  return report;
}

std::vector<KernelElement> kernel_search(const VirtualEndo& ve, int length_bound) {
  if (length_bound > 16)
    throw Error(ErrorCode::BadArgument, "kernel search length bound capped at 16");
  std::vector<KernelElement> found;
  struct Frame {
    FreeWord word;
    int depth;
  };
  std::vector<Frame> stack;
  for (Letter l : {Letter::x, Letter::X, Letter::y, Letter::Y})
    stack.push_back({FreeWord::gen(l), 1});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (ve.in_domain(f.word)) {
      FreeWord img = ve.phi(f.word);
      if (img.empty()) {
        TwistMatrix m = matrix_of_word(f.word);
        Int tr = abs(m.trace());
        found.push_back({f.word, tr,
                         tr > 2 ? KernelElement::Kind::PseudoAnosov
                                : KernelElement::Kind::Parabolic});
      }
    }
    if (f.depth == length_bound) continue;
    Letter last = f.word.letters().back();
    for (Letter l : {Letter::x, Letter::X, Letter::y, Letter::Y}) {
      if (l == inverse(last)) continue;
      stack.push_back({f.word * FreeWord::gen(l), f.depth + 1});
    }
  }
  return found;
}

std::optional<Int> surjectivity_check(const VirtualEndo& ve) {
  std::vector<FreeWord> images;
  for (const FreeWord& g : ve.subgroup().generators) {
    FreeWord img = ve.phi(g);
    if (!img.empty()) images.push_back(img);
  }
  return stallings_index(images);
}

SectionOrbit section_orbit(const VirtualEndo& ve, int n) {
  auto index = surjectivity_check(ve);
  if (!index || *index != 1)
    throw Error(ErrorCode::NoSection, "phi is not surjective");

  // A twist T on a generator slope with phi(g T g^-1) = T (the k = 1 case),
  // searched over short conjugators. Generator slopes keep the section
  // substitutional: {T, S} is then the standard basis.
  struct Generators {
    Letter t_letter;
    FreeWord t_image;  // sigma(T) = g T g^-1
    FreeWord s_image;  // sigma(S)
  };
  std::optional<Generators> gens;
  std::optional<FreeWord> conjugator;

  std::vector<FreeWord> candidates{FreeWord::one()};
  {
    std::vector<FreeWord> frontier{FreeWord::one()};
    for (int depth = 0; depth < 6; ++depth) {
      std::vector<FreeWord> next;
      for (const FreeWord& w : frontier)
        for (Letter l : {Letter::x, Letter::X, Letter::y, Letter::Y}) {
          FreeWord e = w * FreeWord::gen(l);
          if (e.size() != w.size() + 1) continue;
          next.push_back(e);
          candidates.push_back(e);
        }
      frontier = std::move(next);
    }
  }

  for (Letter t_letter : {Letter::y, Letter::x}) {
    FreeWord t = FreeWord::gen(t_letter);
    for (const FreeWord& g : candidates) {
      FreeWord h = g * t * g.inverse();
      if (!ve.in_domain(h)) continue;
      if (!(ve.phi(h) == t)) continue;
      // Found sigma(T). Now a preimage of the other generator.
      Letter s_letter = t_letter == Letter::y ? Letter::x : Letter::y;
      FreeWord s = FreeWord::gen(s_letter);
      std::optional<FreeWord> s_image;
      // BFS over H_f elements: products of Schreier generators and their
      // inverses.
      std::vector<FreeWord> hf_gens;
      for (const auto& sg : ve.subgroup().generators) {
        hf_gens.push_back(sg);
        hf_gens.push_back(sg.inverse());
      }
      std::deque<FreeWord> queue{FreeWord::one()};
      std::set<std::string> seen_words{""};
      int examined = 0;
      while (!queue.empty() && examined < 20000 && !s_image) {
        FreeWord cur = queue.front();
        queue.pop_front();
        ++examined;
        if (ve.phi(cur) == s) {
          s_image = cur;
          break;
        }
        if (cur.size() > 24) continue;
        for (const auto& sg : hf_gens) {
          FreeWord nxt = cur * sg;
          if (seen_words.insert(nxt.str()).second) queue.push_back(nxt);
        }
      }
      if (!s_image) continue;
      Generators found{t_letter, h, *s_image};
      gens = found;
      conjugator = g;
      break;
    }
    if (gens) break;
  }
  if (!gens)
    throw Error(ErrorCode::NoSection, "no k = 1 twist with a substitutional section found");

  auto sigma = [&](const FreeWord& w) {
    FreeWord out;
    for (Letter l : w.letters()) {
      const FreeWord& img = (l == gens->t_letter || l == inverse(gens->t_letter))
                                ? gens->t_image
                                : gens->s_image;
      bool inv = l == Letter::X || l == Letter::Y;
      out = out * (inv ? img.inverse() : img);
    }
    return out;
  };

  SectionOrbit orbit;
  orbit.conjugator = *conjugator;
  FreeWord t = FreeWord::gen(gens->t_letter);
  orbit.twist_slope = gens->t_letter == Letter::x ? Slope(1, 0) : Slope(0, 1);
  orbit.words.push_back(t);
  for (int i = 0; i < n; ++i) orbit.words.push_back(sigma(orbit.words.back()));

  orbit.chain_certified = true;
  for (size_t i = 1; i < orbit.words.size(); ++i)
    orbit.chain_certified =
        orbit.chain_certified && ve.in_domain(orbit.words[i]) &&
        ve.phi(orbit.words[i]) == orbit.words[i - 1];

  orbit.same_parity = true;
  for (const auto& w : orbit.words) {
    ParabolicClass cls = classify_parabolic(matrix_of_word(w));
    if (!std::holds_alternative<Twist>(cls))
      throw Error(ErrorCode::NoSection, "section orbit left the twist family");
    orbit.slopes.push_back(std::get<Twist>(cls).slope);
    orbit.same_parity =
        orbit.same_parity && orbit.slopes.back().parity() == orbit.twist_slope.parity();
  }
  orbit.pairwise_distinct = true;
  for (size_t i = 0; i < orbit.slopes.size(); ++i)
    for (size_t j = i + 1; j < orbit.slopes.size(); ++j)
      orbit.pairwise_distinct = orbit.pairwise_distinct && !(orbit.slopes[i] == orbit.slopes[j]);
  return orbit;
}

double contraction_ratio_estimate(const VirtualEndo& ve, int samples, int depth, unsigned seed) {
  if (depth < 2) throw Error(ErrorCode::BadArgument, "depth must be >= 2");
  std::mt19937 rng(seed);
  std::vector<FreeWord> hf_gens;
  for (const auto& sg : ve.subgroup().generators) {
    hf_gens.push_back(sg);
    hf_gens.push_back(sg.inverse());
  }
  if (hf_gens.empty()) return 0.0;
  std::uniform_int_distribution<size_t> pick(0, hf_gens.size() - 1);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    FreeWord w;
    int len = 8 + 4 * (s % 5);
    for (int i = 0; i < len; ++i) w = w * hf_gens[pick(rng)];
    if (w.empty()) continue;
    double n0 = static_cast<double>(w.size());
    FreeWord cur = w;
    int steps = 0;
    for (int d = 0; d < depth; ++d) {
      if (cur.empty()) break;
      if (!ve.in_domain(cur)) {
        long long k = ve.entry_power(cur);
        cur = cur.pow(k);
        n0 *= static_cast<double>(k);
      }
      cur = ve.phi(cur);
      ++steps;
    }
    if (steps == 0) continue;
    double ratio = cur.empty() ? 0.0
                               : std::pow(static_cast<double>(cur.size()) / n0, 1.0 / steps);
    worst = std::max(worst, ratio);
  }
  return worst;
}

}  // namespace thurston
