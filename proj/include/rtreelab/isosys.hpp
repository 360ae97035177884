#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "scalar.hpp"

namespace rtreelab {

// A system of partial isometries of a finite disjoint union of closed real
// intervals D = D_0 ⊔ D_1 ⊔ ... : each map is x -> eps*x + t carrying a
// closed subinterval (its domain base) of one component isometrically onto
// another closed subinterval (its range base).  Degenerate (singleton) bases
// are allowed; they identify points but are ignored by multiplicity counts
// and by the trimming machine.

struct CPoint {
  int comp;
  Scalar x;
  friend bool operator==(const CPoint& a, const CPoint& b) {
    return a.comp == b.comp && compare(a.x, b.x) == 0;
  }
  friend bool operator<(const CPoint& a, const CPoint& b) {
    if (a.comp != b.comp) return a.comp < b.comp;
    return compare(a.x, b.x) < 0;
  }
  std::string str() const { return std::to_string(comp) + ":" + x.str(); }
};

struct PartialIso {
  int dom_comp = 0, ran_comp = 0;
  Scalar dom_lo, dom_hi, ran_lo, ran_hi;
  int eps = 1;
  Scalar t;

  bool singleton() const { return compare(dom_lo, dom_hi) == 0; }
  Scalar width() const { return dom_hi - dom_lo; }

  Scalar apply(const Scalar& x) const {
    return eps > 0 ? x + t : t - x;
  }
  Scalar unapply(const Scalar& y) const {
    return eps > 0 ? y - t : t - y;
  }
  // image of [l,h] ⊆ dom
  std::pair<Scalar, Scalar> image(const Scalar& l, const Scalar& h) const {
    return eps > 0 ? std::pair{apply(l), apply(h)} : std::pair{apply(h), apply(l)};
  }
  std::pair<Scalar, Scalar> preimage(const Scalar& l, const Scalar& h) const {
    return eps > 0 ? std::pair{unapply(l), unapply(h)} : std::pair{unapply(h), unapply(l)};
  }
};

class IsoSystem {
 public:
  static IsoSystem make(std::vector<std::pair<Scalar, Scalar>> comps,
                        std::vector<PartialIso> maps) {
    IsoSystem s;
    s.comps_ = std::move(comps);
    s.maps_ = std::move(maps);
    for (size_t c = 0; c < s.comps_.size(); ++c)
      if (compare(s.comps_[c].first, s.comps_[c].second) >= 0)
        throw InputError("component " + std::to_string(c) +
                         " must be a nondegenerate closed interval");
    int n = static_cast<int>(s.comps_.size());
    for (size_t m = 0; m < s.maps_.size(); ++m) {
      const PartialIso& f = s.maps_[m];
      auto bad = [&](const std::string& why) {
        throw InputError("map " + std::to_string(m) + ": " + why);
      };
      if (f.dom_comp < 0 || f.dom_comp >= n || f.ran_comp < 0 || f.ran_comp >= n)
        bad("component index out of range");
      if (f.eps != 1 && f.eps != -1) bad("eps must be +1 or -1");
      if (compare(f.dom_lo, f.dom_hi) > 0) bad("empty domain");
      if (compare(f.dom_lo, s.comps_[f.dom_comp].first) < 0 ||
          compare(f.dom_hi, s.comps_[f.dom_comp].second) > 0)
        bad("domain leaves its component");
      if (compare(f.ran_lo, s.comps_[f.ran_comp].first) < 0 ||
          compare(f.ran_hi, s.comps_[f.ran_comp].second) > 0)
        bad("range leaves its component");
      auto [il, ih] = f.image(f.dom_lo, f.dom_hi);
      if (compare(il, f.ran_lo) != 0 || compare(ih, f.ran_hi) != 0)
        bad("range does not match the image of the domain");
    }
    return s;
  }

  const std::vector<std::pair<Scalar, Scalar>>& comps() const { return comps_; }
  const std::vector<PartialIso>& maps() const { return maps_; }
  bool empty() const { return comps_.empty(); }
  Scalar total_measure() const {
    Scalar s;
    for (const auto& [lo, hi] : comps_) s += hi - lo;
    return s;
  }

 private:
  std::vector<std::pair<Scalar, Scalar>> comps_;
  std::vector<PartialIso> maps_;
};

// ---------------------------------------------------------------------------
// Multiplicity profile
// ---------------------------------------------------------------------------

// Breakpoints of a component with the number of (nondegenerate) bases
// covering each open interval between consecutive breakpoints, and covering
// each breakpoint itself.
struct Profile {
  int comp = 0;
  std::vector<Scalar> points;    // sorted, includes both component ends
  std::vector<int> open_mult;    // size points-1
  std::vector<int> point_mult;   // size points
};

inline Profile multiplicity_profile(const IsoSystem& s, int comp) {
  if (comp < 0 || comp >= static_cast<int>(s.comps().size()))
    throw InputError("component index out of range");
  const auto& [clo, chi] = s.comps()[comp];
  std::set<Scalar, ScalarLess> pts{clo, chi};
  std::vector<std::pair<Scalar, Scalar>> bases;
  for (const PartialIso& f : s.maps()) {
    if (f.singleton()) continue;
    if (f.dom_comp == comp) bases.push_back({f.dom_lo, f.dom_hi});
    if (f.ran_comp == comp) bases.push_back({f.ran_lo, f.ran_hi});
  }
  for (const auto& [lo, hi] : bases) {
    pts.insert(lo);
    pts.insert(hi);
  }
  Profile p;
  p.comp = comp;
  p.points.assign(pts.begin(), pts.end());
  for (const Scalar& x : p.points) {
    int m = 0;
    for (const auto& [lo, hi] : bases)
      if (compare(lo, x) <= 0 && compare(x, hi) <= 0) ++m;
    p.point_mult.push_back(m);
  }
  for (size_t k = 0; k + 1 < p.points.size(); ++k) {
    int m = 0;
    for (const auto& [lo, hi] : bases)
      if (compare(lo, p.points[k]) <= 0 && compare(p.points[k + 1], hi) <= 0) ++m;
    p.open_mult.push_back(m);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Rips trimming
// ---------------------------------------------------------------------------

struct TrimStep {
  int comp = 0;      // component index before the step
  bool left = true;  // which extremity
  Scalar from, to;   // erased extremity interval, half-open toward the interior
  Scalar measure;
  int dropped_maps = 0;
  bool dropped_comp = false;
  std::string str() const {
    std::ostringstream os;
    os << "comp " << comp << (left ? " left" : " right") << " erase "
       << (left ? "[" : "(") << from.str() << "," << to.str()
       << (left ? ")" : "]") << " measure " << measure.str();
    if (dropped_maps) os << ", dropped " << dropped_maps << " map(s)";
    if (dropped_comp) os << ", dropped the component";
    return os.str();
  }
};

namespace detail {

// Maximal half-open extremity with interior multiplicity <= 1; multiplicity-2
// breakpoints block extension.  Returns the exclusive inner end, or nothing.
inline std::optional<Scalar> extremity(const Profile& p, bool left) {
  int n = static_cast<int>(p.points.size());
  if (left) {
    int k = 0;
    while (k + 1 < n && p.open_mult[k] <= 1 &&
           (k == 0 || p.point_mult[k] <= 1))
      ++k;
    if (k == 0) return std::nullopt;
    return p.points[k];
  }
  int k = n - 1;
  while (k - 1 >= 0 && p.open_mult[k - 1] <= 1 &&
         (k == n - 1 || p.point_mult[k] <= 1))
    --k;
  if (k == n - 1) return std::nullopt;
  return p.points[k];
}

}  // namespace detail

// One machine move.  Throws NothingToTrim when every extremity of every
// component has multiplicity >= 2 (the system is in its stable state).
inline std::pair<IsoSystem, TrimStep> trim_step(const IsoSystem& s) {
  if (s.empty()) throw NothingToTrim("system is empty");
  for (int c = 0; c < static_cast<int>(s.comps().size()); ++c) {
    Profile p = multiplicity_profile(s, c);
    for (bool left : {true, false}) {
      auto x = detail::extremity(p, left);
      if (!x) continue;
      const auto& [clo, chi] = s.comps()[c];
      TrimStep st;
      st.comp = c;
      st.left = left;
      st.from = left ? clo : *x;
      st.to = left ? *x : chi;
      st.measure = left ? *x - clo : chi - *x;
      // the erased set: left => [clo, x), right => (x, chi]
      Scalar keep_lo = left ? *x : clo;
      Scalar keep_hi = left ? chi : *x;

      std::vector<std::pair<Scalar, Scalar>> comps = s.comps();
      bool drop_comp = compare(keep_lo, keep_hi) >= 0;
      st.dropped_comp = drop_comp;
      comps[c] = {keep_lo, keep_hi};

      std::vector<PartialIso> maps;
      for (PartialIso f : s.maps()) {
        // clip both bases against the kept part of component c, transporting
        // the clip through the isometry
        Scalar dlo = f.dom_lo, dhi = f.dom_hi;
        auto clip_dom = [&](const Scalar& lo, const Scalar& hi) {
          if (compare(dlo, lo) < 0) dlo = lo;
          if (compare(dhi, hi) > 0) dhi = hi;
        };
        if (f.dom_comp == c) clip_dom(keep_lo, keep_hi);
        if (f.ran_comp == c) {
          auto [pl, ph] = f.preimage(
              compare(f.ran_lo, keep_lo) < 0 ? keep_lo : f.ran_lo,
              compare(f.ran_hi, keep_hi) > 0 ? keep_hi : f.ran_hi);
          if (compare(f.ran_hi, keep_lo) < 0 || compare(f.ran_lo, keep_hi) > 0) {
            ++st.dropped_maps;
            continue;
          }
          clip_dom(pl, ph);
        }
        if (compare(dlo, dhi) >= 0) {  // empty or newly-degenerate: drop
          if (compare(dlo, dhi) > 0 || !f.singleton()) {
            ++st.dropped_maps;
            continue;
          }
        }
        auto [rl, rh] = f.image(dlo, dhi);
        f.dom_lo = dlo;
        f.dom_hi = dhi;
        f.ran_lo = rl;
        f.ran_hi = rh;
        maps.push_back(f);
      }

      if (drop_comp) {
        comps.erase(comps.begin() + c);
        std::vector<PartialIso> kept;
        for (PartialIso f : maps) {
          if (f.dom_comp == c || f.ran_comp == c) {
            ++st.dropped_maps;
            continue;
          }
          if (f.dom_comp > c) --f.dom_comp;
          if (f.ran_comp > c) --f.ran_comp;
          kept.push_back(f);
        }
        maps = std::move(kept);
      }
      return {IsoSystem::make(std::move(comps), std::move(maps)), st};
    }
  }
  throw NothingToTrim("no extremity of multiplicity <= 1");
}

enum class RipsOutcome { PURE, HALT_EMPTY, BUDGET_EXCEEDED };

inline const char* outcome_name(RipsOutcome o) {
  switch (o) {
    case RipsOutcome::PURE: return "PURE";
    case RipsOutcome::HALT_EMPTY: return "HALT_EMPTY";
    default: return "BUDGET_EXCEEDED";
  }
}

struct RunResult {
  RipsOutcome outcome = RipsOutcome::PURE;
  IsoSystem final;
  std::vector<TrimStep> log;
  Scalar erased;
};

inline RunResult rips_run(const IsoSystem& s, int max_steps = 100) {
  RunResult r;
  r.final = s;
  while (true) {
    if (r.final.empty()) {
      r.outcome = RipsOutcome::HALT_EMPTY;
      return r;
    }
    if (static_cast<int>(r.log.size()) >= max_steps) {
      r.outcome = RipsOutcome::BUDGET_EXCEEDED;
      return r;
    }
    try {
      auto [next, st] = trim_step(r.final);
      r.final = std::move(next);
      r.erased += st.measure;
      r.log.push_back(st);
    } catch (const NothingToTrim&) {
      r.outcome = RipsOutcome::PURE;
      return r;
    }
  }
}

// ---------------------------------------------------------------------------
// Orbits
// ---------------------------------------------------------------------------

struct OrbitResult {
  std::vector<CPoint> points;                      // in discovery order
  std::vector<std::vector<std::pair<int, int>>> words;  // (map index, +-1) per point
  bool closed = false;                             // orbit exhausted under budget
  std::optional<Scalar> min_gap;                   // smallest same-component gap
};

inline OrbitResult orbit(const IsoSystem& s, const CPoint& seed, int max_points = 200) {
  if (seed.comp < 0 || seed.comp >= static_cast<int>(s.comps().size()))
    throw InputError("orbit seed component out of range");
  if (compare(seed.x, s.comps()[seed.comp].first) < 0 ||
      compare(seed.x, s.comps()[seed.comp].second) > 0)
    throw InputError("orbit seed outside its component");
  OrbitResult r;
  std::set<CPoint> seen;
  std::deque<int> work;
  r.points.push_back(seed);
  r.words.push_back({});
  seen.insert(seed);
  work.push_back(0);
  bool truncated = false;
  while (!work.empty()) {
    int idx = work.front();
    work.pop_front();
    CPoint p = r.points[idx];
    for (size_t m = 0; m < s.maps().size() && !truncated; ++m) {
      const PartialIso& f = s.maps()[m];
      for (int dir : {+1, -1}) {
        CPoint q;
        if (dir > 0) {
          if (f.dom_comp != p.comp || compare(p.x, f.dom_lo) < 0 ||
              compare(p.x, f.dom_hi) > 0)
            continue;
          q = {f.ran_comp, f.apply(p.x)};
        } else {
          if (f.ran_comp != p.comp || compare(p.x, f.ran_lo) < 0 ||
              compare(p.x, f.ran_hi) > 0)
            continue;
          q = {f.dom_comp, f.unapply(p.x)};
        }
        if (seen.count(q)) continue;
        if (static_cast<int>(r.points.size()) >= max_points) {
          truncated = true;
          break;
        }
        seen.insert(q);
        r.points.push_back(q);
        auto w = r.words[idx];
        w.push_back({static_cast<int>(m), dir});
        r.words.push_back(std::move(w));
        work.push_back(static_cast<int>(r.points.size()) - 1);
      }
    }
    if (truncated) break;
  }
  r.closed = !truncated;
  // smallest positive gap between same-component points
  std::map<int, std::vector<Scalar>> per_comp;
  for (const CPoint& p : r.points) per_comp[p.comp].push_back(p.x);
  for (auto& [c, xs] : per_comp) {
    std::sort(xs.begin(), xs.end(), ScalarLess{});
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
      Scalar g = xs[i + 1] - xs[i];
      if (g.sign() > 0 && (!r.min_gap || compare(g, *r.min_gap) < 0)) r.min_gap = g;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Imanishi blocks
// ---------------------------------------------------------------------------

enum class LeafTag { COMPACT_LEAVES, DENSE_LEAVES, UNRESOLVED };

inline const char* leaf_tag_name(LeafTag t) {
  switch (t) {
    case LeafTag::COMPACT_LEAVES: return "COMPACT_LEAVES";
    case LeafTag::DENSE_LEAVES: return "DENSE_LEAVES";
    default: return "UNRESOLVED";
  }
}

// Components linked by a map belong to one block; orbits stay inside blocks.
// Each block is tagged by budgeted orbit evidence: every sampled orbit closes
// => COMPACT_LEAVES; some orbit stays open at the budget and packs points
// more tightly than an eighth of the block measure => DENSE_LEAVES.
struct ImanishiReport {
  std::vector<int> block_of;        // per component
  std::vector<LeafTag> block_tag;   // per block
  std::vector<std::string> evidence;
};

inline ImanishiReport imanishi_components(const IsoSystem& s, int orbit_budget = 200) {
  int n = static_cast<int>(s.comps().size());
  std::vector<int> dsu(n);
  for (int i = 0; i < n; ++i) dsu[i] = i;
  auto find = [&](int x) {
    while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
    return x;
  };
  for (const PartialIso& f : s.maps()) dsu[find(f.dom_comp)] = find(f.ran_comp);

  ImanishiReport rep;
  rep.block_of.assign(n, -1);
  std::map<int, int> block_id;
  for (int c = 0; c < n; ++c) {
    int root = find(c);
    if (!block_id.count(root)) {
      int id = static_cast<int>(block_id.size());
      block_id[root] = id;
    }
    rep.block_of[c] = block_id[root];
  }
  int nb = static_cast<int>(block_id.size());
  rep.block_tag.assign(nb, LeafTag::COMPACT_LEAVES);
  rep.evidence.assign(nb, "all sampled orbits closed");

  for (int b = 0; b < nb; ++b) {
    Scalar block_measure;
    for (int c = 0; c < n; ++c)
      if (rep.block_of[c] == b)
        block_measure += s.comps()[c].second - s.comps()[c].first;
    // samples: component ends, base ends, and midpoints between breakpoints
    std::vector<CPoint> samples;
    for (int c = 0; c < n; ++c) {
      if (rep.block_of[c] != b) continue;
      Profile p = multiplicity_profile(s, c);
      for (const Scalar& x : p.points) samples.push_back({c, x});
      for (size_t k = 0; k + 1 < p.points.size(); ++k)
        samples.push_back({c, (p.points[k] + p.points[k + 1]) / Rational(2)});
    }
    for (const CPoint& p : samples) {
      OrbitResult o = orbit(s, p, orbit_budget);
      if (o.closed) continue;
      Scalar tight = block_measure / Rational(8);
      if (o.min_gap && compare(*o.min_gap, tight) < 0) {
        rep.block_tag[b] = LeafTag::DENSE_LEAVES;
        rep.evidence[b] = "orbit of " + p.str() + " open at " +
                          std::to_string(o.points.size()) + " points, min gap " +
                          o.min_gap->str();
      } else {
        rep.block_tag[b] = LeafTag::UNRESOLVED;
        rep.evidence[b] = "orbit of " + p.str() + " open at budget without density";
      }
      break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Suspension summary
// ---------------------------------------------------------------------------

// The suspension replaces each map by a band (domain base) x [0,1]; this
// reports its coarse shape: band count, orientation-reversing count, total
// band area (= total domain measure), and the supporting component count.
struct SuspensionSummary {
  int bands = 0;
  int reversing = 0;
  int singletons = 0;
  int components = 0;
  Scalar area;
};

inline SuspensionSummary suspend(const IsoSystem& s) {
  SuspensionSummary sum;
  sum.components = static_cast<int>(s.comps().size());
  for (const PartialIso& f : s.maps()) {
    if (f.singleton())
      ++sum.singletons;  // a point map suspends to an arc, not a band
    else
      ++sum.bands;
    if (f.eps < 0) ++sum.reversing;
    sum.area += f.width();
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

enum class SystemClass { SIMPLICIAL, SURFACE, AXIAL, UNRESOLVED };

inline const char* system_class_name(SystemClass c) {
  switch (c) {
    case SystemClass::SIMPLICIAL: return "SIMPLICIAL";
    case SystemClass::SURFACE: return "SURFACE";
    case SystemClass::AXIAL: return "AXIAL";
    default: return "UNRESOLVED";
  }
}

struct Classification {
  SystemClass kind = SystemClass::UNRESOLVED;
  std::string certificate;
  RunResult run;
  ImanishiReport imanishi;
};

namespace detail {

// Do the given closed intervals tile every component exactly (cover with
// pairwise disjoint interiors)?
inline bool tiles(const IsoSystem& s,
                  const std::vector<std::tuple<int, Scalar, Scalar>>& ivs) {
  for (int c = 0; c < static_cast<int>(s.comps().size()); ++c) {
    std::vector<std::pair<Scalar, Scalar>> mine;
    for (const auto& [comp, lo, hi] : ivs)
      if (comp == c) mine.push_back({lo, hi});
    std::sort(mine.begin(), mine.end(), [](const auto& a, const auto& b) {
      return compare(a.first, b.first) < 0;
    });
    Scalar cur = s.comps()[c].first;
    for (const auto& [lo, hi] : mine) {
      if (compare(lo, cur) != 0) return false;
      cur = hi;
    }
    if (compare(cur, s.comps()[c].second) != 0) return false;
  }
  return true;
}

// Q-rank of the coefficient vectors of the given scalars (over the shared
// basis), by exact Gaussian elimination.
inline int q_rank(std::vector<std::vector<Rational>> rows) {
  int rank = 0;
  size_t cols = 0;
  for (auto& r : rows) cols = std::max(cols, r.size());
  for (auto& r : rows) r.resize(cols, Rational(0));
  for (size_t col = 0; col < cols; ++col) {
    int pivot = -1;
    for (size_t r = rank; r < rows.size(); ++r)
      if (rows[r][col] != 0) {
        pivot = static_cast<int>(r);
        break;
      }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    for (size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<int>(r) == rank || rows[r][col] == 0) continue;
      Rational f = rows[r][col] / rows[rank][col];
      for (size_t k = col; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
    if (rank == static_cast<int>(rows.size())) break;
  }
  return rank;
}

}  // namespace detail

inline Classification classify(const IsoSystem& s, int step_budget = 100,
                               int orbit_budget = 200) {
  Classification cl;
  cl.run = rips_run(s, step_budget);
  if (cl.run.outcome == RipsOutcome::HALT_EMPTY) {
    cl.kind = SystemClass::SIMPLICIAL;
    cl.certificate = "machine erased everything in " +
                     std::to_string(cl.run.log.size()) + " trims";
    return cl;
  }
  const IsoSystem& f = cl.run.final;

  // all endpoint orbits finite => stable finite partition exists
  bool all_closed = true;
  size_t orbit_points = 0;
  for (int c = 0; c < static_cast<int>(f.comps().size()) && all_closed; ++c) {
    Profile p = multiplicity_profile(f, c);
    for (const Scalar& x : p.points) {
      OrbitResult o = orbit(f, {c, x}, orbit_budget);
      orbit_points += o.points.size();
      if (!o.closed) {
        all_closed = false;
        break;
      }
    }
  }
  if (all_closed) {
    cl.kind = SystemClass::SIMPLICIAL;
    cl.certificate =
        "machine " + std::string(outcome_name(cl.run.outcome)) +
        "; all endpoint orbits closed (" + std::to_string(orbit_points) +
        " points give a stable finite partition)";
    return cl;
  }

  cl.imanishi = imanishi_components(f, orbit_budget);

  if (cl.run.outcome == RipsOutcome::PURE) {
    // interval-exchange shape: domains and ranges both tile D
    std::vector<std::tuple<int, Scalar, Scalar>> doms, rans;
    for (const PartialIso& m : f.maps()) {
      if (m.singleton()) continue;
      doms.push_back({m.dom_comp, m.dom_lo, m.dom_hi});
      rans.push_back({m.ran_comp, m.ran_lo, m.ran_hi});
    }
    bool tiling = detail::tiles(f, doms) && detail::tiles(f, rans);
    bool dense = !cl.imanishi.block_tag.empty();
    for (LeafTag t : cl.imanishi.block_tag) dense &= t == LeafTag::DENSE_LEAVES;
    if (tiling && dense) {
      cl.kind = SystemClass::SURFACE;
      cl.certificate =
          "PURE; domains and ranges tile D (interval exchange) with dense "
          "orbit evidence";
      return cl;
    }

    bool oriented = true;
    for (const PartialIso& m : f.maps()) oriented &= m.eps > 0;
    bool thick = true;
    for (int c = 0; c < static_cast<int>(f.comps().size()); ++c) {
      Profile p = multiplicity_profile(f, c);
      for (int m : p.open_mult) thick &= m >= 2;
    }
    if (oriented && thick) {
      std::vector<std::vector<Rational>> rows;
      std::vector<int> which;
      for (size_t m = 0; m < f.maps().size(); ++m)
        if (!f.maps()[m].singleton()) {
          rows.push_back(f.maps()[m].t.coeffs());
          which.push_back(static_cast<int>(m));
        }
      if (detail::q_rank(rows) >= 2) {
        cl.kind = SystemClass::AXIAL;
        // name two independent offsets for the certificate
        std::string names;
        for (size_t i = 0; i < which.size() && names.empty(); ++i)
          for (size_t j = i + 1; j < which.size(); ++j)
            if (detail::q_rank({rows[i], rows[j]}) == 2) {
              names = "maps " + std::to_string(which[i]) + " and " +
                      std::to_string(which[j]);
              break;
            }
        cl.certificate = "PURE; orientation-preserving, multiplicity >= 2, "
                         "offsets of Q-rank >= 2 (" + names + ")";
        return cl;
      }
    }
  }
  cl.kind = SystemClass::UNRESOLVED;
  cl.certificate = "no classification certificate within budgets";
  return cl;
}

// ---------------------------------------------------------------------------
// Leaf space of a simplicial system
// ---------------------------------------------------------------------------

struct LeafSpaceGraph {
  struct Edge {
    int u, v;
    Scalar len;
  };
  int vertices = 0;
  std::vector<Edge> edges;
  int components = 0;
  int betti = 0;
  Scalar total_length;
  bool is_tree() const { return betti == 0 && components == 1; }

  std::string dot() const {
    std::ostringstream os;
    os << "graph leafspace {\n";
    for (int v = 0; v < vertices; ++v) os << "  " << v << ";\n";
    for (const Edge& e : edges)
      os << "  " << e.u << " -- " << e.v << " [label=\"" << e.len.str() << "\"];\n";
    os << "}\n";
    return os.str();
  }
};

// Quotient of D by the smallest equivalence relation identifying x with
// f(x): defined for systems whose endpoint orbits are finite.  Pieces between
// consecutive cut points are glued by orientation-signed classes; a parity
// conflict (a piece glued to itself reversed) cuts the piece at its midpoint
// and the closure is re-run.
inline LeafSpaceGraph leaf_space_graph(const IsoSystem& s, int point_budget = 1000) {
  // initial cut set: component ends and base endpoints
  std::set<CPoint> cuts;
  for (int c = 0; c < static_cast<int>(s.comps().size()); ++c) {
    cuts.insert({c, s.comps()[c].first});
    cuts.insert({c, s.comps()[c].second});
  }
  for (const PartialIso& f : s.maps()) {
    cuts.insert({f.dom_comp, f.dom_lo});
    cuts.insert({f.dom_comp, f.dom_hi});
    cuts.insert({f.ran_comp, f.ran_lo});
    cuts.insert({f.ran_comp, f.ran_hi});
  }
  auto close_under_orbits = [&]() {
    std::deque<CPoint> work(cuts.begin(), cuts.end());
    while (!work.empty()) {
      CPoint p = work.front();
      work.pop_front();
      for (const PartialIso& f : s.maps()) {
        std::vector<CPoint> nexts;
        if (f.dom_comp == p.comp && compare(p.x, f.dom_lo) >= 0 &&
            compare(p.x, f.dom_hi) <= 0)
          nexts.push_back({f.ran_comp, f.apply(p.x)});
        if (f.ran_comp == p.comp && compare(p.x, f.ran_lo) >= 0 &&
            compare(p.x, f.ran_hi) <= 0)
          nexts.push_back({f.dom_comp, f.unapply(p.x)});
        for (const CPoint& q : nexts)
          if (cuts.insert(q).second) {
            if (static_cast<int>(cuts.size()) > point_budget)
              throw NotSimplicial("cut-point closure exceeded " +
                                  std::to_string(point_budget) + " points");
            work.push_back(q);
          }
      }
    }
  };

  for (int round = 0;; ++round) {
    if (round > 64) throw NotSimplicial("leaf space did not stabilize");
    close_under_orbits();

    // pieces per component
    std::vector<std::vector<Scalar>> cut_at(s.comps().size());
    for (const CPoint& p : cuts) cut_at[p.comp].push_back(p.x);
    struct Piece {
      int comp;
      Scalar lo, hi;
    };
    std::vector<Piece> pieces;
    std::map<std::pair<int, std::string>, int> piece_at;  // (comp, lo.str) -> id
    for (int c = 0; c < static_cast<int>(s.comps().size()); ++c)
      for (size_t k = 0; k + 1 < cut_at[c].size(); ++k) {
        piece_at[{c, cut_at[c][k].str()}] = static_cast<int>(pieces.size());
        pieces.push_back({c, cut_at[c][k], cut_at[c][k + 1]});
      }

    // signed union-find over pieces
    std::vector<int> par(pieces.size()), sgn(pieces.size(), 1);
    for (size_t i = 0; i < pieces.size(); ++i) par[i] = static_cast<int>(i);
    std::function<std::pair<int, int>(int)> find = [&](int x) -> std::pair<int, int> {
      if (par[x] == x) return {x, 1};
      auto [r, sg] = find(par[x]);
      par[x] = r;
      sgn[x] *= sg;
      return {r, sgn[x]};
    };
    bool conflict = false;
    std::vector<int> conflicted;
    for (const PartialIso& f : s.maps()) {
      if (f.singleton()) continue;
      // every piece inside the domain maps onto a piece
      for (size_t i = 0; i < pieces.size(); ++i) {
        const Piece& p = pieces[i];
        if (p.comp != f.dom_comp || compare(p.lo, f.dom_lo) < 0 ||
            compare(p.hi, f.dom_hi) > 0)
          continue;
        auto [il, ih] = f.image(p.lo, p.hi);
        auto it = piece_at.find({f.ran_comp, il.str()});
        if (it == piece_at.end()) throw std::logic_error("image piece missing");
        int j = it->second;
        if (compare(pieces[j].hi, ih) != 0)
          throw std::logic_error("image piece does not match the cut set");
        auto [ri, si] = find(static_cast<int>(i));
        auto [rj, sj] = find(j);
        if (ri == rj) {
          if (si * f.eps != sj) {
            conflict = true;
            conflicted.push_back(static_cast<int>(i));
          }
        } else {
          par[ri] = rj;
          sgn[ri] = si * f.eps * sj;  // make signs consistent through the glue
        }
      }
    }
    if (conflict) {
      // cut the conflicted pieces at their midpoints and redo the closure
      for (int i : conflicted)
        cuts.insert({pieces[i].comp,
                     (pieces[i].lo + pieces[i].hi) / Rational(2)});
      continue;
    }

    // piece classes: verify equal lengths, pick representatives
    std::map<int, std::vector<int>> classes;
    for (size_t i = 0; i < pieces.size(); ++i) classes[find(static_cast<int>(i)).first].push_back(static_cast<int>(i));
    for (auto& [root, ids] : classes)
      for (int i : ids)
        if (compare(pieces[i].hi - pieces[i].lo,
                    pieces[root].hi - pieces[root].lo) != 0)
          throw std::logic_error("glued pieces of different lengths");

    // point classes: cut points identified through every map
    std::vector<CPoint> cpts(cuts.begin(), cuts.end());
    std::map<CPoint, int> cpt_id;
    for (size_t i = 0; i < cpts.size(); ++i) cpt_id[cpts[i]] = static_cast<int>(i);
    std::vector<int> pdsu(cpts.size());
    for (size_t i = 0; i < cpts.size(); ++i) pdsu[i] = static_cast<int>(i);
    std::function<int(int)> pfind = [&](int x) {
      while (pdsu[x] != x) x = pdsu[x] = pdsu[pdsu[x]];
      return x;
    };
    for (const CPoint& p : cpts)
      for (const PartialIso& f : s.maps()) {
        if (f.dom_comp == p.comp && compare(p.x, f.dom_lo) >= 0 &&
            compare(p.x, f.dom_hi) <= 0) {
          CPoint q{f.ran_comp, f.apply(p.x)};
          pdsu[pfind(cpt_id.at(p))] = pfind(cpt_id.at(q));
        }
      }
    std::map<int, int> vclass;
    for (size_t i = 0; i < cpts.size(); ++i) {
      int r = pfind(static_cast<int>(i));
      if (!vclass.count(r)) {
        int id = static_cast<int>(vclass.size());
        vclass[r] = id;
      }
    }

    LeafSpaceGraph g;
    g.vertices = static_cast<int>(vclass.size());
    for (auto& [root, ids] : classes) {
      const Piece& p = pieces[root];
      int u = vclass.at(pfind(cpt_id.at({p.comp, p.lo})));
      int v = vclass.at(pfind(cpt_id.at({p.comp, p.hi})));
      g.edges.push_back({u, v, p.hi - p.lo});
      g.total_length += p.hi - p.lo;
    }
    // connected components and betti
    std::vector<int> gd(g.vertices);
    for (int i = 0; i < g.vertices; ++i) gd[i] = i;
    std::function<int(int)> gfind = [&](int x) {
      while (gd[x] != x) x = gd[x] = gd[gd[x]];
      return x;
    };
    for (const auto& e : g.edges) gd[gfind(e.u)] = gfind(e.v);
    std::set<int> roots;
    for (int i = 0; i < g.vertices; ++i) roots.insert(gfind(i));
    g.components = static_cast<int>(roots.size());
    g.betti = static_cast<int>(g.edges.size()) - g.vertices + g.components;
    return g;
  }
}

}  // namespace rtreelab
