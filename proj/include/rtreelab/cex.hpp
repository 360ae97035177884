#pragma once

// The nested-stabilizer construction: a descending chain of rank-2 subgroups
// M_1 ⊃ M_2 ⊃ ... of A = <a,b> with M_i malnormal in M_{i-1} and
// ∩ M_i = C = <a>, the path-of-groups Γ_k it spans between A and a second
// copy A' = <a,c>, and the exact metric data of the associated trees T_k:
// edge lengths 1/2^i, spine length 1, fixed-set extents, and translation
// lengths of products g·g' of elliptic elements from the two sides.

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "rtreelab/errors.hpp"
#include "rtreelab/gog.hpp"
#include "rtreelab/scalar.hpp"
#include "rtreelab/subgroup_graph.hpp"
#include "rtreelab/word.hpp"

namespace rtreelab {

struct ChainLevel {
  int i = 0;              // 1-based level
  Word b;                 // b_i, a word over {a,b}
  SubgroupGraph M = SubgroupGraph::trivial_subgroup(1);  // M_i = <a, b_i>
  bool basis_ok = false;  // (a, b_i) is a free basis: rank 2 and generating
};

namespace detail {

inline Rational half_pow(int m) {
  Rational r(1);
  for (int j = 0; j < m; ++j) r /= 2;
  return r;
}

}  // namespace detail

// Ambient F_3 with a=0, b=1, c=2.  A = <a,b> and A' = <a,c> share the cyclic
// subgroup C = <a>; the chain lives on the A side, b_1 = seed and
// b_i = b_{i-1} a b_{i-1}^2.  Levels are computed once and kept.
class Chain {
 public:
  explicit Chain(const Word& seed = default_seed())
      : seed_(seed),
        A_(SubgroupGraph::from_generators(
            {Word::parse("a"), Word::parse("b")}, kAlphabet)),
        Ap_(SubgroupGraph::from_generators(
            {Word::parse("a"), Word::parse("c")}, kAlphabet)),
        C_(SubgroupGraph::from_generators({Word::parse("a")}, kAlphabet)) {
    if (seed_.trivial() || !A_.contains(seed_) || C_.contains(seed_))
      throw InputError("chain seed must lie in <a,b> but not in <a>");
  }

  static Word default_seed() { return Word::parse("babb"); }
  static constexpr int kAlphabet = 3;

  const SubgroupGraph& side_a() const { return A_; }        // A = <a,b>
  const SubgroupGraph& side_a_prime() const { return Ap_; } // A' = <a,c>
  const SubgroupGraph& axis() const { return C_; }          // C = <a>

  const ChainLevel& level(int i) const {
    if (i < 1) throw InputError("chain levels are 1-based");
    extend(i);
    return levels_[i - 1];
  }

  // Smallest i <= cap with g outside M_i, if any.  The chain is nested, so
  // this is the exact escape level whenever it is <= cap.
  std::optional<int> escape_level(const Word& g, int cap) const {
    for (int i = 1; i <= cap; ++i)
      if (!level(i).M.contains(g)) return i;
    return std::nullopt;
  }

 private:
  void extend(int n) const {
    while (static_cast<int>(levels_.size()) < n) {
      ChainLevel l;
      l.i = static_cast<int>(levels_.size()) + 1;
      l.b = l.i == 1 ? seed_ : levels_.back().b * Word::parse("a") *
                                   levels_.back().b * levels_.back().b;
      l.M = SubgroupGraph::from_generators({Word::parse("a"), l.b}, kAlphabet);
      l.basis_ok = l.M.rank() == 2;  // two generators + rank 2 => free basis
      levels_.push_back(std::move(l));
    }
  }

  Word seed_;
  SubgroupGraph A_, Ap_, C_;
  // deque: level() hands out references that must survive later extension
  mutable std::deque<ChainLevel> levels_;
};

// Levels 1..n with the inclusion certificates checked: each M_i sits inside
// M_{i-1} (generator membership) and properly so (b_{i-1} escapes M_i).
inline std::vector<ChainLevel> build_chain(const Chain& chain, int n) {
  if (n < 1) throw InputError("build_chain needs n >= 1");
  std::vector<ChainLevel> out;
  for (int i = 1; i <= n; ++i) {
    const ChainLevel& l = chain.level(i);
    if (!l.basis_ok)
      throw InputError("level " + std::to_string(i) +
                       ": (a, b_i) is not a free basis");
    if (i > 1) {
      const ChainLevel& up = chain.level(i - 1);
      if (!up.M.contains(Word::parse("a")) || !up.M.contains(l.b))
        throw InputError("level " + std::to_string(i) +
                         " does not include into its predecessor");
      if (l.M.contains(up.b))
        throw InputError("level " + std::to_string(i) +
                         " fails to be a proper subgroup");
    }
    out.push_back(l);
  }
  return out;
}

// Malnormality of M_i inside M_{i-1}, via the fiber product of the rewritten
// graph with itself.
inline bool verify_malnormal_step(const Chain& chain, int i) {
  if (i < 2) throw InputError("malnormal step needs i >= 2");
  return chain.level(i).M.malnormal_in(chain.level(i - 1).M).malnormal;
}

struct IntersectionReport {
  bool ok = true;
  std::vector<std::string> exceptions;  // offending words in the (a,b_n) basis
  long words_checked = 0;
};

// Exhaustive check that nothing outside <a> survives the whole chain: every
// reduced word w over the basis (a, b_n) of M_n with |w| <= len either is a
// power of a (then every rewrite preserves its length) or grows strictly at
// each of the n substitution steps b_j -> b_{j-1} a b_{j-1}^2 down to the
// (a,b) basis of A.  Strict growth at every level forces ∩ M_i = <a>.
inline IntersectionReport verify_intersection(const Chain& chain, int n,
                                              int len) {
  if (n < 1) throw InputError("verify_intersection needs n >= 1");
  IntersectionReport rep;

  // substitution images of the basis letters (x, y) = (a, b_j) one level down
  const Word x = Word::parse("a");
  const Word step_y = Word::parse("babb");         // y -> y x y^2 reads "babb"
  const std::vector<Word> step = {x, step_y};
  const std::vector<Word> last = {x, chain.level(1).b};  // into the (a,b) basis

  std::vector<Letter> cur;
  auto power_of_x = [&]() {
    for (const Letter& l : cur)
      if (l.gen != 0) return false;
    return true;
  };
  auto check = [&]() {
    ++rep.words_checked;
    Word w = Word::reduce(cur);
    bool pure = power_of_x();
    for (int j = n; j >= 1; --j) {
      Word next = w.substitute(j == 1 ? last : step);
      if (pure ? next.length() != w.length() : next.length() <= w.length()) {
        rep.exceptions.push_back(Word::reduce(cur).str());
        return;
      }
      w = next;
    }
    // fully expanded: only powers of a may land in <a>
    if (!pure) {
      for (const Letter& l : w.letters())
        if (l.gen != 0) return;
      rep.exceptions.push_back(Word::reduce(cur).str());
    }
  };
  // depth-first enumeration of reduced words over two letters
  auto rec = [&](auto&& self, int depth) -> void {
    if (depth == len) return;
    for (int g = 0; g < 2; ++g)
      for (int e : {+1, -1}) {
        if (!cur.empty() && cur.back().gen == g && cur.back().exp == -e)
          continue;
        cur.push_back({g, e});
        check();
        self(self, depth + 1);
        cur.pop_back();
      }
  };
  rec(rec, 0);
  rep.ok = rep.exceptions.empty();
  return rep;
}

struct SpineMetrics {
  Scalar d;                     // distance between the two end vertices
  std::vector<Scalar> lengths;  // e_1..e_k then the closing edge
};

// Edge lengths 1/2, 1/4, ..., 1/2^k plus a closing edge of length 1/2^k;
// the telescoping sum is exactly 1 for every k.
inline SpineMetrics spine_metrics(int k) {
  if (k < 0) throw InputError("spine_metrics needs k >= 0");
  SpineMetrics m;
  Rational d(0);
  for (int i = 1; i <= k; ++i) {
    m.lengths.emplace_back(detail::half_pow(i));
    d += detail::half_pow(i);
  }
  m.lengths.emplace_back(detail::half_pow(k));
  d += detail::half_pow(k);
  m.d = Scalar(d);
  return m;
}

namespace detail {

// escape level k_0 of g through the chain, capped: min(k_0, cap+1) is exact
inline int escape_capped(const Chain& chain, const Word& g, int cap) {
  std::optional<int> k0 = chain.escape_level(g, cap);
  return k0 ? *k0 : cap + 1;
}

inline void require_in_side_a(const Chain& chain, const Word& g) {
  if (!chain.side_a().contains(g))
    throw PreconditionViolated("element not in <a,b>: " + g.str());
  if (chain.axis().contains(g))
    throw InC("element lies in <a>: " + g.str());
}

}  // namespace detail

// Length of the spine segment [a_k, ·] fixed by g: g fixes the vertex chain
// down to M_{k_0 - 1}, i.e. the edges e_1..e_{min(k_0-1, k)}.
inline Scalar spine_extent(const Chain& chain, const Word& g, int k) {
  if (k < 0) throw InputError("spine_extent needs k >= 0");
  detail::require_in_side_a(chain, g);
  int k0 = detail::escape_capped(chain, g, k + 1);
  int m = std::min(k0 - 1, k);
  return Scalar(Rational(1) - detail::half_pow(m));
}

// Extent 1 - 1/2^{k_0} of the fixed set of g, truncated to the spine of T_k.
inline Scalar fixed_extent(const Chain& chain, const Word& g, int k) {
  if (k < 0) throw InputError("fixed_extent needs k >= 0");
  detail::require_in_side_a(chain, g);
  int k0 = detail::escape_capped(chain, g, k + 1);
  return Scalar(Rational(1) - detail::half_pow(std::min(k0, k)));
}

// Translation length of g·g' on T_k for elliptic g on the A side and g' on
// the A' side with disjoint fixed sets: twice the gap between the fixed sets
// along the spine.  With g outside M_1 both fixed sets are single points at
// distance 1, so the value is exactly 2.
inline Scalar translation_length(const Chain& chain, const Word& g,
                                 const Word& gp, int k) {
  if (k < 0) throw InputError("translation_length needs k >= 0");
  detail::require_in_side_a(chain, g);
  if (chain.level(1).M.contains(g))
    throw PreconditionViolated("element lies in M_1: " + g.str());
  if (!chain.side_a_prime().contains(gp))
    throw PreconditionViolated("element not in <a,c>: " + gp.str());
  if (chain.axis().contains(gp))
    throw InC("element lies in <a>: " + gp.str());
  // g' fixes only the far endpoint: no chain hangs off the A' side
  Scalar gap = Scalar(Rational(1)) - spine_extent(chain, g, k);
  return gap + gap;
}

// ℓ_{T_k}(g·g') for k = 0..k_max, allowing g anywhere in A \ C; the fixed
// set of g eats spine_extent(g,k) of the bridge.  The sequence is checked
// non-increasing before it is returned.
inline std::vector<Scalar> length_monotone(const Chain& chain, const Word& g,
                                           const Word& gp, int k_max) {
  if (k_max < 0) throw InputError("length_monotone needs k_max >= 0");
  detail::require_in_side_a(chain, g);
  if (!chain.side_a_prime().contains(gp))
    throw PreconditionViolated("element not in <a,c>: " + gp.str());
  if (chain.axis().contains(gp))
    throw InC("element lies in <a>: " + gp.str());
  std::vector<Scalar> out;
  for (int k = 0; k <= k_max; ++k) {
    Scalar gap = Scalar(Rational(1)) - spine_extent(chain, g, k);
    out.push_back(gap + gap);
    if (k > 0 && compare(out[k], out[k - 1]) > 0)
      throw MonotonicityViolation("translation length grows at k = " +
                                  std::to_string(k));
  }
  return out;
}

struct GammaK {
  int k = 0;
  GraphOfGroups graph = GraphOfGroups::make(
      {SubgroupGraph::trivial_subgroup(1)}, {});
  std::vector<Scalar> lengths;  // parallel to graph.edge indices
};

// The path of groups A - M_1 - ... - M_k - A' with edge groups M_1..M_k and
// the closing edge C, carrying lengths 1/2^i and 1/2^k.
inline GammaK build_gamma(const Chain& chain, int k) {
  if (k < 0) throw InputError("build_gamma needs k >= 0");
  GammaK g;
  g.k = k;
  std::vector<SubgroupGraph> vgroups{chain.side_a()};
  std::vector<GraphOfGroups::Edge> edges;
  for (int i = 1; i <= k; ++i) {
    vgroups.push_back(chain.level(i).M);
    edges.push_back({i - 1, i, chain.level(i).M});
    g.lengths.emplace_back(detail::half_pow(i));
  }
  vgroups.push_back(chain.side_a_prime());
  edges.push_back({k, k + 1, chain.axis()});
  g.lengths.emplace_back(detail::half_pow(k));
  g.graph = GraphOfGroups::make(vgroups, edges);
  return g;
}

}  // namespace rtreelab
