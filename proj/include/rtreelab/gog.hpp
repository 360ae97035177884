#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "subgroup_graph.hpp"
#include "word.hpp"

namespace rtreelab {

// Graphs of groups over a fixed free ambient F_r: a finite connected graph
// whose vertex and edge groups are explicit subgroups of F_r, each edge group
// included in both endpoint vertex groups.  The elementary moves (subdivide,
// collapse, fold, group-fold) act on these, folds carrying a certificate that
// the pushed edge group equals the target edge group.

struct ScottMonitor {
  int betti = 0;
  int w_count = 0;
  std::vector<Word> ell;  // recorded elliptic witnesses: vertex-group bases
};

struct StarCertificate {
  bool ok = false;
  Word witness;        // element of one pushed edge group missing from the other
  std::string detail;
};

struct FoldMove {
  enum Kind { SUBDIVIDE, COLLAPSE, FOLD, GROUPFOLD };
  Kind kind = SUBDIVIDE;
  int e1 = -1, e2 = -1;      // edges (FOLD uses both, SUBDIVIDE/COLLAPSE e1)
  Word conj;                 // FOLD: conjugator applied to e2's group
  int vertex = -1;           // GROUPFOLD target vertex
  std::vector<Word> killed;  // GROUPFOLD: killed elements of the vertex group
  StarCertificate cert;      // filled by apply_move for FOLD

  std::string str() const {
    std::ostringstream os;
    switch (kind) {
      case SUBDIVIDE: os << "subdivide e" << e1; break;
      case COLLAPSE: os << "collapse e" << e1; break;
      case FOLD:
        os << "fold e" << e1 << " e" << e2;
        if (!conj.trivial()) os << " conj " << conj.str();
        break;
      case GROUPFOLD:
        os << "groupfold v" << vertex << " kill";
        for (const Word& w : killed) os << " " << w.str();
        break;
    }
    return os.str();
  }
};

struct GogDiagnostics {
  bool ok = true;
  std::vector<std::string> issues;
  std::optional<Word> witness;  // first failing inclusion generator
};

class GraphOfGroups {
 public:
  struct Edge {
    int u, v;
    SubgroupGraph group;
  };

  static GraphOfGroups make(std::vector<SubgroupGraph> vgroups,
                            std::vector<Edge> edges) {
    GraphOfGroups g;
    if (vgroups.empty()) throw InputError("graph of groups needs a vertex");
    g.alphabet_ = vgroups[0].alphabet();
    for (const SubgroupGraph& h : vgroups)
      if (h.alphabet() != g.alphabet_)
        throw InputError("all groups must share one ambient free group");
    for (const Edge& e : edges) {
      if (e.u < 0 || e.v < 0 || e.u >= static_cast<int>(vgroups.size()) ||
          e.v >= static_cast<int>(vgroups.size()))
        throw InputError("edge endpoint out of range");
      if (e.group.alphabet() != g.alphabet_)
        throw InputError("all groups must share one ambient free group");
    }
    g.vg_ = std::move(vgroups);
    g.eg_ = std::move(edges);
    return g;
  }

  int alphabet() const { return alphabet_; }
  int vertex_count() const { return static_cast<int>(vg_.size()); }
  int edge_count() const { return static_cast<int>(eg_.size()); }
  const SubgroupGraph& vertex_group(int v) const { return vg_.at(v); }
  const Edge& edge(int e) const { return eg_.at(e); }

  GogDiagnostics validate() const {
    GogDiagnostics d;
    // connectivity
    std::vector<int> dsu(vg_.size());
    for (size_t i = 0; i < dsu.size(); ++i) dsu[i] = static_cast<int>(i);
    auto find = [&](int x) {
      while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
      return x;
    };
    for (const Edge& e : eg_) dsu[find(e.u)] = find(e.v);
    for (size_t i = 1; i < dsu.size(); ++i)
      if (find(static_cast<int>(i)) != find(0)) {
        d.ok = false;
        d.issues.push_back("graph is not connected");
        break;
      }
    // edge-group inclusions, with the rewriting exercised as the certificate
    for (size_t e = 0; e < eg_.size(); ++e)
      for (int end : {eg_[e].u, eg_[e].v})
        for (const Word& w : eg_[e].group.free_basis()) {
          if (!vg_[end].contains(w)) {
            d.ok = false;
            d.issues.push_back("edge " + std::to_string(e) + " group not inside vertex " +
                               std::to_string(end) + ": generator " + w.str());
            if (!d.witness) d.witness = w;
          } else {
            (void)vg_[end].rewrite_in_basis(w);
          }
        }
    return d;
  }

  ScottMonitor monitor() const {
    ScottMonitor m;
    m.betti = edge_count() - vertex_count() + 1;
    for (int v = 0; v < vertex_count(); ++v) {
      bool proper = false;
      for (const Edge& e : eg_)
        if ((e.u == v || e.v == v) && !e.group.same_subgroup(vg_[v]))
          proper = true;
      if (proper) ++m.w_count;
    }
    std::set<Word> ell;
    for (const SubgroupGraph& h : vg_)
      for (const Word& w : h.free_basis()) ell.insert(w);
    m.ell.assign(ell.begin(), ell.end());
    return m;
  }

  GraphOfGroups apply_move(FoldMove& m) const {
    switch (m.kind) {
      case FoldMove::SUBDIVIDE: return subdivide(m.e1);
      case FoldMove::COLLAPSE: return collapse(m.e1);
      case FoldMove::FOLD: return fold(m);
      case FoldMove::GROUPFOLD: return group_fold(m.vertex, m.killed);
    }
    throw InputError("unknown move");
  }
  GraphOfGroups apply_move(FoldMove&& m) const { return apply_move(m); }

  // Graph-of-groups isomorphism: a vertex bijection preserving adjacency
  // with equal vertex groups and matching edge-group multisets per pair.
  bool isomorphic(const GraphOfGroups& o) const {
    if (vertex_count() != o.vertex_count() || edge_count() != o.edge_count())
      return false;
    std::vector<std::string> key(vertex_count()), okey(o.vertex_count());
    for (int v = 0; v < vertex_count(); ++v) key[v] = vg_[v].dot();
    for (int v = 0; v < o.vertex_count(); ++v) okey[v] = o.vg_[v].dot();
    std::vector<int> perm(vertex_count(), -1);
    std::vector<bool> used(vertex_count(), false);
    auto edges_match = [&]() {
      std::multiset<std::tuple<int, int, std::string>> a, b;
      for (const Edge& e : eg_) {
        int u = perm[e.u], v = perm[e.v];
        a.insert({std::min(u, v), std::max(u, v), e.group.dot()});
      }
      for (const Edge& e : o.eg_)
        b.insert({std::min(e.u, e.v), std::max(e.u, e.v), e.group.dot()});
      return a == b;
    };
    std::function<bool(int)> rec = [&](int v) {
      if (v == vertex_count()) return edges_match();
      for (int w = 0; w < vertex_count(); ++w) {
        if (used[w] || key[v] != okey[w]) continue;
        used[w] = true;
        perm[v] = w;
        if (rec(v + 1)) return true;
        used[w] = false;
        perm[v] = -1;
      }
      return false;
    };
    return rec(0);
  }

  std::string dot() const {
    std::ostringstream os;
    os << "graph gog {\n";
    for (int v = 0; v < vertex_count(); ++v) {
      os << "  " << v << " [label=\"";
      const auto basis = vg_[v].free_basis();
      for (size_t i = 0; i < basis.size(); ++i)
        os << (i ? "," : "") << basis[i].str();
      if (basis.empty()) os << "1";
      os << "\"];\n";
    }
    for (const Edge& e : eg_) {
      os << "  " << e.u << " -- " << e.v << " [label=\"";
      const auto basis = e.group.free_basis();
      for (size_t i = 0; i < basis.size(); ++i)
        os << (i ? "," : "") << basis[i].str();
      if (basis.empty()) os << "1";
      os << "\"];\n";
    }
    os << "}\n";
    return os.str();
  }

 private:
  GraphOfGroups subdivide(int e) const {
    check_edge(e);
    GraphOfGroups g = *this;
    Edge old = g.eg_[e];
    int w = g.vertex_count();
    g.vg_.push_back(old.group);  // barycentric vertex carries the edge group
    g.eg_.erase(g.eg_.begin() + e);
    g.eg_.push_back({old.u, w, old.group});
    g.eg_.push_back({w, old.v, old.group});
    return g;
  }

  GraphOfGroups collapse(int e) const {
    check_edge(e);
    const Edge& ed = eg_[e];
    if (ed.u == ed.v) throw InputError("cannot collapse a loop edge");
    int keep = std::min(ed.u, ed.v), drop = std::max(ed.u, ed.v);
    GraphOfGroups g;
    g.alphabet_ = alphabet_;
    for (int v = 0; v < vertex_count(); ++v) {
      if (v == drop) continue;
      g.vg_.push_back(v == keep ? SubgroupGraph::join(vg_[ed.u], vg_[ed.v])
                                : vg_[v]);
    }
    auto remap = [&](int v) { return v == drop ? keep : (v > drop ? v - 1 : v); };
    for (int i = 0; i < edge_count(); ++i) {
      if (i == e) continue;
      g.eg_.push_back({remap(eg_[i].u), remap(eg_[i].v), eg_[i].group});
    }
    return g;
  }

  GraphOfGroups fold(FoldMove& m) const {
    check_edge(m.e1);
    check_edge(m.e2);
    if (m.e1 == m.e2)
      throw InputError("cannot fold an edge onto itself; subdivide first");
    const Edge& a = eg_[m.e1];
    const Edge& b = eg_[m.e2];
    // shared corner vertex: smallest common endpoint
    int shared = -1;
    for (int x : {std::min(a.u, a.v), std::max(a.u, a.v)})
      if (x == b.u || x == b.v) {
        shared = x;
        break;
      }
    if (shared < 0) throw InputError("fold edges must share a vertex");
    int x = a.u == shared ? a.v : a.u;
    int y = b.u == shared ? b.v : b.u;

    // condition (*): the conjugated second edge group must equal the first
    SubgroupGraph pushed = b.group.conjugate(m.conj);
    m.cert.ok = pushed.same_subgroup(a.group);
    if (!m.cert.ok) {
      for (const Word& w : pushed.free_basis())
        if (!a.group.contains(w)) {
          m.cert.witness = w;
          break;
        }
      if (m.cert.witness.trivial())
        for (const Word& w : a.group.free_basis())
          if (!pushed.contains(w)) {
            m.cert.witness = w;
            break;
          }
      m.cert.detail = "pushed edge group differs from the folded edge group";
      throw StarViolation("fold: pushed edge group mismatch, witness " +
                          m.cert.witness.str());
    }
    m.cert.detail = "pushed edge group equals the folded edge group";

    GraphOfGroups g;
    g.alphabet_ = alphabet_;
    if (x == y) {
      g.vg_ = vg_;
      for (int i = 0; i < edge_count(); ++i)
        if (i != m.e2) g.eg_.push_back(eg_[i]);
      return g;
    }
    int keep = std::min(x, y), drop = std::max(x, y);
    for (int v = 0; v < vertex_count(); ++v) {
      if (v == drop) continue;
      g.vg_.push_back(v == keep ? SubgroupGraph::join(vg_[x], vg_[y]) : vg_[v]);
    }
    auto remap = [&](int v) { return v == drop ? keep : (v > drop ? v - 1 : v); };
    for (int i = 0; i < edge_count(); ++i) {
      if (i == m.e2) continue;
      g.eg_.push_back({remap(eg_[i].u), remap(eg_[i].v), eg_[i].group});
    }
    return g;
  }

  // Quotient of one vertex group by the normal closure of the killed words,
  // executed only when each killed word is (up to inversion) a basis element
  // of the vertex group: the quotient is then realized by deleting those
  // basis letters, and incident edge groups are replaced by their images.
  GraphOfGroups group_fold(int v, const std::vector<Word>& killed) const {
    if (v < 0 || v >= vertex_count()) throw InputError("groupfold vertex out of range");
    const SubgroupGraph& G = vg_[v];
    std::vector<Word> basis = G.free_basis();
    std::set<int> dead;
    for (const Word& w : killed) {
      if (!G.contains(w))
        throw InputError("killed element " + w.str() + " not in the vertex group");
      Word local = G.rewrite_in_basis(w);
      if (local.length() != 1)
        throw NotRealizable("killed element " + w.str() +
                            " is not a basis letter of the vertex group");
      dead.insert(local.letters()[0].gen);
    }
    auto image = [&](const Word& ambient) {
      Word local = G.rewrite_in_basis(ambient);
      std::vector<Word> target(basis.size());
      for (size_t i = 0; i < basis.size(); ++i)
        if (!dead.count(static_cast<int>(i))) target[i] = basis[i];
      return local.substitute(target);  // dead letters map to the identity
    };
    std::vector<Word> kept;
    for (size_t i = 0; i < basis.size(); ++i)
      if (!dead.count(static_cast<int>(i))) kept.push_back(basis[i]);

    GraphOfGroups g = *this;
    g.vg_[v] = SubgroupGraph::from_generators(kept, alphabet_);
    for (Edge& e : g.eg_) {
      if (e.u != v && e.v != v) continue;
      std::vector<Word> egens;
      for (const Word& w : e.group.free_basis()) egens.push_back(image(w));
      e.group = SubgroupGraph::from_generators(egens, alphabet_);
      // the image must still include into the untouched other endpoint
      int other = e.u == v ? e.v : e.u;
      if (other != v)
        for (const Word& w : e.group.free_basis())
          if (!g.vg_[other].contains(w))
            throw NotRealizable("groupfold image of edge group leaves vertex " +
                                std::to_string(other) + ": " + w.str());
    }
    return g;
  }

  void check_edge(int e) const {
    if (e < 0 || e >= edge_count()) throw InputError("edge index out of range");
  }

  int alphabet_ = 1;
  std::vector<SubgroupGraph> vg_;
  std::vector<Edge> eg_;
};

inline GraphOfGroups replay(const GraphOfGroups& g0, std::vector<FoldMove>& moves) {
  GraphOfGroups g = g0;
  for (FoldMove& m : moves) g = g.apply_move(m);
  return g;
}

// ---------------------------------------------------------------------------
// Morphisms and fold decomposition
// ---------------------------------------------------------------------------

// A morphism between graphs of groups over the same ambient: a graph map
// sending vertices to vertices and edges to edge paths (empty = collapsed to
// the image vertex), identity-on-ambient group maps given per vertex as
// images of the vertex-group basis, plus declared killed normal generators.
struct MorphismSpec {
  GraphOfGroups source, target;
  std::vector<int> vmap;                // source vertex -> target vertex
  std::vector<std::vector<int>> emap;   // source edge -> signed 1-based target edge path
  std::vector<std::vector<Word>> vimages;  // per vertex: image of each basis word
  std::vector<std::vector<Word>> killed;   // per vertex: killed normal generators

  static MorphismSpec identity_images(GraphOfGroups src, GraphOfGroups tgt,
                                      std::vector<int> vm,
                                      std::vector<std::vector<int>> em) {
    MorphismSpec s;
    s.vimages.resize(src.vertex_count());
    s.killed.resize(src.vertex_count());
    for (int v = 0; v < src.vertex_count(); ++v)
      s.vimages[v] = src.vertex_group(v).free_basis();
    s.source = std::move(src);
    s.target = std::move(tgt);
    s.vmap = std::move(vm);
    s.emap = std::move(em);
    return s;
  }

  // image of an ambient word w known to lie in source vertex group v
  Word push(int v, const Word& w) const {
    Word local = source.vertex_group(v).rewrite_in_basis(w);
    std::vector<Word> imgs = vimages[v];
    for (const Word& k : killed[v]) {
      Word kl = source.vertex_group(v).rewrite_in_basis(k);
      if (kl.length() == 1) imgs[kl.letters()[0].gen] = Word();
    }
    return local.substitute(imgs);
  }

  GogDiagnostics validate() const {
    GogDiagnostics d;
    auto complain = [&](const std::string& s) {
      d.ok = false;
      d.issues.push_back(s);
    };
    if (static_cast<int>(vmap.size()) != source.vertex_count())
      complain("vertex map size mismatch");
    if (static_cast<int>(emap.size()) != source.edge_count())
      complain("edge map size mismatch");
    if (!d.ok) return d;
    for (int v = 0; v < source.vertex_count(); ++v)
      if (vmap[v] < 0 || vmap[v] >= target.vertex_count())
        complain("vertex image out of range");
    if (!d.ok) return d;
    // edge paths must connect the endpoint images
    for (int e = 0; e < source.edge_count(); ++e) {
      int at = vmap[source.edge(e).u];
      for (int step : emap[e]) {
        int idx = std::abs(step) - 1;
        if (idx < 0 || idx >= target.edge_count()) {
          complain("edge path index out of range");
          return d;
        }
        const auto& te = target.edge(idx);
        int from = step > 0 ? te.u : te.v;
        int to = step > 0 ? te.v : te.u;
        if (from != at) complain("edge path does not chain at edge " + std::to_string(e));
        at = to;
      }
      if (at != vmap[source.edge(e).v])
        complain("edge path misses the endpoint image for edge " + std::to_string(e));
    }
    // group maps: basis images must lie in the image vertex group
    for (int v = 0; v < source.vertex_count(); ++v) {
      if (vimages[v].size() != source.vertex_group(v).free_basis().size()) {
        complain("vertex " + std::to_string(v) + " image list length mismatch");
        continue;
      }
      for (const Word& w : vimages[v])
        if (!w.trivial() && !target.vertex_group(vmap[v]).contains(w)) {
          complain("image " + w.str() + " not in the target vertex group");
          if (!d.witness) d.witness = w;
        }
    }
    return d;
  }
};

// Decompose a morphism into elementary moves: subdivide edges mapped to long
// paths, collapse edges mapped to points, apply declared group-folds, then
// fold edge pairs with a common corner and equal images, in lexicographic
// order.  The composition is checked against the target up to isomorphism.
inline std::vector<FoldMove> fold_decompose(const MorphismSpec& spec,
                                            int budget = 64) {
  GogDiagnostics d = spec.validate();
  if (!d.ok) throw InputError("morphism spec invalid: " + d.issues.front());

  GraphOfGroups cur = spec.source;
  std::vector<int> vmap = spec.vmap;
  std::vector<std::vector<int>> emap = spec.emap;
  std::vector<std::vector<Word>> kills = spec.killed;
  std::vector<FoldMove> out;
  auto spend = [&]() {
    if (static_cast<int>(out.size()) > budget)
      throw BudgetExceeded("fold decomposition exceeded " +
                           std::to_string(budget) + " moves");
  };

  // Step 0: subdivide until every edge maps to at most one edge
  for (int e = 0; e < static_cast<int>(emap.size());) {
    if (emap[e].size() <= 1) {
      ++e;
      continue;
    }
    FoldMove m;
    m.kind = FoldMove::SUBDIVIDE;
    m.e1 = e;
    cur = cur.apply_move(m);
    out.push_back(m);
    spend();
    int w = cur.vertex_count() - 1;
    int first = emap[e][0];
    std::vector<int> rest(emap[e].begin() + 1, emap[e].end());
    const auto& te = spec.target.edge(std::abs(first) - 1);
    vmap.push_back(first > 0 ? te.v : te.u);
    emap.erase(emap.begin() + e);
    emap.push_back({first});
    emap.push_back(rest);
    (void)w;
  }

  // Step 1: collapse edges mapped to points
  for (int e = 0; e < static_cast<int>(emap.size());) {
    if (!emap[e].empty()) {
      ++e;
      continue;
    }
    const auto& ed = cur.edge(e);
    int keep = std::min(ed.u, ed.v), drop = std::max(ed.u, ed.v);
    FoldMove m;
    m.kind = FoldMove::COLLAPSE;
    m.e1 = e;
    cur = cur.apply_move(m);
    out.push_back(m);
    spend();
    // merge bookkeeping
    kills[keep].insert(kills[keep].end(), kills[drop].begin(), kills[drop].end());
    kills.erase(kills.begin() + drop);
    vmap.erase(vmap.begin() + drop);
    emap.erase(emap.begin() + e);
  }

  // Step 2: declared group-folds
  for (int v = 0; v < static_cast<int>(kills.size()); ++v) {
    if (kills[v].empty()) continue;
    FoldMove m;
    m.kind = FoldMove::GROUPFOLD;
    m.vertex = v;
    m.killed = kills[v];
    cur = cur.apply_move(m);
    out.push_back(m);
    spend();
  }

  // Step 3: fold edge pairs with a common corner and the same image edge
  for (bool progress = true; progress;) {
    progress = false;
    for (int i = 0; i < static_cast<int>(emap.size()) && !progress; ++i)
      for (int j = i + 1; j < static_cast<int>(emap.size()) && !progress; ++j) {
        if (emap[i] != emap[j]) continue;
        const auto& a = cur.edge(i);
        const auto& b = cur.edge(j);
        int shared = -1;
        for (int x : {a.u, a.v})
          if (x == b.u || x == b.v) shared = shared < 0 ? x : shared;
        if (shared < 0) continue;
        int x = a.u == shared ? a.v : a.u;
        int y = b.u == shared ? b.v : b.u;
        if (vmap[x] != vmap[y]) continue;
        FoldMove m;
        m.kind = FoldMove::FOLD;
        m.e1 = i;
        m.e2 = j;
        cur = cur.apply_move(m);
        out.push_back(m);
        spend();
        if (x != y) {
          int drop = std::max(x, y);
          vmap.erase(vmap.begin() + drop);
          kills.erase(kills.begin() + drop);
        }
        emap.erase(emap.begin() + j);
        progress = true;
      }
  }

  if (!cur.isomorphic(spec.target))
    throw BudgetExceeded("decomposition did not reach the target graph of groups");
  return out;
}

// ---------------------------------------------------------------------------
// The monitored pipeline
// ---------------------------------------------------------------------------

struct PipelineResult {
  std::vector<ScottMonitor> trace;
  std::vector<Word> hyperbolic_witness;  // per level
  int stable_from = 0;  // first level of the constant (betti, w) suffix
  int limit_level = 0;
  int limit_edge = 0;
  SubgroupGraph limit_group = SubgroupGraph::trivial_subgroup(1);
};

// Per-level monitors with monotonicity checks; each consecutive map is
// checked for the pushed-edge-group condition, and each level is certified
// non-trivial by a short word not conjugate into any vertex group.
inline PipelineResult scott_pipeline(const std::vector<GraphOfGroups>& levels,
                                     const std::vector<MorphismSpec>& maps,
                                     int witness_len = 10) {
  if (levels.empty()) throw InputError("pipeline needs at least one level");
  if (maps.size() + 1 != levels.size())
    throw InputError("pipeline needs one map per consecutive level pair");
  PipelineResult r;

  for (const GraphOfGroups& g : levels) {
    GogDiagnostics d = g.validate();
    if (!d.ok) throw InputError("invalid level: " + d.issues.front());
    r.trace.push_back(g.monitor());
    // hyperbolic witness: first short ambient word not conjugate into any
    // vertex group (exact conjugacy via cyclic reading)
    Word found;
    bool have = false;
    std::vector<Word> layer{Word()};
    for (int len = 1; len <= witness_len && !have; ++len) {
      std::vector<Word> next;
      for (const Word& w : layer)
        for (int x = 0; x < g.alphabet() && !have; ++x)
          for (int s : {+1, -1}) {
            Word cand = w * Word::reduce({{x, s}});
            if (cand.length() != len) continue;
            next.push_back(cand);
            bool elliptic = false;
            for (int v = 0; v < g.vertex_count() && !elliptic; ++v)
              elliptic = g.vertex_group(v).contains_conjugate(cand);
            if (!elliptic) {
              found = cand;
              have = true;
              break;
            }
          }
      layer = std::move(next);
    }
    if (!have)
      throw InputError("level " + std::to_string(r.trace.size() - 1) +
                       " appears trivial: no hyperbolic witness up to length " +
                       std::to_string(witness_len));
    r.hyperbolic_witness.push_back(found);
  }

  // condition (*) along each map: target edge groups on the image path must
  // equal the pushed source edge group
  for (size_t k = 0; k < maps.size(); ++k) {
    const MorphismSpec& f = maps[k];
    GogDiagnostics d = f.validate();
    if (!d.ok)
      throw InputError("map " + std::to_string(k) + " invalid: " + d.issues.front());
    for (int e = 0; e < f.source.edge_count(); ++e) {
      std::vector<Word> pushed_gens;
      for (const Word& w : f.source.edge(e).group.free_basis())
        pushed_gens.push_back(f.push(f.source.edge(e).u, w));
      SubgroupGraph pushed =
          SubgroupGraph::from_generators(pushed_gens, f.source.alphabet());
      for (int step : f.emap[e]) {
        const SubgroupGraph& tg = f.target.edge(std::abs(step) - 1).group;
        if (tg.same_subgroup(pushed)) continue;
        Word witness;
        for (const Word& w : tg.free_basis())
          if (!pushed.contains(w)) {
            witness = w;
            break;
          }
        if (witness.trivial())
          for (const Word& w : pushed.free_basis())
            if (!tg.contains(w)) {
              witness = w;
              break;
            }
        throw MonotonicityViolation(
            "map " + std::to_string(k) + " edge " + std::to_string(e) +
            ": target edge group differs from the pushed one, witness " +
            witness.str());
      }
    }
  }

  // monitor monotonicity across levels
  for (size_t k = 0; k + 1 < r.trace.size(); ++k) {
    if (r.trace[k + 1].betti > r.trace[k].betti)
      throw MonotonicityViolation("betti increases from level " +
                                  std::to_string(k) + " to " +
                                  std::to_string(k + 1));
    if (r.trace[k + 1].w_count > r.trace[k].w_count)
      throw MonotonicityViolation("w count increases from level " +
                                  std::to_string(k) + " to " +
                                  std::to_string(k + 1));
  }

  // stabilized suffix and the splitting group it realizes
  int n = static_cast<int>(levels.size());
  int s = n - 1;
  while (s > 0 && r.trace[s - 1].betti == r.trace[n - 1].betti &&
         r.trace[s - 1].w_count == r.trace[n - 1].w_count)
    --s;
  r.stable_from = s;
  r.limit_level = n - 1;
  if (levels[n - 1].edge_count() == 0)
    throw InputError("last level has no edge: no splitting to report");
  r.limit_edge = 0;
  r.limit_group = levels[n - 1].edge(0).group;
  return r;
}

inline std::string monitor_csv(const std::vector<ScottMonitor>& trace) {
  std::ostringstream os;
  os << "level,betti,w_count,ell_witnesses\n";
  for (size_t i = 0; i < trace.size(); ++i)
    os << i << "," << trace[i].betti << "," << trace[i].w_count << ","
       << trace[i].ell.size() << "\n";
  return os.str();
}

}  // namespace rtreelab
