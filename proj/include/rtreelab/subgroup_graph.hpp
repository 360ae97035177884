#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "word.hpp"

namespace rtreelab {

// Folded core graph of a finitely generated subgroup of F_r with basepoint 0.
// The labeled graph is deterministic and co-deterministic (at most one
// outgoing and one incoming edge per label at each vertex), every vertex other
// than possibly the basepoint has degree >= 2, and vertices are numbered
// canonically by a breadth-first traversal from the basepoint that scans
// labels in increasing order (outgoing before incoming).  Two subgroups of
// F_r are equal iff their graphs here are identical tables.
class SubgroupGraph {
 public:
  static SubgroupGraph from_generators(std::vector<Word> gens, int alphabet) {
    if (alphabet < 1) throw InputError("alphabet size must be >= 1");
    for (const Word& g : gens)
      if (g.max_gen() >= alphabet)
        throw InputError("generator uses letter outside alphabet: " + g.str());

    // Wedge of loops at vertex 0, one per nontrivial generator.
    Builder b(alphabet);
    for (const Word& g : gens) {
      if (g.trivial()) continue;
      int cur = 0;
      for (size_t i = 0; i < g.length(); ++i) {
        int nxt = i + 1 == g.length() ? 0 : b.new_vertex();
        const Letter& l = g.at(i);
        if (l.exp > 0)
          b.add_edge(cur, l.gen, nxt);
        else
          b.add_edge(nxt, l.gen, cur);
        cur = nxt;
      }
    }
    b.fold();
    SubgroupGraph sg;
    sg.alphabet_ = alphabet;
    b.extract(sg.out_, sg.in_);
    sg.trim_core();
    sg.canonicalize();
    return sg;
  }

  static SubgroupGraph trivial_subgroup(int alphabet) {
    return from_generators({}, alphabet);
  }

  static SubgroupGraph full_group(int alphabet) {
    std::vector<Word> gens;
    for (int x = 0; x < alphabet; ++x) gens.push_back(Word::reduce({{x, +1}}));
    return from_generators(gens, alphabet);
  }

  int alphabet() const { return alphabet_; }
  size_t vertex_count() const { return out_.size(); }
  size_t edge_count() const {
    size_t e = 0;
    for (const auto& row : out_)
      for (int t : row)
        if (t >= 0) ++e;
    return e;
  }
  int rank() const {
    return static_cast<int>(edge_count()) - static_cast<int>(vertex_count()) + 1;
  }
  bool is_trivial() const { return rank() == 0; }

  struct EdgeRec {
    int u, label, v;
  };
  std::vector<EdgeRec> edges() const {
    std::vector<EdgeRec> es;
    for (int u = 0; u < static_cast<int>(out_.size()); ++u)
      for (int x = 0; x < alphabet_; ++x)
        if (out_[u][x] >= 0) es.push_back({u, x, out_[u][x]});
    return es;
  }

  std::optional<int> trace(const Word& w, int from = 0) const {
    int v = from;
    for (const Letter& l : w.letters()) {
      v = l.exp > 0 ? out_[v][l.gen] : in_[v][l.gen];
      if (v < 0) return std::nullopt;
    }
    return v;
  }

  bool contains(const Word& w) const {
    auto end = trace(w);
    return end && *end == 0;
  }

  bool contains_subgroup(const SubgroupGraph& k) const {
    for (const Word& w : k.free_basis())
      if (!contains(w)) return false;
    return true;
  }

  bool same_subgroup(const SubgroupGraph& o) const {
    return alphabet_ == o.alphabet_ && out_ == o.out_ && in_ == o.in_;
  }

  // Does some conjugate of w lie in the subgroup?  Exact: cyclically reduce
  // and look for a closed reading of the core anywhere in the graph.
  bool contains_conjugate(const Word& w) const {
    auto [core, conj] = w.cyclic_reduce();
    if (core.trivial()) return true;
    for (int v = 0; v < static_cast<int>(out_.size()); ++v) {
      auto end = trace(core, v);
      if (end && *end == v) return true;
    }
    return false;
  }

  // Free basis from the breadth-first spanning tree (deterministic: edges
  // scanned by label, outgoing before incoming).  Basis element for a
  // non-tree edge (u -x-> v) is  path(u) * x * path(v)^-1.
  std::vector<Word> free_basis() const {
    compute_tree();
    std::vector<Word> basis;
    for (const auto& e : nontree_) {
      Word w = path_[e.u];
      w.push_reduce({e.label, +1});
      w = w * path_[e.v].inverse();
      basis.push_back(w);
    }
    return basis;
  }

  // Rewrite a member of the subgroup as a word over the free basis (letters
  // 0..rank-1).  Throws NotAMember otherwise.
  Word rewrite_in_basis(const Word& w) const {
    compute_tree();
    Word out;
    int v = 0;
    for (const Letter& l : w.letters()) {
      int nxt = l.exp > 0 ? out_[v][l.gen] : in_[v][l.gen];
      if (nxt < 0) throw NotAMember("word leaves the graph: " + w.str());
      int eu = l.exp > 0 ? v : nxt;
      int ev = l.exp > 0 ? nxt : v;
      int idx = nontree_index(eu, l.gen, ev);
      if (idx >= 0) out.push_reduce({idx, l.exp});
      v = nxt;
    }
    if (v != 0) throw NotAMember("word is not a member: " + w.str());
    return out;
  }

  // Inverse of rewrite_in_basis: substitute basis words for basis letters.
  Word expand_from_basis(const Word& w_in_basis) const {
    return w_in_basis.substitute(free_basis());
  }

  SubgroupGraph conjugate(const Word& g) const {
    std::vector<Word> gens;
    for (const Word& b : free_basis()) gens.push_back(b.conjugate_by(g));
    return from_generators(gens, alphabet_);
  }

  static SubgroupGraph join(const SubgroupGraph& a, const SubgroupGraph& b) {
    if (a.alphabet_ != b.alphabet_) throw InputError("alphabet mismatch in join");
    std::vector<Word> gens = a.free_basis();
    for (const Word& w : b.free_basis()) gens.push_back(w);
    return from_generators(gens, a.alphabet_);
  }

  // Intersection via the fiber product (component of the pair of basepoints).
  static SubgroupGraph intersect(const SubgroupGraph& a, const SubgroupGraph& b) {
    if (a.alphabet_ != b.alphabet_) throw InputError("alphabet mismatch in intersect");
    int na = a.vertex_count();
    auto enc = [&](int u, int v) { return u * static_cast<int>(b.vertex_count()) + v; };
    std::map<int, int> id;  // encoded pair -> new vertex
    std::vector<std::pair<int, int>> verts;
    std::deque<int> work;
    auto touch = [&](int u, int v) {
      auto [it, fresh] = id.emplace(enc(u, v), verts.size());
      if (fresh) {
        verts.push_back({u, v});
        work.push_back(it->second);
      }
      return it->second;
    };
    touch(0, 0);
    std::vector<std::array<int, 3>> edges;  // u', label, v' in product
    std::set<std::array<int, 3>> seen;
    while (!work.empty()) {
      int p = work.front();
      work.pop_front();
      auto [u, v] = verts[p];
      for (int x = 0; x < a.alphabet_; ++x) {
        if (a.out_[u][x] >= 0 && b.out_[v][x] >= 0) {
          int q = touch(a.out_[u][x], b.out_[v][x]);
          std::array<int, 3> e{p, x, q};
          if (seen.insert(e).second) edges.push_back(e);
        }
        if (a.in_[u][x] >= 0 && b.in_[v][x] >= 0) {
          int q = touch(a.in_[u][x], b.in_[v][x]);
          std::array<int, 3> e{q, x, p};
          if (seen.insert(e).second) edges.push_back(e);
        }
      }
    }
    SubgroupGraph sg;
    sg.alphabet_ = a.alphabet_;
    sg.out_.assign(verts.size(), std::vector<int>(a.alphabet_, -1));
    sg.in_.assign(verts.size(), std::vector<int>(a.alphabet_, -1));
    for (auto& e : edges) {
      sg.out_[e[0]][e[1]] = e[2];
      sg.in_[e[2]][e[1]] = e[0];
    }
    sg.trim_core();
    sg.canonicalize();
    return sg;
  }

  struct MalnormalReport {
    bool malnormal = true;
    Word witness;            // g with  H ∩ gHg^-1  nontrivial and g outside H
    Word meet_element;       // a nontrivial element of that intersection
    int meet_rank = 0;
  };

  // Malnormality of this subgroup inside `ambient` (itself a subgroup of F_r
  // with a computed free basis).  Criterion: every non-diagonal component of
  // the fiber product of the rewritten graph with itself is a forest.
  MalnormalReport malnormal_in(const SubgroupGraph& ambient) const {
    std::vector<Word> rew;
    for (const Word& w : free_basis()) {
      if (!ambient.contains(w))
        throw NotASubgroup("generator not in ambient group: " + w.str());
      rew.push_back(ambient.rewrite_in_basis(w));
    }
    int amb_rank = ambient.rank();
    SubgroupGraph h = from_generators(rew, std::max(amb_rank, 1));

    // Full fiber product over all vertex pairs.
    int n = h.vertex_count();
    auto pid = [&](int u, int v) { return u * n + v; };
    std::vector<int> comp(n * n, -1);
    int ncomp = 0;
    std::vector<std::vector<int>> members;
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        if (comp[pid(u, v)] >= 0) continue;
        std::deque<int> work{pid(u, v)};
        comp[pid(u, v)] = ncomp;
        members.push_back({pid(u, v)});
        while (!work.empty()) {
          int p = work.front();
          work.pop_front();
          int pu = p / n, pv = p % n;
          for (int x = 0; x < h.alphabet_; ++x) {
            auto step = [&](int qu, int qv) {
              if (qu < 0 || qv < 0) return;
              int q = pid(qu, qv);
              if (comp[q] < 0) {
                comp[q] = ncomp;
                members.back().push_back(q);
                work.push_back(q);
              }
            };
            step(h.out_[pu][x], h.out_[pv][x]);
            step(h.in_[pu][x], h.in_[pv][x]);
          }
        }
        ++ncomp;
      }

    int diag = comp[pid(0, 0)];
    for (int c = 0; c < ncomp; ++c) {
      if (c == diag) continue;
      // Cycle rank of the component: E - V + 1 (connected).
      long e = 0;
      for (int p : members[c]) {
        int pu = p / n, pv = p % n;
        for (int x = 0; x < h.alphabet_; ++x)
          if (h.out_[pu][x] >= 0 && h.out_[pv][x] >= 0) ++e;
      }
      long r = e - static_cast<long>(members[c].size()) + 1;
      if (r < 1) continue;

      // Witness: g = path(u) path(v)^-1 for the first pair of the component.
      h.compute_tree();
      std::sort(members[c].begin(), members[c].end());
      for (int p : members[c]) {
        int u = p / n, v = p % n;
        Word g_local = h.path_[u] * h.path_[v].inverse();
        if (h.contains(g_local)) continue;  // defensive; not expected
        SubgroupGraph meet = intersect(h, h.conjugate(g_local));
        if (meet.rank() < 1) continue;  // defensive; not expected
        MalnormalReport rep;
        rep.malnormal = false;
        rep.witness = ambient.expand_from_basis(g_local);
        rep.meet_element = ambient.expand_from_basis(meet.free_basis().front());
        rep.meet_rank = meet.rank();
        return rep;
      }
    }
    return MalnormalReport{};
  }

  // Representatives of the K-cosets met by elements of this subgroup of basis
  // length <= bound, in (length, lex) order of the basis words.  K must be a
  // subgroup of this group.
  std::vector<Word> coset_neighbors(const SubgroupGraph& k, int bound) const {
    if (!contains_subgroup(k))
      throw NotASubgroup("coset_neighbors: second group is not a subgroup of the first");
    std::vector<Word> reps;        // expanded to F_r
    std::vector<Word> reps_local;  // over this group's basis
    std::vector<Word> layer{Word()};
    const std::vector<Word> basis = free_basis();
    for (int len = 0; len <= bound; ++len) {
      std::vector<Word> next;
      for (const Word& h : layer) {
        Word hf = h.substitute(basis);
        bool fresh = true;
        for (const Word& r : reps)
          if (k.contains(r.inverse() * hf)) {
            fresh = false;
            break;
          }
        if (fresh) {
          reps.push_back(hf);
          reps_local.push_back(h);
        }
        if (len == bound) continue;
        for (int x = 0; x < static_cast<int>(basis.size()); ++x)
          for (int e : {+1, -1}) {
            if (h.length() > 0) {
              const Letter& last = h.letters().back();
              if (last.gen == x && last.exp == -e) continue;  // keep reduced
            }
            Word w = h;
            w.push_reduce({x, e});
            next.push_back(w);
          }
      }
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      layer = std::move(next);
    }
    return reps;
  }

  std::string dot(const std::string& name = "stallings") const {
    std::ostringstream os;
    os << "digraph " << name << " {\n  rankdir=LR;\n";
    os << "  0 [shape=doublecircle];\n";
    for (size_t v = 1; v < out_.size(); ++v) os << "  " << v << " [shape=circle];\n";
    for (const auto& e : edges())
      os << "  " << e.u << " -> " << e.v << " [label=\""
         << static_cast<char>('a' + e.label) << "\"];\n";
    os << "}\n";
    return os.str();
  }

 private:
  SubgroupGraph() = default;

  // --- construction helpers -------------------------------------------------

  class Builder {
   public:
    explicit Builder(int alphabet) : alphabet_(alphabet) { new_vertex(); }

    int new_vertex() {
      parent_.push_back(parent_.size());
      adj_.emplace_back();
      return parent_.size() - 1;
    }

    void add_edge(int u, int label, int v) {
      adj_[u][{label, +1}].insert(v);
      adj_[v][{label, -1}].insert(u);
      dirty_.push_back(u);
      dirty_.push_back(v);
    }

    int find(int v) {
      while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
      return v;
    }

    void fold() {
      while (!dirty_.empty()) {
        int v = find(dirty_.front());
        dirty_.pop_front();
        bool again = true;
        while (again) {
          again = false;
          v = find(v);
          for (auto& [key, targets] : adj_[v]) {
            std::set<int> canon;
            for (int t : targets) canon.insert(find(t));
            targets = std::move(canon);
            if (targets.size() >= 2) {
              auto it = targets.begin();
              int a = *it++;
              int b = *it;
              merge(a, b);
              again = true;
              break;  // adjacency of v may have been rebuilt
            }
          }
        }
      }
    }

    void extract(std::vector<std::vector<int>>& out, std::vector<std::vector<int>>& in) {
      std::map<int, int> renum;
      for (size_t v = 0; v < parent_.size(); ++v)
        if (find(v) == static_cast<int>(v)) {
          int id = renum.size();
          renum[v] = id;
        }
      out.assign(renum.size(), std::vector<int>(alphabet_, -1));
      in.assign(renum.size(), std::vector<int>(alphabet_, -1));
      for (auto& [old_id, new_id] : renum)
        for (auto& [key, targets] : adj_[old_id])
          for (int t : targets) {
            int tt = renum.at(find(t));
            if (key.second > 0) {
              out[new_id][key.first] = tt;
              in[tt][key.first] = new_id;
            }
          }
      // Representative of the basepoint class must become vertex 0.
      int bp = renum.at(find(0));
      if (bp != 0) {
        for (auto& row : out)
          for (int& t : row) t = t == bp ? 0 : (t == 0 ? bp : t);
        for (auto& row : in)
          for (int& t : row) t = t == bp ? 0 : (t == 0 ? bp : t);
        std::swap(out[0], out[bp]);
        std::swap(in[0], in[bp]);
      }
    }

   private:
    void merge(int a, int b) {
      a = find(a);
      b = find(b);
      if (a == b) return;
      if (adj_[a].size() < adj_[b].size()) std::swap(a, b);
      parent_[b] = a;
      for (auto& [key, targets] : adj_[b])
        for (int t : targets) adj_[a][key].insert(t);
      adj_[b].clear();
      dirty_.push_back(a);
    }

    int alphabet_;
    std::vector<int> parent_;
    std::vector<std::map<std::pair<int, int>, std::set<int>>> adj_;
    std::deque<int> dirty_;
  };

  // Remove non-basepoint vertices of total degree <= 1, repeatedly.
  void trim_core() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int v = 1; v < static_cast<int>(out_.size()); ++v) {
        int deg = 0;
        for (int x = 0; x < alphabet_; ++x) {
          if (out_[v][x] >= 0) ++deg;
          if (in_[v][x] >= 0) ++deg;
        }
        if (deg <= 1) {
          for (int x = 0; x < alphabet_; ++x) {
            if (out_[v][x] >= 0) in_[out_[v][x]][x] = -1;
            if (in_[v][x] >= 0) out_[in_[v][x]][x] = -1;
          }
          erase_vertex(v);
          changed = true;
          break;
        }
      }
    }
  }

  void erase_vertex(int v) {
    int last = out_.size() - 1;
    if (v != last) {
      out_[v] = out_[last];
      in_[v] = in_[last];
      for (auto& row : out_)
        for (int& t : row)
          if (t == last) t = v;
      for (auto& row : in_)
        for (int& t : row)
          if (t == last) t = v;
    }
    out_.pop_back();
    in_.pop_back();
  }

  // Renumber vertices along the canonical traversal; all vertices are
  // reachable from the basepoint in the undirected sense.
  void canonicalize() {
    std::vector<int> order(out_.size(), -1);
    int next = 0;
    std::deque<int> work{0};
    order[0] = next++;
    while (!work.empty()) {
      int v = work.front();
      work.pop_front();
      for (int x = 0; x < alphabet_; ++x)
        for (int t : {out_[v][x], in_[v][x]})
          if (t >= 0 && order[t] < 0) {
            order[t] = next++;
            work.push_back(t);
          }
    }
    std::vector<std::vector<int>> nout(out_.size(), std::vector<int>(alphabet_, -1));
    std::vector<std::vector<int>> nin(in_.size(), std::vector<int>(alphabet_, -1));
    for (size_t v = 0; v < out_.size(); ++v)
      for (int x = 0; x < alphabet_; ++x) {
        if (out_[v][x] >= 0) nout[order[v]][x] = order[out_[v][x]];
        if (in_[v][x] >= 0) nin[order[v]][x] = order[in_[v][x]];
      }
    out_ = std::move(nout);
    in_ = std::move(nin);
    tree_done_ = false;
  }

  // Spanning tree bookkeeping for basis/rewriting (lazy, cached).
  void compute_tree() const {
    if (tree_done_) return;
    path_.assign(out_.size(), Word());
    std::vector<bool> seen(out_.size(), false);
    std::set<std::array<int, 3>> tree_edges;
    std::deque<int> work{0};
    seen[0] = true;
    while (!work.empty()) {
      int v = work.front();
      work.pop_front();
      for (int x = 0; x < alphabet_; ++x) {
        int t = out_[v][x];
        if (t >= 0 && !seen[t]) {
          seen[t] = true;
          path_[t] = path_[v];
          path_[t].push_reduce({x, +1});
          tree_edges.insert({v, x, t});
          work.push_back(t);
        }
        t = in_[v][x];
        if (t >= 0 && !seen[t]) {
          seen[t] = true;
          path_[t] = path_[v];
          path_[t].push_reduce({x, -1});
          tree_edges.insert({t, x, v});
          work.push_back(t);
        }
      }
    }
    nontree_.clear();
    for (const auto& e : edges())
      if (!tree_edges.count({e.u, e.label, e.v})) nontree_.push_back(e);
    tree_done_ = true;
  }

  int nontree_index(int u, int label, int v) const {
    for (size_t i = 0; i < nontree_.size(); ++i)
      if (nontree_[i].u == u && nontree_[i].label == label && nontree_[i].v == v)
        return static_cast<int>(i);
    return -1;
  }

  int alphabet_ = 1;
  std::vector<std::vector<int>> out_, in_;

  mutable bool tree_done_ = false;
  mutable std::vector<Word> path_;
  mutable std::vector<EdgeRec> nontree_;
};

}  // namespace rtreelab
