#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "scalar.hpp"

namespace rtreelab {

// A point of a metric tree: either a vertex, or an interior point of an edge
// given by the exact offset from the edge's u-endpoint.  Points are kept in
// normal form (offsets 0 and len become vertex points), so equality is
// representational.
struct TreePoint {
  int vertex = -1;
  int edge = -1;
  Scalar t;

  bool is_vertex() const { return vertex >= 0; }
  static TreePoint at_vertex(int v) {
    TreePoint p;
    p.vertex = v;
    return p;
  }
  friend bool operator==(const TreePoint& a, const TreePoint& b) {
    if (a.is_vertex() != b.is_vertex()) return false;
    if (a.is_vertex()) return a.vertex == b.vertex;
    return a.edge == b.edge && compare(a.t, b.t) == 0;
  }
  friend bool operator<(const TreePoint& a, const TreePoint& b) {
    if (a.is_vertex() != b.is_vertex()) return a.is_vertex();
    if (a.is_vertex()) return a.vertex < b.vertex;
    if (a.edge != b.edge) return a.edge < b.edge;
    return compare(a.t, b.t) < 0;
  }
  std::string str() const {
    if (is_vertex()) return "v" + std::to_string(vertex);
    return "e" + std::to_string(edge) + "@" + t.str();
  }
};

// Finite metric tree: connected acyclic graph with exact positive edge
// lengths.  Vertex pair distances and point distances are exact Scalars.
class MetricTree {
 public:
  struct Edge {
    int u, v;
    Scalar len;
  };

  static MetricTree make(int n_vertices, std::vector<Edge> edges) {
    MetricTree t;
    t.n_ = n_vertices;
    t.edges_ = std::move(edges);
    if (n_vertices < 1) throw InputError("tree needs at least one vertex");
    if (static_cast<int>(t.edges_.size()) != n_vertices - 1)
      throw InputError("tree must have exactly n-1 edges");
    std::vector<int> dsu(n_vertices);
    for (int i = 0; i < n_vertices; ++i) dsu[i] = i;
    auto find = [&](int x) {
      while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
      return x;
    };
    for (const Edge& e : t.edges_) {
      if (e.u < 0 || e.u >= n_vertices || e.v < 0 || e.v >= n_vertices || e.u == e.v)
        throw InputError("bad edge endpoints");
      if (e.len.sign() <= 0) throw InputError("edge lengths must be positive");
      int a = find(e.u), b = find(e.v);
      if (a == b) throw InputError("edges form a cycle");
      dsu[a] = b;
    }
    for (int i = 0; i < n_vertices; ++i)
      if (find(i) != find(0)) throw InputError("tree is not connected");
    t.adj_.assign(n_vertices, {});
    for (size_t i = 0; i < t.edges_.size(); ++i) {
      t.adj_[t.edges_[i].u].push_back(static_cast<int>(i));
      t.adj_[t.edges_[i].v].push_back(static_cast<int>(i));
    }
    return t;
  }

  int vertex_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_.at(e); }

  TreePoint point_on_edge(int e, const Scalar& t) const {
    const Edge& ed = edge(e);
    if (t.sign() < 0 || compare(t, ed.len) > 0)
      throw InputError("point offset outside edge");
    if (t.sign() == 0) return TreePoint::at_vertex(ed.u);
    if (compare(t, ed.len) == 0) return TreePoint::at_vertex(ed.v);
    TreePoint p;
    p.edge = e;
    p.t = t;
    return p;
  }

  Scalar vertex_distance(int u, int v) const {
    auto [par, dist] = search_from(u);
    (void)par;
    return dist[v];
  }

  // Edge path u -> v as (edge id, forward?) steps.
  std::vector<std::pair<int, bool>> edge_path(int u, int v) const {
    auto [par, dist] = search_from(u);
    (void)dist;
    std::vector<std::pair<int, bool>> rev;
    int cur = v;
    while (cur != u) {
      int e = par[cur];
      bool forward = edges_[e].v == cur;  // traversed u->v direction
      rev.push_back({e, forward});
      cur = forward ? edges_[e].u : edges_[e].v;
    }
    std::reverse(rev.begin(), rev.end());
    return rev;
  }

  Scalar distance(const TreePoint& p, const TreePoint& q) const {
    if (p == q) return Scalar();
    if (!p.is_vertex() && !q.is_vertex() && p.edge == q.edge) {
      Scalar d = p.t - q.t;
      return d.sign() < 0 ? -d : d;
    }
    std::optional<Scalar> best;
    for (auto& [x, ox] : anchors(p))
      for (auto& [y, oy] : anchors(q)) {
        Scalar d = ox + vertex_distance(x, y) + oy;
        if (!best || compare(d, *best) < 0) best = d;
      }
    return *best;
  }

  // Walk steps from p to q: travel on `edge` from offset `from` to offset
  // `to`, monotonically.
  struct Step {
    int edge;
    Scalar from, to;
  };
  std::vector<Step> path_steps(const TreePoint& p, const TreePoint& q) const {
    std::vector<Step> steps;
    if (p == q) return steps;
    if (!p.is_vertex() && !q.is_vertex() && p.edge == q.edge) {
      steps.push_back({p.edge, p.t, q.t});
      return steps;
    }
    // choose the anchor combination realizing the distance
    Scalar total = distance(p, q);
    for (auto& [x, ox] : anchors(p))
      for (auto& [y, oy] : anchors(q)) {
        if (compare(ox + vertex_distance(x, y) + oy, total) != 0) continue;
        if (!p.is_vertex()) {
          const Edge& e = edges_[p.edge];
          steps.push_back({p.edge, p.t, x == e.u ? Scalar() : e.len});
        }
        for (auto& [e, forward] : edge_path(x, y))
          steps.push_back({e, forward ? Scalar() : edges_[e].len,
                           forward ? edges_[e].len : Scalar()});
        if (!q.is_vertex()) {
          const Edge& e = edges_[q.edge];
          steps.push_back({q.edge, y == e.u ? Scalar() : e.len, q.t});
        }
        // drop degenerate steps
        std::vector<Step> clean;
        for (const Step& s : steps)
          if (compare(s.from, s.to) != 0) clean.push_back(s);
        return clean;
      }
    throw std::logic_error("path_steps: no anchor combination matched");
  }

  TreePoint point_along(const TreePoint& p, const TreePoint& q, const Scalar& s) const {
    if (s.sign() < 0) throw InputError("negative arc offset");
    if (s.sign() == 0) return p;
    Scalar remaining = s;
    for (const Step& st : path_steps(p, q)) {
      Scalar seg = st.to - st.from;
      bool fwd = seg.sign() > 0;
      Scalar len = fwd ? seg : -seg;
      if (compare(remaining, len) <= 0) {
        Scalar off = fwd ? st.from + remaining : st.from - remaining;
        return point_on_edge(st.edge, off);
      }
      remaining -= len;
    }
    if (remaining.sign() == 0) return q;
    throw InputError("arc offset beyond endpoint");
  }

  // The median (Fermat point) of x, y, z: the unique common point of the
  // three pairwise arcs; lies on [x,y] at distance (xy + xz - yz)/2 from x.
  TreePoint median(const TreePoint& x, const TreePoint& y, const TreePoint& z) const {
    Scalar s = (distance(x, y) + distance(x, z) - distance(y, z)) / Rational(2);
    return point_along(x, y, s);
  }

  bool on_arc(const TreePoint& p, const TreePoint& a, const TreePoint& b) const {
    return compare(distance(a, p) + distance(p, b), distance(a, b)) == 0;
  }

  // Intersection of arcs [a,b] and [c,d]: empty or an arc (maybe a point).
  std::optional<std::pair<TreePoint, TreePoint>> arc_intersection(
      const TreePoint& a, const TreePoint& b, const TreePoint& c,
      const TreePoint& d) const {
    TreePoint m1 = median(a, b, c), m2 = median(a, b, d);
    if (!on_arc(m1, c, d) || !on_arc(m2, c, d)) return std::nullopt;
    if (compare(distance(a, m1), distance(a, m2)) <= 0) return {{m1, m2}};
    return {{m2, m1}};
  }

  // Four-point condition over all vertex quadruples: of the three pairing
  // sums, the two largest must be equal.  Holds for every tree built through
  // make(); exposed as a diagnostic on the exact distance tables.
  bool check_four_point() const {
    for (int x = 0; x < n_; ++x)
      for (int y = x; y < n_; ++y)
        for (int z = y; z < n_; ++z)
          for (int w = z; w < n_; ++w) {
            std::vector<Scalar> s{vertex_distance(x, y) + vertex_distance(z, w),
                                  vertex_distance(x, z) + vertex_distance(y, w),
                                  vertex_distance(x, w) + vertex_distance(y, z)};
            std::sort(s.begin(), s.end(), ScalarLess{});
            if (compare(s[1], s[2]) != 0) return false;
          }
    return true;
  }

  std::string dot(const std::string& name = "tree") const {
    std::ostringstream os;
    os << "graph " << name << " {\n";
    for (int v = 0; v < n_; ++v) os << "  " << v << ";\n";
    for (const Edge& e : edges_)
      os << "  " << e.u << " -- " << e.v << " [label=\"" << e.len.str() << "\"];\n";
    os << "}\n";
    return os.str();
  }

 private:
  std::vector<std::pair<int, Scalar>> anchors(const TreePoint& p) const {
    if (p.is_vertex()) return {{p.vertex, Scalar()}};
    const Edge& e = edges_[p.edge];
    return {{e.u, p.t}, {e.v, e.len - p.t}};
  }

  std::pair<std::vector<int>, std::vector<Scalar>> search_from(int u) const {
    std::vector<int> par(n_, -1);
    std::vector<Scalar> dist(n_);
    std::vector<bool> seen(n_, false);
    std::deque<int> work{u};
    seen[u] = true;
    while (!work.empty()) {
      int v = work.front();
      work.pop_front();
      for (int ei : adj_[v]) {
        const Edge& e = edges_[ei];
        int w = e.u == v ? e.v : e.u;
        if (!seen[w]) {
          seen[w] = true;
          par[w] = ei;
          dist[w] = dist[v] + e.len;
          work.push_back(w);
        }
      }
    }
    return {par, dist};
  }

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
};

// ---------------------------------------------------------------------------
// Subtrees and transverse coverings
// ---------------------------------------------------------------------------

struct TreeSegment {
  int edge;
  Scalar lo, hi;  // 0 <= lo <= hi <= len; lo == hi is a point
};

// A closed connected nonempty subset of the tree: a union of closed edge
// segments plus explicitly listed vertices (for isolated-vertex members).
struct Subtree {
  std::vector<TreeSegment> segments;
  std::vector<int> vertices;

  bool contains_vertex(const MetricTree& t, int v) const {
    for (int w : vertices)
      if (w == v) return true;
    for (const TreeSegment& s : segments) {
      const auto& e = t.edge(s.edge);
      if (e.u == v && s.lo.sign() == 0) return true;
      if (e.v == v && compare(s.hi, e.len) == 0) return true;
    }
    return false;
  }

  bool contains(const MetricTree& t, const TreePoint& p) const {
    if (p.is_vertex()) return contains_vertex(t, p.vertex);
    for (const TreeSegment& s : segments)
      if (s.edge == p.edge && compare(s.lo, p.t) <= 0 && compare(p.t, s.hi) <= 0)
        return true;
    return false;
  }
};

struct SubtreeFamily {
  MetricTree tree;
  std::vector<Subtree> members;
};

struct TransverseReport {
  bool ok = true;
  std::string diagnostics;  // first violation, human-readable
  // point and the (sorted) pair of members meeting there, for every pair of
  // members with nonempty intersection
  std::vector<std::tuple<int, int, TreePoint>> meets;
};

inline TransverseReport check_transverse_covering(const SubtreeFamily& fam) {
  const MetricTree& t = fam.tree;
  TransverseReport rep;
  auto fail = [&](const std::string& msg) {
    rep.ok = false;
    rep.diagnostics = msg;
    return rep;
  };

  // 1. members are valid nonempty closed connected subtrees
  for (size_t m = 0; m < fam.members.size(); ++m) {
    const Subtree& sub = fam.members[m];
    if (sub.segments.empty() && sub.vertices.empty())
      return fail("member " + std::to_string(m) + " is empty");
    for (const TreeSegment& s : sub.segments) {
      if (s.edge < 0 || s.edge >= static_cast<int>(t.edges().size()))
        return fail("member " + std::to_string(m) + " has a segment on a bad edge");
      if (s.lo.sign() < 0 || compare(s.lo, s.hi) > 0 ||
          compare(s.hi, t.edge(s.edge).len) > 0)
        return fail("member " + std::to_string(m) + " has a bad segment on edge " +
                    std::to_string(s.edge));
    }
    for (int v : sub.vertices)
      if (v < 0 || v >= t.vertex_count())
        return fail("member " + std::to_string(m) + " lists a bad vertex");
    // connectivity of the atoms
    struct Atom {
      bool is_vertex;
      int vertex;
      TreeSegment seg;
    };
    std::vector<Atom> atoms;
    for (const TreeSegment& s : sub.segments) atoms.push_back({false, -1, s});
    for (int v : sub.vertices) atoms.push_back({true, v, {}});
    auto touched = [&](const TreeSegment& s) {
      std::set<int> vs;
      if (s.lo.sign() == 0) vs.insert(t.edge(s.edge).u);
      if (compare(s.hi, t.edge(s.edge).len) == 0) vs.insert(t.edge(s.edge).v);
      return vs;
    };
    auto adjacent = [&](const Atom& a, const Atom& b) {
      if (a.is_vertex && b.is_vertex) return a.vertex == b.vertex;
      if (a.is_vertex) return touched(b.seg).count(a.vertex) > 0;
      if (b.is_vertex) return touched(a.seg).count(b.vertex) > 0;
      if (a.seg.edge == b.seg.edge) {
        const Scalar lo = compare(a.seg.lo, b.seg.lo) >= 0 ? a.seg.lo : b.seg.lo;
        const Scalar hi = compare(a.seg.hi, b.seg.hi) <= 0 ? a.seg.hi : b.seg.hi;
        return compare(lo, hi) <= 0;
      }
      for (int v : touched(a.seg))
        if (touched(b.seg).count(v)) return true;
      return false;
    };
    std::vector<int> dsu(atoms.size());
    for (size_t i = 0; i < atoms.size(); ++i) dsu[i] = static_cast<int>(i);
    auto find = [&](int x) {
      while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
      return x;
    };
    for (size_t i = 0; i < atoms.size(); ++i)
      for (size_t j = i + 1; j < atoms.size(); ++j)
        if (adjacent(atoms[i], atoms[j])) dsu[find(i)] = find(j);
    for (size_t i = 0; i < atoms.size(); ++i)
      if (find(i) != find(0))
        return fail("member " + std::to_string(m) + " is not connected");
  }

  // 2. the members cover the tree
  for (size_t e = 0; e < t.edges().size(); ++e) {
    std::vector<std::pair<Scalar, Scalar>> ivs;
    for (const Subtree& sub : fam.members)
      for (const TreeSegment& s : sub.segments)
        if (s.edge == static_cast<int>(e)) ivs.push_back({s.lo, s.hi});
    std::sort(ivs.begin(), ivs.end(), [](const auto& a, const auto& b) {
      int c = compare(a.first, b.first);
      if (c != 0) return c < 0;
      return compare(a.second, b.second) < 0;
    });
    Scalar cur;  // covered prefix [0, cur]
    for (const auto& [lo, hi] : ivs) {
      if (compare(lo, cur) > 0) break;
      if (compare(hi, cur) > 0) cur = hi;
    }
    if (compare(cur, t.edge(e).len) < 0)
      return fail("edge " + std::to_string(e) + " is not covered beyond offset " +
                  cur.str());
  }
  for (int v = 0; v < t.vertex_count(); ++v) {
    bool covered = false;
    for (const Subtree& sub : fam.members) covered |= sub.contains_vertex(t, v);
    if (!covered) return fail("vertex " + std::to_string(v) + " is not covered");
  }

  // 3. pairwise intersections contain at most one point
  for (size_t i = 0; i < fam.members.size(); ++i)
    for (size_t j = i + 1; j < fam.members.size(); ++j) {
      std::set<TreePoint> points;
      for (const TreeSegment& si : fam.members[i].segments)
        for (const TreeSegment& sj : fam.members[j].segments) {
          if (si.edge != sj.edge) continue;
          const Scalar lo = compare(si.lo, sj.lo) >= 0 ? si.lo : sj.lo;
          const Scalar hi = compare(si.hi, sj.hi) <= 0 ? si.hi : sj.hi;
          int c = compare(lo, hi);
          if (c > 0) continue;
          if (c < 0)
            return fail("members " + std::to_string(i) + " and " + std::to_string(j) +
                        " overlap on edge " + std::to_string(si.edge) + " from " +
                        lo.str() + " to " + hi.str());
          points.insert(t.point_on_edge(si.edge, lo));
        }
      for (int v = 0; v < t.vertex_count(); ++v)
        if (fam.members[i].contains_vertex(t, v) &&
            fam.members[j].contains_vertex(t, v))
          points.insert(TreePoint::at_vertex(v));
      if (points.size() > 1)
        return fail("members " + std::to_string(i) + " and " + std::to_string(j) +
                    " meet in more than one point (" + points.begin()->str() +
                    " and " + std::next(points.begin())->str() + ")");
      if (points.size() == 1)
        rep.meets.push_back({static_cast<int>(i), static_cast<int>(j),
                             *points.begin()});
    }
  return rep;
}

// ---------------------------------------------------------------------------
// Skeleton of a transverse covering
// ---------------------------------------------------------------------------

// Bipartite graph: V0 = points lying in at least two members, V1 = members,
// with an edge (x, Y) whenever the point x lies in the member Y.
struct Skeleton {
  std::vector<TreePoint> v0;
  int member_count = 0;
  std::vector<std::pair<int, int>> edges;  // (index into v0, member index)

  bool is_tree() const {
    int v = static_cast<int>(v0.size()) + member_count;
    if (static_cast<int>(edges.size()) != v - 1) return false;
    std::vector<int> dsu(v);
    for (int i = 0; i < v; ++i) dsu[i] = i;
    auto find = [&](int x) {
      while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
      return x;
    };
    for (auto& [x, y] : edges) {
      int a = find(x), b = find(static_cast<int>(v0.size()) + y);
      if (a == b) return false;
      dsu[a] = b;
    }
    for (int i = 1; i < v; ++i)
      if (find(i) != find(0)) return false;
    return true;
  }

  std::string dot() const {
    std::ostringstream os;
    os << "graph skeleton {\n";
    for (size_t i = 0; i < v0.size(); ++i)
      os << "  p" << i << " [shape=point, xlabel=\"" << v0[i].str() << "\"];\n";
    for (int m = 0; m < member_count; ++m)
      os << "  m" << m << " [shape=box, label=\"Y" << m << "\"];\n";
    for (auto& [x, y] : edges) os << "  p" << x << " -- m" << y << ";\n";
    os << "}\n";
    return os.str();
  }
};

inline Skeleton skeleton(const SubtreeFamily& fam) {
  TransverseReport rep = check_transverse_covering(fam);
  if (!rep.ok) throw NotTransverse(rep.diagnostics);
  Skeleton sk;
  sk.member_count = static_cast<int>(fam.members.size());
  std::set<TreePoint> pts;
  for (auto& [i, j, p] : rep.meets) pts.insert(p);
  sk.v0.assign(pts.begin(), pts.end());
  for (size_t x = 0; x < sk.v0.size(); ++x)
    for (int m = 0; m < sk.member_count; ++m)
      if (fam.members[m].contains(fam.tree, sk.v0[x]))
        sk.edges.push_back({static_cast<int>(x), m});
  return sk;
}

// ---------------------------------------------------------------------------
// Collapse of a transverse family
// ---------------------------------------------------------------------------

// Common refinement: the host tree subdivided at every member boundary point,
// so that each elementary edge piece lies in exactly one member.
struct Refinement {
  MetricTree refined;
  std::vector<std::vector<Scalar>> cuts;    // per host edge, interior, sorted
  std::vector<std::vector<int>> pieces;     // per host edge, refined edge ids
  std::vector<int> piece_owner;             // per refined edge, member index

  // locate a host point in the refinement
  TreePoint locate(const MetricTree& host, const TreePoint& p) const {
    (void)host;
    if (p.is_vertex()) return p;  // host vertices keep their ids
    const auto& cs = cuts[p.edge];
    Scalar base;
    size_t k = 0;
    while (k < cs.size() && compare(cs[k], p.t) < 0) base = cs[k++];
    if (k < cs.size() && compare(cs[k], p.t) == 0)
      return TreePoint::at_vertex(refined.edge(pieces[p.edge][k]).v);
    return refined.point_on_edge(pieces[p.edge][k], p.t - base);
  }
};

struct CollapseResult {
  MetricTree target;
  Refinement refinement;
  std::vector<int> vertex_image;  // refined vertex -> target vertex
  std::vector<int> piece_image;   // refined edge -> target edge, or -1 if killed
  bool aligned = false;           // every target-vertex preimage is connected
  std::string alignment_note;

  TreePoint map_point(const MetricTree& host, const TreePoint& p) const {
    TreePoint r = refinement.locate(host, p);
    if (r.is_vertex()) return TreePoint::at_vertex(vertex_image[r.vertex]);
    int e = piece_image[r.edge];
    if (e < 0)
      return TreePoint::at_vertex(vertex_image[refinement.refined.edge(r.edge).u]);
    return target.point_on_edge(e, r.t);  // surviving pieces keep orientation
  }
};

inline Refinement refine_at_member_boundaries(const SubtreeFamily& fam) {
  const MetricTree& t = fam.tree;
  Refinement ref;
  ref.cuts.assign(t.edges().size(), {});
  for (size_t e = 0; e < t.edges().size(); ++e) {
    std::set<Scalar, ScalarLess> cs;
    for (const Subtree& sub : fam.members)
      for (const TreeSegment& s : sub.segments) {
        if (s.edge != static_cast<int>(e)) continue;
        for (const Scalar& x : {s.lo, s.hi})
          if (x.sign() > 0 && compare(x, t.edge(e).len) < 0) cs.insert(x);
      }
    ref.cuts[e].assign(cs.begin(), cs.end());
  }
  int next_vertex = t.vertex_count();
  std::vector<MetricTree::Edge> redges;
  ref.pieces.assign(t.edges().size(), {});
  for (size_t e = 0; e < t.edges().size(); ++e) {
    int prev = t.edge(e).u;
    Scalar base;
    for (const Scalar& c : ref.cuts[e]) {
      int nv = next_vertex++;
      ref.pieces[e].push_back(static_cast<int>(redges.size()));
      redges.push_back({prev, nv, c - base});
      prev = nv;
      base = c;
    }
    ref.pieces[e].push_back(static_cast<int>(redges.size()));
    redges.push_back({prev, t.edge(e).v, t.edge(e).len - base});
  }
  ref.refined = MetricTree::make(next_vertex, std::move(redges));

  // owner member of each piece (unique interior membership)
  ref.piece_owner.assign(ref.refined.edges().size(), -1);
  for (size_t e = 0; e < t.edges().size(); ++e) {
    Scalar base;
    for (size_t k = 0; k < ref.pieces[e].size(); ++k) {
      Scalar lo = base;
      Scalar hi = k < ref.cuts[e].size() ? ref.cuts[e][k] : t.edge(e).len;
      base = hi;
      int owner = -1;
      for (size_t m = 0; m < fam.members.size(); ++m)
        for (const TreeSegment& s : fam.members[m].segments)
          if (s.edge == static_cast<int>(e) && compare(s.lo, lo) <= 0 &&
              compare(hi, s.hi) <= 0) {
            if (owner >= 0 && owner != static_cast<int>(m))
              throw NotTransverse("piece owned by two members");
            owner = static_cast<int>(m);
          }
      if (owner < 0) throw NotTransverse("piece not covered by any member");
      ref.piece_owner[ref.pieces[e][k]] = owner;
    }
  }
  return ref;
}

inline CollapseResult collapse(const SubtreeFamily& fam, const std::vector<int>& kill) {
  TransverseReport rep = check_transverse_covering(fam);
  if (!rep.ok) throw NotTransverse(rep.diagnostics);
  std::vector<bool> killed(fam.members.size(), false);
  for (int k : kill) {
    if (k < 0 || k >= static_cast<int>(fam.members.size()))
      throw InputError("kill index out of range");
    killed[k] = true;
  }

  CollapseResult res;
  res.refinement = refine_at_member_boundaries(fam);
  const MetricTree& rt = res.refinement.refined;

  std::vector<int> dsu(rt.vertex_count());
  for (size_t i = 0; i < dsu.size(); ++i) dsu[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
    return x;
  };
  for (size_t e = 0; e < rt.edges().size(); ++e)
    if (killed[res.refinement.piece_owner[e]])
      dsu[find(rt.edge(e).u)] = find(rt.edge(e).v);

  // target vertex numbering: classes ordered by smallest refined vertex id
  std::map<int, int> class_id;
  res.vertex_image.assign(rt.vertex_count(), -1);
  for (int v = 0; v < rt.vertex_count(); ++v) {
    int c = find(v);
    if (!class_id.count(c)) {
      int id = static_cast<int>(class_id.size());
      class_id[c] = id;
    }
  }
  // reorder classes by minimal member vertex for determinism
  {
    std::map<int, int> min_vertex;
    for (int v = 0; v < rt.vertex_count(); ++v) {
      int c = find(v);
      if (!min_vertex.count(c)) min_vertex[c] = v;  // v ascending
    }
    std::vector<std::pair<int, int>> order(min_vertex.begin(), min_vertex.end());
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    class_id.clear();
    for (auto& [c, mv] : order) {
      int id = static_cast<int>(class_id.size());
      class_id[c] = id;
    }
  }
  for (int v = 0; v < rt.vertex_count(); ++v) res.vertex_image[v] = class_id[find(v)];

  std::vector<MetricTree::Edge> tedges;
  res.piece_image.assign(rt.edges().size(), -1);
  for (size_t e = 0; e < rt.edges().size(); ++e) {
    if (killed[res.refinement.piece_owner[e]]) continue;
    res.piece_image[e] = static_cast<int>(tedges.size());
    tedges.push_back({res.vertex_image[rt.edge(e).u], res.vertex_image[rt.edge(e).v],
                      rt.edge(e).len});
  }
  res.target = MetricTree::make(static_cast<int>(class_id.size()), std::move(tedges));

  // alignment: the preimage of every target vertex must be connected in the
  // refined source (killed pieces are the only identifications)
  res.aligned = true;
  for (auto& [cls, id] : class_id) {
    std::vector<int> verts;
    for (int v = 0; v < rt.vertex_count(); ++v)
      if (res.vertex_image[v] == id) verts.push_back(v);
    if (verts.size() <= 1) continue;
    std::map<int, int> local;
    for (size_t i = 0; i < verts.size(); ++i) local[verts[i]] = static_cast<int>(i);
    std::vector<int> d2(verts.size());
    for (size_t i = 0; i < verts.size(); ++i) d2[i] = static_cast<int>(i);
    auto find2 = [&](int x) {
      while (d2[x] != x) x = d2[x] = d2[d2[x]];
      return x;
    };
    for (size_t e = 0; e < rt.edges().size(); ++e) {
      if (res.piece_image[e] >= 0) continue;
      auto iu = local.find(rt.edge(e).u), iv = local.find(rt.edge(e).v);
      if (iu != local.end() && iv != local.end())
        d2[find2(iu->second)] = find2(iv->second);
    }
    for (size_t i = 1; i < verts.size(); ++i)
      if (find2(static_cast<int>(i)) != find2(0)) {
        res.aligned = false;
        res.alignment_note =
            "preimage of target vertex " + std::to_string(id) + " is disconnected";
      }
  }
  if (res.aligned)
    res.alignment_note =
        "all target-vertex preimages connected; surviving pieces map isometrically";
  return res;
}

// ---------------------------------------------------------------------------
// Chain witness for indecomposability of an arc cover
// ---------------------------------------------------------------------------

struct Arc {
  TreePoint a, b;
};

struct ChainWitness {
  bool found = false;
  std::vector<int> chain;  // indices into the supplied translates
  std::string note;
};

// Search for a finite chain among `translates` covering the arc J such that
// consecutive elements overlap in a non-degenerate arc.  States advance a
// covered prefix [0, x] of J, moving only to translates that keep coverage
// contiguous and overlap the previous arc in more than a point.
inline ChainWitness indecomposability_witness(const MetricTree& t, const Arc& J,
                                              const std::vector<Arc>& translates,
                                              int depth = 64) {
  ChainWitness w;
  const Scalar total = t.distance(J.a, J.b);
  if (total.sign() <= 0) throw InputError("witness arc must be non-degenerate");

  struct Trace {
    Scalar l, r;
    bool meets = false;
  };
  std::vector<Trace> tr(translates.size());
  for (size_t i = 0; i < translates.size(); ++i) {
    auto iv = t.arc_intersection(J.a, J.b, translates[i].a, translates[i].b);
    if (!iv) continue;
    tr[i].meets = true;
    tr[i].l = t.distance(J.a, iv->first);
    tr[i].r = t.distance(J.a, iv->second);
  }
  auto host_overlap_positive = [&](int i, int j) {
    auto iv = t.arc_intersection(translates[i].a, translates[i].b, translates[j].a,
                                 translates[j].b);
    return iv && t.distance(iv->first, iv->second).sign() > 0;
  };

  // BFS over (translate, covered prefix) states
  struct State {
    int last;
    Scalar x;
    int parent;  // index into the state list
  };
  std::vector<State> states;
  std::map<std::pair<int, Scalar>, bool, bool (*)(const std::pair<int, Scalar>&,
                                                  const std::pair<int, Scalar>&)>
      seen([](const std::pair<int, Scalar>& a, const std::pair<int, Scalar>& b) {
        if (a.first != b.first) return a.first < b.first;
        return compare(a.second, b.second) < 0;
      });
  std::deque<std::pair<int, int>> work;  // (state index, depth)
  for (size_t i = 0; i < translates.size(); ++i) {
    if (!tr[i].meets || tr[i].l.sign() != 0 || tr[i].r.sign() <= 0) continue;
    states.push_back({static_cast<int>(i), tr[i].r, -1});
    seen[{static_cast<int>(i), tr[i].r}] = true;
    work.push_back({static_cast<int>(states.size()) - 1, 1});
  }
  int accept = -1;
  for (size_t s = 0; s < states.size() && accept < 0; ++s)
    if (compare(states[s].x, total) >= 0) accept = static_cast<int>(s);
  while (accept < 0 && !work.empty()) {
    auto [si, d] = work.front();
    work.pop_front();
    if (d >= depth) continue;
    for (size_t j = 0; j < translates.size(); ++j) {
      if (!tr[j].meets) continue;
      const Scalar x = states[si].x;
      if (compare(tr[j].l, x) > 0 || compare(tr[j].r, x) <= 0) continue;
      if (!host_overlap_positive(states[si].last, static_cast<int>(j))) continue;
      std::pair<int, Scalar> key{static_cast<int>(j), tr[j].r};
      if (seen.count(key)) continue;
      seen[key] = true;
      states.push_back({static_cast<int>(j), tr[j].r, si});
      if (compare(tr[j].r, total) >= 0) {
        accept = static_cast<int>(states.size()) - 1;
        break;
      }
      work.push_back({static_cast<int>(states.size()) - 1, d + 1});
    }
  }
  if (accept < 0) {
    w.note = "no chain within the supplied translates (depth " +
             std::to_string(depth) + ")";
    return w;
  }
  for (int s = accept; s >= 0; s = states[s].parent) w.chain.push_back(states[s].last);
  std::reverse(w.chain.begin(), w.chain.end());
  // verify: consecutive overlaps are non-degenerate arcs (exact check)
  for (size_t k = 0; k + 1 < w.chain.size(); ++k)
    if (!host_overlap_positive(w.chain[k], w.chain[k + 1]))
      throw std::logic_error("chain witness failed its own overlap check");
  w.found = true;
  w.note = "chain of " + std::to_string(w.chain.size()) + " translates covers the arc";
  return w;
}

}  // namespace rtreelab
