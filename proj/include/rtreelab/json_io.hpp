#pragma once

// JSON wire formats.  Uses the vendored nlohmann/json single header; object
// keys serialize in sorted order, which keeps every report byte-deterministic.

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "gog.hpp"
#include "isosys.hpp"
#include "mtree.hpp"
#include "scalar.hpp"
#include "subgroup_graph.hpp"
#include "word.hpp"

namespace rtreelab {

using json = nlohmann::ordered_json;

// ---- Scalar ---------------------------------------------------------------
// Rational scalars serialize as the bare string "num/den"; scalars over a
// larger basis as {"basis": [...tags...], "coeffs": ["num/den", ...]}.

inline json scalar_to_json(const Scalar& s) {
  if (s.basis()->rank() == 1) return rational_str(s.coeffs()[0]);
  json j;
  j["basis"] = s.basis()->tags();
  std::vector<std::string> coeffs;
  for (const Rational& q : s.coeffs()) coeffs.push_back(rational_str(q));
  j["coeffs"] = coeffs;
  return j;
}

inline Scalar scalar_from_json(const json& j, BasisPtr basis = nullptr) {
  if (j.is_string()) {
    Rational q = parse_rational(j.get<std::string>());
    if (!basis) return Scalar(q);
    std::vector<Rational> c(basis->rank(), Rational(0));
    c[0] = q;
    return Scalar::from_coeffs(std::move(c), std::move(basis));
  }
  if (j.is_array()) {  // coefficient list over the file's declared basis
    if (!basis)
      throw InputError("scalar coefficient list needs a top-level basis");
    std::vector<Rational> c;
    for (const auto& e : j) c.push_back(parse_rational(e.get<std::string>()));
    return Scalar::from_coeffs(std::move(c), std::move(basis));
  }
  if (!j.is_object() || !j.contains("basis") || !j.contains("coeffs"))
    throw InputError("scalar json must be \"num/den\" or {basis, coeffs}");
  BasisPtr b = ScalarBasis::from_tags(j.at("basis").get<std::vector<std::string>>());
  std::vector<Rational> c;
  for (const auto& e : j.at("coeffs")) c.push_back(parse_rational(e.get<std::string>()));
  return Scalar::from_coeffs(std::move(c), std::move(b));
}

namespace detail {

// optional top-level {"basis": [...tags...]} shared by the file's scalars
inline BasisPtr file_basis(const json& j) {
  if (j.is_object() && j.contains("basis"))
    return ScalarBasis::from_tags(
        j.at("basis").get<std::vector<std::string>>());
  return nullptr;
}

inline const json& need(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key))
    throw InputError(std::string(what) + ": missing key \"" + key + "\"");
  return j.at(key);
}

}  // namespace detail

// ---- System of partial isometries ------------------------------------------
// {"basis": [...], "D": [["0","1"], ...],
//  "maps": [{"dom": ["0","3/5"], "ran": ["2/5","1"], "eps": 1, "t": "2/5",
//            "dom_comp": 0, "ran_comp": 0}]}
// with comp fields defaulting to 0.

inline IsoSystem isosys_from_json(const json& j) {
  BasisPtr basis = detail::file_basis(j);
  std::vector<std::pair<Scalar, Scalar>> comps;
  for (const json& c : detail::need(j, "D", "system")) {
    if (!c.is_array() || c.size() != 2)
      throw InputError("system: each component is a pair [lo, hi]");
    comps.emplace_back(scalar_from_json(c[0], basis),
                       scalar_from_json(c[1], basis));
  }
  std::vector<PartialIso> maps;
  for (const json& m : detail::need(j, "maps", "system")) {
    const json& dom = detail::need(m, "dom", "map");
    const json& ran = detail::need(m, "ran", "map");
    if (!dom.is_array() || dom.size() != 2 || !ran.is_array() || ran.size() != 2)
      throw InputError("map: dom and ran are pairs [lo, hi]");
    PartialIso f;
    f.dom_lo = scalar_from_json(dom[0], basis);
    f.dom_hi = scalar_from_json(dom[1], basis);
    f.ran_lo = scalar_from_json(ran[0], basis);
    f.ran_hi = scalar_from_json(ran[1], basis);
    f.eps = detail::need(m, "eps", "map").get<int>();
    f.t = scalar_from_json(detail::need(m, "t", "map"), basis);
    f.dom_comp = m.value("dom_comp", 0);
    f.ran_comp = m.value("ran_comp", 0);
    maps.push_back(std::move(f));
  }
  return IsoSystem::make(std::move(comps), std::move(maps));
}

inline json isosys_to_json(const IsoSystem& s) {
  json j;
  json comps = json::array();
  for (const auto& [lo, hi] : s.comps())
    comps.push_back({scalar_to_json(lo), scalar_to_json(hi)});
  j["D"] = std::move(comps);
  json maps = json::array();
  for (const PartialIso& f : s.maps()) {
    json m;
    m["dom"] = {scalar_to_json(f.dom_lo), scalar_to_json(f.dom_hi)};
    m["ran"] = {scalar_to_json(f.ran_lo), scalar_to_json(f.ran_hi)};
    m["eps"] = f.eps;
    m["t"] = scalar_to_json(f.t);
    if (f.dom_comp != 0) m["dom_comp"] = f.dom_comp;
    if (f.ran_comp != 0) m["ran_comp"] = f.ran_comp;
    maps.push_back(std::move(m));
  }
  j["maps"] = std::move(maps);
  return j;
}

// ---- Metric trees and subtree families --------------------------------------
// {"basis": [...], "vertices": 4, "edges": [{"u":0,"v":1,"len":"1"}],
//  "families": [{"segments": [{"edge":0,"lo":"0","hi":"1/2"}],
//                "vertices": [3]}]}
// "families" is optional (a bare tree otherwise).

inline SubtreeFamily tree_from_json(const json& j) {
  BasisPtr basis = detail::file_basis(j);
  int n = detail::need(j, "vertices", "tree").get<int>();
  std::vector<MetricTree::Edge> edges;
  for (const json& e : detail::need(j, "edges", "tree"))
    edges.push_back({detail::need(e, "u", "edge").get<int>(),
                     detail::need(e, "v", "edge").get<int>(),
                     scalar_from_json(detail::need(e, "len", "edge"), basis)});
  SubtreeFamily fam{MetricTree::make(n, std::move(edges)), {}};
  if (!j.contains("families")) return fam;
  for (const json& m : j.at("families")) {
    Subtree sub;
    if (m.contains("segments"))
      for (const json& s : m.at("segments"))
        sub.segments.push_back(
            {detail::need(s, "edge", "segment").get<int>(),
             scalar_from_json(detail::need(s, "lo", "segment"), basis),
             scalar_from_json(detail::need(s, "hi", "segment"), basis)});
    if (m.contains("vertices"))
      sub.vertices = m.at("vertices").get<std::vector<int>>();
    fam.members.push_back(std::move(sub));
  }
  return fam;
}

inline json tree_to_json(const SubtreeFamily& fam) {
  json j;
  j["vertices"] = fam.tree.vertex_count();
  json edges = json::array();
  for (const auto& ed : fam.tree.edges())
    edges.push_back({{"u", ed.u}, {"v", ed.v}, {"len", scalar_to_json(ed.len)}});
  j["edges"] = std::move(edges);
  if (fam.members.empty()) return j;
  json fams = json::array();
  for (const Subtree& m : fam.members) {
    json f;
    json segs = json::array();
    for (const TreeSegment& s : m.segments)
      segs.push_back({{"edge", s.edge},
                      {"lo", scalar_to_json(s.lo)},
                      {"hi", scalar_to_json(s.hi)}});
    f["segments"] = std::move(segs);
    if (!m.vertices.empty()) f["vertices"] = m.vertices;
    fams.push_back(std::move(f));
  }
  j["families"] = std::move(fams);
  return j;
}

// ---- Graphs of groups -------------------------------------------------------
// {"alphabet": 3, "vertex_groups": [["a","b"],["a","c"]],
//  "edges": [{"u":0,"v":1,"group":["a"]}]}
// with subgroups given by generator words.

namespace detail {

inline SubgroupGraph subgroup_from_json(const json& j, int alphabet) {
  std::vector<Word> gens;
  for (const json& g : j) gens.push_back(Word::parse(g.get<std::string>()));
  return SubgroupGraph::from_generators(gens, alphabet);
}

inline json subgroup_to_json(const SubgroupGraph& g) {
  json out = json::array();
  for (const Word& w : g.free_basis()) out.push_back(w.str());
  return out;
}

}  // namespace detail

inline GraphOfGroups gog_from_json(const json& j) {
  int alphabet = detail::need(j, "alphabet", "graph of groups").get<int>();
  std::vector<SubgroupGraph> vgroups;
  for (const json& vg : detail::need(j, "vertex_groups", "graph of groups"))
    vgroups.push_back(detail::subgroup_from_json(vg, alphabet));
  std::vector<GraphOfGroups::Edge> edges;
  for (const json& e : detail::need(j, "edges", "graph of groups"))
    edges.push_back(
        {detail::need(e, "u", "edge").get<int>(),
         detail::need(e, "v", "edge").get<int>(),
         detail::subgroup_from_json(detail::need(e, "group", "edge"),
                                    alphabet)});
  return GraphOfGroups::make(std::move(vgroups), std::move(edges));
}

inline json gog_to_json(const GraphOfGroups& g) {
  json j;
  j["alphabet"] = g.alphabet();
  json vgs = json::array();
  for (int v = 0; v < g.vertex_count(); ++v)
    vgs.push_back(detail::subgroup_to_json(g.vertex_group(v)));
  j["vertex_groups"] = std::move(vgs);
  json edges = json::array();
  for (int e = 0; e < g.edge_count(); ++e)
    edges.push_back({{"u", g.edge(e).u},
                     {"v", g.edge(e).v},
                     {"group", detail::subgroup_to_json(g.edge(e).group)}});
  j["edges"] = std::move(edges);
  return j;
}

// ---- Morphism specs ---------------------------------------------------------
// {"source": {...}, "target": {...}, "vmap": [0,0], "emap": [[], [1]],
//  "vimages": [["a","b"], ...], "killed": [[], ["b"]]}
// vimages and killed are optional; emap entries are signed 1-based target
// edge indices.  The core (vmap/emap/vimages/killed) may also be read
// against externally supplied graphs, for pipeline files.

inline MorphismSpec morphism_core_from_json(const json& j,
                                            const GraphOfGroups& source,
                                            const GraphOfGroups& target) {
  std::vector<int> vmap =
      detail::need(j, "vmap", "morphism").get<std::vector<int>>();
  std::vector<std::vector<int>> emap =
      detail::need(j, "emap", "morphism").get<std::vector<std::vector<int>>>();
  MorphismSpec spec =
      MorphismSpec::identity_images(source, target, vmap, emap);
  if (j.contains("vimages")) {
    const json& vi = j.at("vimages");
    if (vi.size() != spec.vimages.size())
      throw InputError("morphism: vimages must list every source vertex");
    for (size_t v = 0; v < spec.vimages.size(); ++v) {
      spec.vimages[v].clear();
      for (const json& w : vi[v])
        spec.vimages[v].push_back(Word::parse(w.get<std::string>()));
    }
  }
  if (j.contains("killed")) {
    const json& ks = j.at("killed");
    if (ks.size() != spec.killed.size())
      throw InputError("morphism: killed must list every source vertex");
    for (size_t v = 0; v < spec.killed.size(); ++v)
      for (const json& w : ks[v])
        spec.killed[v].push_back(Word::parse(w.get<std::string>()));
  }
  return spec;
}

inline MorphismSpec morphism_from_json(const json& j) {
  return morphism_core_from_json(
      j, gog_from_json(detail::need(j, "source", "morphism")),
      gog_from_json(detail::need(j, "target", "morphism")));
}

// ---- Pipelines ---------------------------------------------------------------
// {"levels": [gog, ...], "maps": [{vmap, emap, vimages?, killed?}, ...]}
// with one map per consecutive level pair.

struct PipelineSpec {
  std::vector<GraphOfGroups> levels;
  std::vector<MorphismSpec> maps;
};

inline PipelineSpec pipeline_from_json(const json& j) {
  PipelineSpec p;
  for (const json& l : detail::need(j, "levels", "pipeline"))
    p.levels.push_back(gog_from_json(l));
  const json& maps = detail::need(j, "maps", "pipeline");
  if (maps.size() + 1 != p.levels.size())
    throw InputError("pipeline: needs one map per consecutive level pair");
  for (size_t i = 0; i < maps.size(); ++i)
    p.maps.push_back(
        morphism_core_from_json(maps[i], p.levels[i], p.levels[i + 1]));
  return p;
}

// ---- Fold moves (reports) ---------------------------------------------------

inline json move_to_json(const FoldMove& m) {
  json j;
  switch (m.kind) {
    case FoldMove::SUBDIVIDE:
      j["kind"] = "SUBDIVIDE";
      j["edge"] = m.e1;
      break;
    case FoldMove::COLLAPSE:
      j["kind"] = "COLLAPSE";
      j["edge"] = m.e1;
      break;
    case FoldMove::FOLD:
      j["kind"] = "FOLD";
      j["edges"] = {m.e1, m.e2};
      if (!m.conj.trivial()) j["conj"] = m.conj.str();
      j["certificate"] = {{"ok", m.cert.ok}, {"detail", m.cert.detail}};
      if (!m.cert.witness.trivial()) j["certificate"]["witness"] = m.cert.witness.str();
      break;
    case FoldMove::GROUPFOLD: {
      j["kind"] = "GROUPFOLD";
      j["vertex"] = m.vertex;
      json killed = json::array();
      for (const Word& w : m.killed) killed.push_back(w.str());
      j["killed"] = std::move(killed);
      break;
    }
  }
  return j;
}

}  // namespace rtreelab
