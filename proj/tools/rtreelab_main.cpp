// rtreelab: exact-arithmetic toolkit for Stallings graphs, finite metric
// R-trees, systems of partial isometries, and graphs of groups.
//
// One command per invocation.  Reports are JSON by default (--dot / --csv
// where the object has a graph or tabular form), echo the full command line
// and all budgets so any run can be replayed, and are byte-identical across
// reruns on the same inputs.  Timing is opt-in (--timing) because wall-clock
// numbers would break that determinism.
//
// Exit codes: 0 verdict computed (even a negative verdict), 1 input error,
// 2 budget exhausted.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <rtreelab/cex.hpp>
#include <rtreelab/json_io.hpp>

using namespace rtreelab;

namespace {

struct Options {
  std::string format = "json";
  long seed = 0;
  bool timing = false;
  int orbit_points = 200;   // orbit / evidence sampling budget
  int machine_steps = 100;  // Rips machine step budget
  int word_lengths = 10;    // bounded word-length searches
  std::string echo;         // argv as typed, for replay
  std::chrono::steady_clock::time_point start;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_flag_callback("--json", [&o] { o.format = "json"; },
                         "JSON report (default)");
  cmd->add_flag_callback("--dot", [&o] { o.format = "dot"; },
                         "DOT graph output");
  cmd->add_flag_callback("--csv", [&o] { o.format = "csv"; }, "CSV output");
  cmd->add_option("--seed", o.seed, "seed for randomized searches")
      ->capture_default_str();
  cmd->add_flag("--timing", o.timing,
                "append wall-clock timing to the report");
  cmd->add_option("--points", o.orbit_points, "orbit point budget")
      ->capture_default_str();
  cmd->add_option("--max-steps", o.machine_steps, "machine step budget")
      ->capture_default_str();
  cmd->add_option("--max-len", o.word_lengths, "word length budget")
      ->capture_default_str();
}

json base_report(const Options& o, const std::string& sub, json inputs) {
  json r;
  r["command"] = o.echo;
  r["subcommand"] = sub;
  r["inputs"] = std::move(inputs);
  r["seed"] = o.seed;
  r["budgets"] = {{"orbit_points", o.orbit_points},
                  {"machine_steps", o.machine_steps},
                  {"word_lengths", o.word_lengths}};
  return r;
}

void emit(const Options& o, json rep) {
  if (o.timing) {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - o.start);
    rep["timing_ms"] = ms.count();
  }
  std::cout << rep.dump(2) << "\n";
}

[[noreturn]] void no_format(const Options& o, const std::string& cmd) {
  throw InputError("no --" + o.format + " output for " + cmd);
}

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return json::parse(in);  // parse errors carry byte positions
}

std::vector<Word> parse_word_list(const std::string& text) {
  std::vector<Word> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t b = item.find_first_not_of(' ');
    if (b == std::string::npos) continue;
    size_t e = item.find_last_not_of(' ');
    out.push_back(Word::parse(item.substr(b, e - b + 1)));
  }
  return out;
}

int infer_alphabet(const std::vector<Word>& words, int declared) {
  int r = std::max(declared, 1);
  for (const Word& w : words) r = std::max(r, w.max_gen() + 1);
  return r;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

Scalar lift_rational(const Rational& q, const BasisPtr& basis) {
  std::vector<Rational> c(basis->rank(), Rational(0));
  c[0] = q;
  return Scalar::from_coeffs(std::move(c), basis);
}

// "comp:num/den" or bare "num/den" (component 0), lifted into the system's
// scalar basis
CPoint parse_point(const std::string& text, const IsoSystem& s) {
  int comp = 0;
  std::string xs = text;
  size_t colon = text.find(':');
  if (colon != std::string::npos) {
    comp = std::stoi(text.substr(0, colon));
    xs = text.substr(colon + 1);
  }
  return {comp, lift_rational(parse_rational(xs), s.comps()[0].first.basis())};
}

// ---- group -----------------------------------------------------------------

int group_fold(const Options& o, const std::string& gens, int rank) {
  std::vector<Word> ws = parse_word_list(gens);
  int r = infer_alphabet(ws, rank);
  SubgroupGraph g = SubgroupGraph::from_generators(ws, r);
  if (o.format == "dot") {
    std::cout << g.dot();
    return 0;
  }
  if (o.format != "json") no_format(o, "group fold");
  json rep = base_report(o, "group fold", {{"gens", gens}, {"alphabet", r}});
  rep["vertices"] = g.vertex_count();
  rep["rank"] = g.rank();
  rep["free_basis"] = detail::subgroup_to_json(g);
  emit(o, rep);
  return 0;
}

int group_member(const Options& o, const std::string& sub,
                 const std::string& word, int rank) {
  std::vector<Word> ws = parse_word_list(sub);
  Word w = Word::parse(word);
  int r = infer_alphabet(ws, std::max(rank, w.max_gen() + 1));
  SubgroupGraph g = SubgroupGraph::from_generators(ws, r);
  if (o.format != "json") no_format(o, "group member");
  json rep = base_report(
      o, "group member",
      {{"sub", sub}, {"word", word}, {"alphabet", r}});
  rep["verdict"] = g.contains(w);
  emit(o, rep);
  return 0;
}

int group_intersect(const Options& o, const std::string& sub1,
                    const std::string& sub2, int rank) {
  std::vector<Word> w1 = parse_word_list(sub1);
  std::vector<Word> w2 = parse_word_list(sub2);
  int r = infer_alphabet(w1, rank);
  r = infer_alphabet(w2, r);
  SubgroupGraph a = SubgroupGraph::from_generators(w1, r);
  SubgroupGraph b = SubgroupGraph::from_generators(w2, r);
  SubgroupGraph meet = SubgroupGraph::intersect(a, b);
  if (o.format != "json") no_format(o, "group intersect");
  json rep = base_report(
      o, "group intersect",
      {{"sub1", sub1}, {"sub2", sub2}, {"alphabet", r}});
  rep["rank"] = meet.rank();
  rep["trivial"] = meet.is_trivial();
  rep["free_basis"] = detail::subgroup_to_json(meet);
  emit(o, rep);
  return 0;
}

int group_malnormal(const Options& o, const std::string& sub,
                    const std::string& ambient, int rank) {
  std::vector<Word> ws = parse_word_list(sub);
  std::vector<Word> as = parse_word_list(ambient);
  int r = infer_alphabet(ws, rank);
  r = infer_alphabet(as, r);
  SubgroupGraph h = SubgroupGraph::from_generators(ws, r);
  SubgroupGraph amb = SubgroupGraph::from_generators(as, r);
  auto report = h.malnormal_in(amb);
  if (o.format != "json") no_format(o, "group malnormal");
  json rep = base_report(
      o, "group malnormal",
      {{"sub", sub}, {"ambient", ambient}, {"alphabet", r}});
  rep["verdict"] = report.malnormal;
  if (!report.malnormal) {
    rep["witness"] = report.witness.str();
    rep["meet_element"] = report.meet_element.str();
    rep["meet_rank"] = report.meet_rank;
  }
  emit(o, rep);
  return 0;
}

// ---- tree ------------------------------------------------------------------

int tree_check(const Options& o, const std::string& file) {
  SubtreeFamily fam = tree_from_json(load_file(file));
  if (o.format == "dot") {
    std::cout << fam.tree.dot();
    return 0;
  }
  if (o.format != "json") no_format(o, "tree check");
  json rep = base_report(o, "tree check", {{"file", file}});
  rep["vertices"] = fam.tree.vertex_count();
  rep["edges"] = fam.tree.edges().size();
  rep["four_point"] = fam.tree.check_four_point();
  if (!fam.members.empty()) {
    TransverseReport tr = check_transverse_covering(fam);
    json t;
    t["ok"] = tr.ok;
    if (!tr.ok) t["diagnostics"] = tr.diagnostics;
    json meets = json::array();
    for (const auto& [i, j, p] : tr.meets)
      meets.push_back({{"members", {i, j}}, {"at", p.str()}});
    t["meets"] = std::move(meets);
    rep["transverse"] = std::move(t);
  }
  emit(o, rep);
  return 0;
}

int tree_skeleton(const Options& o, const std::string& file) {
  SubtreeFamily fam = tree_from_json(load_file(file));
  Skeleton sk = skeleton(fam);
  if (o.format == "dot") {
    std::cout << sk.dot();
    return 0;
  }
  if (o.format != "json") no_format(o, "tree skeleton");
  json rep = base_report(o, "tree skeleton", {{"file", file}});
  json v0 = json::array();
  for (const TreePoint& p : sk.v0) v0.push_back(p.str());
  rep["v0"] = std::move(v0);
  rep["member_count"] = sk.member_count;
  json edges = json::array();
  for (const auto& [pi, mi] : sk.edges) edges.push_back({pi, mi});
  rep["edges"] = std::move(edges);
  rep["is_tree"] = sk.is_tree();
  emit(o, rep);
  return 0;
}

int tree_collapse(const Options& o, const std::string& file,
                  const std::string& kill) {
  SubtreeFamily fam = tree_from_json(load_file(file));
  CollapseResult res = collapse(fam, parse_int_list(kill));
  if (o.format == "dot") {
    std::cout << res.target.dot("collapsed");
    return 0;
  }
  if (o.format != "json") no_format(o, "tree collapse");
  json rep = base_report(o, "tree collapse", {{"file", file}, {"kill", kill}});
  rep["aligned"] = res.aligned;
  if (!res.aligned) rep["alignment_note"] = res.alignment_note;
  rep["cuts"] = res.refinement.cuts.size();
  rep["pieces"] = res.refinement.pieces.size();
  rep["vertex_image"] = res.vertex_image;
  rep["piece_image"] = res.piece_image;
  json target;
  target["vertices"] = res.target.vertex_count();
  json edges = json::array();
  for (const auto& e : res.target.edges())
    edges.push_back(
        {{"u", e.u}, {"v", e.v}, {"len", scalar_to_json(e.len)}});
  target["edges"] = std::move(edges);
  rep["target"] = std::move(target);
  emit(o, rep);
  return 0;
}

// ---- isosys ----------------------------------------------------------------

int isosys_profile(const Options& o, const std::string& file) {
  IsoSystem s = isosys_from_json(load_file(file));
  if (o.format != "json") no_format(o, "isosys profile");
  json rep = base_report(o, "isosys profile", {{"file", file}});
  SuspensionSummary sum = suspend(s);
  rep["suspension"] = {{"bands", sum.bands},
                       {"singletons", sum.singletons},
                       {"reversing", sum.reversing},
                       {"components", sum.components},
                       {"area", scalar_to_json(sum.area)}};
  json comps = json::array();
  for (int c = 0; c < static_cast<int>(s.comps().size()); ++c) {
    Profile p = multiplicity_profile(s, c);
    json pj;
    pj["comp"] = c;
    json pts = json::array();
    for (const Scalar& x : p.points) pts.push_back(scalar_to_json(x));
    pj["points"] = std::move(pts);
    pj["open_mult"] = p.open_mult;
    pj["point_mult"] = p.point_mult;
    comps.push_back(std::move(pj));
  }
  rep["multiplicity"] = std::move(comps);
  emit(o, rep);
  return 0;
}

int isosys_run(const Options& o, const std::string& file) {
  IsoSystem s = isosys_from_json(load_file(file));
  RunResult r = rips_run(s, o.machine_steps);
  if (o.format != "json") no_format(o, "isosys run");
  json rep = base_report(o, "isosys run", {{"file", file}});
  rep["outcome"] = outcome_name(r.outcome);
  rep["steps"] = r.log.size();
  json log = json::array();
  for (const TrimStep& t : r.log) log.push_back(t.str());
  rep["log"] = std::move(log);
  rep["erased"] = scalar_to_json(r.erased);
  rep["final"] = isosys_to_json(r.final);
  Classification c = classify(s, o.machine_steps, o.orbit_points);
  rep["classification"] = system_class_name(c.kind);
  rep["certificate"] = c.certificate;
  emit(o, rep);
  return r.outcome == RipsOutcome::BUDGET_EXCEEDED ? 2 : 0;
}

int isosys_orbit(const Options& o, const std::string& file,
                 const std::string& point) {
  IsoSystem s = isosys_from_json(load_file(file));
  OrbitResult res = orbit(s, parse_point(point, s), o.orbit_points);
  if (o.format == "csv") {
    std::ostringstream os;
    os << "index,comp,x\n";
    for (size_t i = 0; i < res.points.size(); ++i)
      os << i << "," << res.points[i].comp << "," << res.points[i].x.str()
         << "\n";
    std::cout << os.str();
    return 0;
  }
  if (o.format != "json") no_format(o, "isosys orbit");
  json rep = base_report(o, "isosys orbit", {{"file", file}, {"point", point}});
  rep["count"] = res.points.size();
  rep["closed"] = res.closed;
  rep["min_gap"] = res.min_gap ? scalar_to_json(*res.min_gap) : json();
  json pts = json::array();
  for (const CPoint& p : res.points) pts.push_back(p.str());
  rep["points"] = std::move(pts);
  emit(o, rep);
  return 0;
}

int isosys_classify(const Options& o, const std::string& file) {
  IsoSystem s = isosys_from_json(load_file(file));
  Classification c = classify(s, o.machine_steps, o.orbit_points);
  if (o.format != "json") no_format(o, "isosys classify");
  json rep = base_report(o, "isosys classify", {{"file", file}});
  rep["class"] = system_class_name(c.kind);
  rep["certificate"] = c.certificate;
  rep["run_outcome"] = outcome_name(c.run.outcome);
  json blocks = json::array();
  for (size_t b = 0; b < c.imanishi.block_tag.size(); ++b)
    blocks.push_back(leaf_tag_name(c.imanishi.block_tag[b]));
  rep["imanishi"] = {{"block_of", c.imanishi.block_of},
                     {"tags", std::move(blocks)},
                     {"evidence", c.imanishi.evidence}};
  emit(o, rep);
  return 0;
}

int isosys_leafspace(const Options& o, const std::string& file,
                     int leaf_points) {
  IsoSystem s = isosys_from_json(load_file(file));
  LeafSpaceGraph g = leaf_space_graph(s, leaf_points);
  if (o.format == "dot") {
    std::cout << g.dot();
    return 0;
  }
  if (o.format != "json") no_format(o, "isosys leafspace");
  json rep = base_report(o, "isosys leafspace",
                         {{"file", file}, {"leaf_points", leaf_points}});
  rep["vertices"] = g.vertices;
  json edges = json::array();
  for (const auto& e : g.edges)
    edges.push_back({{"u", e.u}, {"v", e.v}, {"len", scalar_to_json(e.len)}});
  rep["edges"] = std::move(edges);
  rep["components"] = g.components;
  rep["betti"] = g.betti;
  rep["total_length"] = scalar_to_json(g.total_length);
  rep["is_tree"] = g.is_tree();
  emit(o, rep);
  return 0;
}

// ---- gog -------------------------------------------------------------------

json monitor_to_json(const ScottMonitor& m) {
  json ell = json::array();
  for (const Word& w : m.ell) ell.push_back(w.str());
  return {{"betti", m.betti}, {"w_count", m.w_count}, {"ell", std::move(ell)}};
}

int gog_validate(const Options& o, const std::string& file) {
  GraphOfGroups g = gog_from_json(load_file(file));
  if (o.format == "dot") {
    std::cout << g.dot();
    return 0;
  }
  if (o.format != "json") no_format(o, "gog validate");
  GogDiagnostics d = g.validate();
  json rep = base_report(o, "gog validate", {{"file", file}});
  rep["verdict"] = d.ok;
  rep["issues"] = d.issues;
  if (d.witness) rep["witness"] = d.witness->str();
  emit(o, rep);
  return 0;
}

int gog_monitor(const Options& o, const std::string& file) {
  json j = load_file(file);
  std::vector<GraphOfGroups> levels;
  if (j.contains("levels"))
    for (const json& l : j.at("levels")) levels.push_back(gog_from_json(l));
  else
    levels.push_back(gog_from_json(j));
  std::vector<ScottMonitor> trace;
  for (const GraphOfGroups& g : levels) trace.push_back(g.monitor());
  if (o.format == "csv") {
    std::cout << monitor_csv(trace);
    return 0;
  }
  if (o.format != "json") no_format(o, "gog monitor");
  json rep = base_report(o, "gog monitor", {{"file", file}});
  json rows = json::array();
  for (const ScottMonitor& m : trace) rows.push_back(monitor_to_json(m));
  rep["monitors"] = std::move(rows);
  emit(o, rep);
  return 0;
}

int gog_fold(const Options& o, const std::string& file) {
  MorphismSpec spec = morphism_from_json(load_file(file));
  std::vector<FoldMove> moves = fold_decompose(spec);
  GraphOfGroups cur = spec.source;
  std::vector<ScottMonitor> trace{cur.monitor()};
  json mjs = json::array();
  bool monotone = true;
  for (FoldMove& m : moves) {
    cur = cur.apply_move(m);
    trace.push_back(cur.monitor());
    const ScottMonitor& a = trace[trace.size() - 2];
    const ScottMonitor& b = trace.back();
    if (b.betti > a.betti || b.w_count > a.w_count) monotone = false;
    mjs.push_back(move_to_json(m));
  }
  if (o.format == "csv") {
    std::cout << monitor_csv(trace);
    return 0;
  }
  if (o.format != "json") no_format(o, "gog fold");
  json rep = base_report(o, "gog fold", {{"file", file}});
  rep["moves"] = std::move(mjs);
  rep["replay_isomorphic"] = cur.isomorphic(spec.target);
  rep["monotone"] = monotone;
  json rows = json::array();
  for (const ScottMonitor& m : trace) rows.push_back(monitor_to_json(m));
  rep["monitors"] = std::move(rows);
  emit(o, rep);
  return 0;
}

int gog_scott(const Options& o, const std::string& file) {
  PipelineSpec p = pipeline_from_json(load_file(file));
  PipelineResult r = scott_pipeline(p.levels, p.maps, o.word_lengths);
  if (o.format == "csv") {
    std::cout << monitor_csv(r.trace);
    return 0;
  }
  if (o.format != "json") no_format(o, "gog scott");
  json rep = base_report(o, "gog scott", {{"file", file}});
  json rows = json::array();
  for (const ScottMonitor& m : r.trace) rows.push_back(monitor_to_json(m));
  rep["trace"] = std::move(rows);
  json wit = json::array();
  for (const Word& w : r.hyperbolic_witness) wit.push_back(w.str());
  rep["hyperbolic_witness"] = std::move(wit);
  rep["stable_from"] = r.stable_from;
  rep["limit_level"] = r.limit_level;
  rep["limit_edge"] = r.limit_edge;
  rep["limit_group"] = detail::subgroup_to_json(r.limit_group);
  emit(o, rep);
  return 0;
}

// ---- cex -------------------------------------------------------------------

int cex_chain(const Options& o, const std::string& seed_word, int n) {
  Chain chain{Word::parse(seed_word)};
  std::vector<ChainLevel> levels = build_chain(chain, n);
  if (o.format != "json") no_format(o, "cex chain");
  json rep =
      base_report(o, "cex chain", {{"seed_word", seed_word}, {"n", n}});
  json rows = json::array();
  for (const ChainLevel& l : levels)
    rows.push_back({{"i", l.i},
                    {"b", l.b.str()},
                    {"length", l.b.length()},
                    {"rank", l.M.rank()}});
  rep["levels"] = std::move(rows);
  emit(o, rep);
  return 0;
}

int cex_malnormal(const Options& o, const std::string& seed_word, int imax) {
  Chain chain{Word::parse(seed_word)};
  if (o.format != "json") no_format(o, "cex malnormal");
  json rep = base_report(o, "cex malnormal",
                         {{"seed_word", seed_word}, {"imax", imax}});
  json rows = json::array();
  bool all = true;
  for (int i = 2; i <= imax; ++i) {
    bool ok = verify_malnormal_step(chain, i);
    all = all && ok;
    rows.push_back({{"i", i}, {"malnormal", ok}});
  }
  rep["steps"] = std::move(rows);
  rep["verdict"] = all;
  emit(o, rep);
  return 0;
}

int cex_intersection(const Options& o, const std::string& seed_word, int n) {
  Chain chain{Word::parse(seed_word)};
  IntersectionReport r = verify_intersection(chain, n, o.word_lengths);
  if (o.format != "json") no_format(o, "cex intersection");
  json rep = base_report(o, "cex intersection",
                         {{"seed_word", seed_word}, {"n", n}});
  rep["verdict"] = r.ok;
  rep["words_checked"] = r.words_checked;
  rep["exceptions"] = r.exceptions;
  emit(o, rep);
  return 0;
}

int cex_gamma(const Options& o, const std::string& seed_word, int k) {
  Chain chain{Word::parse(seed_word)};
  GammaK g = build_gamma(chain, k);
  if (o.format == "dot") {
    std::cout << g.graph.dot();
    return 0;
  }
  if (o.format != "json") no_format(o, "cex gamma");
  json rep =
      base_report(o, "cex gamma", {{"seed_word", seed_word}, {"k", k}});
  rep["vertices"] = g.graph.vertex_count();
  json edges = json::array();
  for (int e = 0; e < g.graph.edge_count(); ++e)
    edges.push_back({{"u", g.graph.edge(e).u},
                     {"v", g.graph.edge(e).v},
                     {"group", detail::subgroup_to_json(g.graph.edge(e).group)},
                     {"len", scalar_to_json(g.lengths[e])}});
  rep["edges"] = std::move(edges);
  ScottMonitor m = g.graph.monitor();
  rep["betti"] = m.betti;
  rep["w_count"] = m.w_count;
  emit(o, rep);
  return 0;
}

int cex_spine(const Options& o, int k) {
  SpineMetrics m = spine_metrics(k);
  if (o.format == "csv") {
    std::ostringstream os;
    os << "edge,length\n";
    for (size_t i = 0; i < m.lengths.size(); ++i)
      os << i << "," << m.lengths[i].str() << "\n";
    std::cout << os.str();
    return 0;
  }
  if (o.format != "json") no_format(o, "cex spine");
  json rep = base_report(o, "cex spine", {{"k", k}});
  rep["d"] = scalar_to_json(m.d);
  json lens = json::array();
  for (const Scalar& l : m.lengths) lens.push_back(scalar_to_json(l));
  rep["lengths"] = std::move(lens);
  emit(o, rep);
  return 0;
}

int cex_extent(const Options& o, const std::string& seed_word,
               const std::string& g, int k) {
  Chain chain{Word::parse(seed_word)};
  Word w = Word::parse(g);
  Scalar fixed = fixed_extent(chain, w, k);
  Scalar spine = spine_extent(chain, w, k);
  if (o.format != "json") no_format(o, "cex extent");
  json rep = base_report(
      o, "cex extent", {{"seed_word", seed_word}, {"g", g}, {"k", k}});
  std::optional<int> esc = chain.escape_level(w, k + 1);
  rep["escape_level"] = esc ? json(*esc) : json();
  rep["fixed_extent"] = scalar_to_json(fixed);
  rep["spine_extent"] = scalar_to_json(spine);
  emit(o, rep);
  return 0;
}

int cex_lengths(const Options& o, const std::string& seed_word,
                const std::string& g, const std::string& gp, int kmax) {
  Chain chain{Word::parse(seed_word)};
  std::vector<Scalar> seq =
      length_monotone(chain, Word::parse(g), Word::parse(gp), kmax);
  if (o.format == "csv") {
    std::ostringstream os;
    os << "k,length\n";
    for (size_t k = 0; k < seq.size(); ++k)
      os << k << "," << seq[k].str() << "\n";
    std::cout << os.str();
    return 0;
  }
  if (o.format != "json") no_format(o, "cex lengths");
  json rep = base_report(
      o, "cex lengths",
      {{"seed_word", seed_word}, {"g", g}, {"gp", gp}, {"kmax", kmax}});
  json lens = json::array();
  for (const Scalar& l : seq) lens.push_back(scalar_to_json(l));
  rep["lengths"] = std::move(lens);
  rep["monotone"] = true;  // length_monotone throws otherwise
  emit(o, rep);
  return 0;
}

std::string echo_argv(int argc, char** argv) {
  std::ostringstream os;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) os << ' ';
    std::string a = argv[i];
    if (a.find(' ') != std::string::npos || a.empty())
      os << '"' << a << '"';
    else
      os << a;
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  o.echo = echo_argv(argc, argv);
  o.start = std::chrono::steady_clock::now();

  CLI::App app{"exact computations on Stallings graphs, finite R-trees, "
               "partial isometries, and graphs of groups"};
  app.require_subcommand(1);
  int code = 0;

  // group: Stallings subgroup graphs in a free group
  CLI::App* group = app.add_subcommand("group", "subgroups of free groups");
  group->require_subcommand(1);
  {
    static std::string gens, sub, word, sub1, sub2, ambient;
    static int rank = 0;
    CLI::App* c = group->add_subcommand("fold", "fold a generating set");
    c->add_option("--gens", gens, "comma-separated generator words")
        ->required();
    c->add_option("--rank", rank, "ambient free rank (inferred if omitted)");
    add_common(c, o);
    c->callback([&] { code = group_fold(o, gens, rank); });

    CLI::App* m = group->add_subcommand("member", "membership of a word");
    m->add_option("--sub", sub, "comma-separated generator words")->required();
    m->add_option("--word", word, "word to test")->required();
    m->add_option("--rank", rank, "ambient free rank (inferred if omitted)");
    add_common(m, o);
    m->callback([&] { code = group_member(o, sub, word, rank); });

    CLI::App* i = group->add_subcommand("intersect", "intersect two subgroups");
    i->add_option("--sub1", sub1, "first subgroup generators")->required();
    i->add_option("--sub2", sub2, "second subgroup generators")->required();
    i->add_option("--rank", rank, "ambient free rank (inferred if omitted)");
    add_common(i, o);
    i->callback([&] { code = group_intersect(o, sub1, sub2, rank); });

    CLI::App* mal = group->add_subcommand("malnormal",
                                          "malnormality inside an ambient subgroup");
    mal->add_option("--sub", sub, "subgroup generators")->required();
    mal->add_option("--ambient", ambient, "ambient subgroup generators")
        ->required();
    mal->add_option("--rank", rank, "ambient free rank (inferred if omitted)");
    add_common(mal, o);
    mal->callback([&] { code = group_malnormal(o, sub, ambient, rank); });
  }

  // tree: finite metric trees with subtree families
  CLI::App* tree = app.add_subcommand("tree", "finite metric trees");
  tree->require_subcommand(1);
  {
    static std::string file, kill;
    CLI::App* c = tree->add_subcommand("check",
                                       "validate a tree and its covering");
    c->add_option("file", file, "tree JSON file")->required();
    add_common(c, o);
    c->callback([&] { code = tree_check(o, file); });

    CLI::App* s = tree->add_subcommand("skeleton",
                                       "skeleton of a transverse covering");
    s->add_option("file", file, "tree JSON file")->required();
    add_common(s, o);
    s->callback([&] { code = tree_skeleton(o, file); });

    CLI::App* k = tree->add_subcommand("collapse", "collapse subtree members");
    k->add_option("file", file, "tree JSON file")->required();
    k->add_option("--kill", kill, "comma-separated member indices to collapse")
        ->required();
    add_common(k, o);
    k->callback([&] { code = tree_collapse(o, file, kill); });
  }

  // isosys: systems of partial isometries on multi-interval domains
  CLI::App* iso = app.add_subcommand("isosys", "systems of partial isometries");
  iso->require_subcommand(1);
  {
    static std::string file, point = "0:0";
    static int leaf_points = 1000;
    CLI::App* p = iso->add_subcommand("profile",
                                      "suspension and multiplicity profile");
    p->add_option("file", file, "system JSON file")->required();
    add_common(p, o);
    p->callback([&] { code = isosys_profile(o, file); });

    CLI::App* r = iso->add_subcommand("run", "run the Rips machine");
    r->add_option("file", file, "system JSON file")->required();
    add_common(r, o);
    r->callback([&] { code = isosys_run(o, file); });

    CLI::App* ob = iso->add_subcommand("orbit", "orbit of a point");
    ob->add_option("file", file, "system JSON file")->required();
    ob->add_option("--point", point, "seed point comp:x")
        ->capture_default_str();
    add_common(ob, o);
    ob->callback([&] { code = isosys_orbit(o, file, point); });

    CLI::App* cl = iso->add_subcommand("classify", "classify the system");
    cl->add_option("file", file, "system JSON file")->required();
    add_common(cl, o);
    cl->callback([&] { code = isosys_classify(o, file); });

    CLI::App* lf = iso->add_subcommand("leafspace",
                                       "leaf space of the suspension");
    lf->add_option("file", file, "system JSON file")->required();
    lf->add_option("--leaf-points", leaf_points, "leaf sampling budget")
        ->capture_default_str();
    add_common(lf, o);
    lf->callback([&] { code = isosys_leafspace(o, file, leaf_points); });
  }

  // gog: graphs of groups with subgroup labels
  CLI::App* gog = app.add_subcommand("gog", "graphs of groups");
  gog->require_subcommand(1);
  {
    static std::string file;
    CLI::App* v = gog->add_subcommand("validate", "check edge inclusions");
    v->add_option("file", file, "graph-of-groups JSON file")->required();
    add_common(v, o);
    v->callback([&] { code = gog_validate(o, file); });

    CLI::App* m = gog->add_subcommand("monitor", "betti / W-vertex monitor");
    m->add_option("file", file, "graph-of-groups or pipeline JSON file")
        ->required();
    add_common(m, o);
    m->callback([&] { code = gog_monitor(o, file); });

    CLI::App* f = gog->add_subcommand("fold",
                                      "decompose a morphism into fold moves");
    f->add_option("file", file, "morphism JSON file")->required();
    add_common(f, o);
    f->callback([&] { code = gog_fold(o, file); });

    CLI::App* s = gog->add_subcommand("scott", "monitored fold pipeline");
    s->add_option("file", file, "pipeline JSON file")->required();
    add_common(s, o);
    s->callback([&] { code = gog_scott(o, file); });
  }

  // cex: the nested-chain counterexample family
  CLI::App* cex = app.add_subcommand("cex", "nested chain counterexample");
  cex->require_subcommand(1);
  {
    static std::string seed_word = "babb", g, gp;
    static int n = 4, imax = 4, k = 2, kmax = 8;
    CLI::App* ch = cex->add_subcommand("chain", "build chain words");
    ch->add_option("--seed-word", seed_word, "chain seed in <a,b> minus <a>")
        ->capture_default_str();
    ch->add_option("--n", n, "number of levels")->capture_default_str();
    add_common(ch, o);
    ch->callback([&] { code = cex_chain(o, seed_word, n); });

    CLI::App* mal = cex->add_subcommand("malnormal",
                                        "malnormality down the chain");
    mal->add_option("--seed-word", seed_word, "chain seed")
        ->capture_default_str();
    mal->add_option("--imax", imax, "check steps 2..imax")
        ->capture_default_str();
    add_common(mal, o);
    mal->callback([&] { code = cex_malnormal(o, seed_word, imax); });

    CLI::App* in = cex->add_subcommand(
        "intersection", "substitution length certificate");
    in->add_option("--seed-word", seed_word, "chain seed")
        ->capture_default_str();
    in->add_option("--n", n, "chain depth")->capture_default_str();
    add_common(in, o);
    in->callback([&] { code = cex_intersection(o, seed_word, n); });

    CLI::App* ga = cex->add_subcommand("gamma", "level-k graph of groups");
    ga->add_option("--seed-word", seed_word, "chain seed")
        ->capture_default_str();
    ga->add_option("--k", k, "level")->capture_default_str();
    add_common(ga, o);
    ga->callback([&] { code = cex_gamma(o, seed_word, k); });

    CLI::App* sp = cex->add_subcommand("spine", "spine metrics at level k");
    sp->add_option("--k", k, "level")->capture_default_str();
    add_common(sp, o);
    sp->callback([&] { code = cex_spine(o, k); });

    CLI::App* ex = cex->add_subcommand("extent", "fixed-set extent of g");
    ex->add_option("--seed-word", seed_word, "chain seed")
        ->capture_default_str();
    ex->add_option("--g", g, "element of <a,b> minus <a>")->required();
    ex->add_option("--k", k, "level")->capture_default_str();
    add_common(ex, o);
    ex->callback([&] { code = cex_extent(o, seed_word, g, k); });

    CLI::App* le = cex->add_subcommand("lengths",
                                       "translation lengths of gg' by level");
    le->add_option("--seed-word", seed_word, "chain seed")
        ->capture_default_str();
    le->add_option("--g", g, "element of <a,b> minus <a>")->required();
    le->add_option("--gp", gp, "element of <a,c> minus <a>")->required();
    le->add_option("--kmax", kmax, "last level")->capture_default_str();
    add_common(le, o);
    le->callback([&] { code = cex_lengths(o, seed_word, g, gp, kmax); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return code;
}
