// Acceptance gate: eight go/no-go checks, one [PASS]/[FAIL] line each.
// Exits 0 only if every check passes.  argv[1] is the path to the CLI
// binary (used by the determinism check).

#include <chrono>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <rtreelab/cex.hpp>
#include <rtreelab/json_io.hpp>

#include "oracle_free_group.hpp"

using namespace rtreelab;

namespace {

std::string g_cli_path;

std::string fx(const std::string& name) {
  return std::string(RTREELAB_FIXTURE_DIR) + "/" + name;
}

json load_fixture(const std::string& name) {
  std::ifstream in(fx(name));
  if (!in) throw InputError("fixture missing: " + name);
  return json::parse(in);
}

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = g_cli_path + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {};
  CliResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// ---- 1: exact spine / translation / extent values ---------------------------

std::string check_exact_values() {
  Chain chain;
  Word b = Word::parse("b"), bp = Word::parse("c");
  for (int k = 0; k <= 8; ++k) {
    if (spine_metrics(k).d.str() != "1")
      return "spine distance at k=" + std::to_string(k);
    if (translation_length(chain, b, bp, k).str() != "2")
      return "translation length at k=" + std::to_string(k);
  }
  for (int k = 2; k <= 8; ++k)
    for (int i = 1; i + 1 <= k; ++i) {
      Scalar expected = Scalar(Rational(1) - detail::half_pow(i + 1));
      if (compare(fixed_extent(chain, chain.level(i).b, k), expected) != 0)
        return "fixed extent of level " + std::to_string(i) + " at k=" +
               std::to_string(k);
    }
  return "";
}

// ---- 2: chain malnormality and substitution lengths -------------------------

std::string check_chain_algebra() {
  Chain chain;
  for (int i = 2; i <= 4; ++i)
    if (!verify_malnormal_step(chain, i))
      return "malnormal step " + std::to_string(i);
  IntersectionReport r = verify_intersection(chain, 5, 10);
  if (!r.ok || !r.exceptions.empty())
    return "substitution sweep found " + std::to_string(r.exceptions.size()) +
           " exception(s)";
  return "";
}

// ---- 3: membership and intersection vs brute force --------------------------

Word random_reduced_word(std::mt19937& rng) {
  std::uniform_int_distribution<int> len_d(1, 6);
  std::uniform_int_distribution<int> four(0, 3);
  int len = len_d(rng);
  std::string s;
  const char syms[] = {'a', 'b', 'A', 'B'};
  int prev = -1;
  for (int i = 0; i < len; ++i) {
    int pick;
    do {
      pick = four(rng);
    } while (prev >= 0 && (pick ^ 2) == prev);
    s += syms[pick];
    prev = pick;
  }
  return Word::parse(s);
}

// every element of <basis> with |w| <= maxlen, by breadth-first closure over
// signed Nielsen-basis products; intermediates are pruned with the same
// Lyndon--Schupp bound the oracle's membership test certifies
std::set<Word> brute_ball(const std::vector<Word>& nielsen, size_t maxlen) {
  size_t maxu = 0;
  for (const Word& u : nielsen) maxu = std::max(maxu, u.length());
  const size_t bound = maxlen + maxu + 2;
  std::vector<Word> gens = oracle::signed_set(nielsen);
  std::set<Word> seen{Word()};
  std::deque<Word> work{Word()};
  while (!work.empty()) {
    Word p = work.front();
    work.pop_front();
    for (const Word& g : gens) {
      Word q = p * g;
      if (q.length() > bound) continue;
      if (seen.insert(q).second) work.push_back(q);
    }
  }
  return seen;
}

void enumerate_reduced(std::string& cur, int prev, int left,
                       std::vector<Word>& out) {
  if (left == 0) return;
  const char syms[] = {'a', 'b', 'A', 'B'};
  for (int pick = 0; pick < 4; ++pick) {
    if (prev >= 0 && (pick ^ 2) == prev) continue;
    cur += syms[pick];
    out.push_back(Word::parse(cur));
    enumerate_reduced(cur, pick, left - 1, out);
    cur.pop_back();
  }
}

std::string check_oracle_equivalence() {
  std::vector<Word> all_words{Word()};
  std::string cur;
  enumerate_reduced(cur, -1, 8, all_words);

  std::mt19937 rng(0);
  for (int iter = 0; iter < 25; ++iter) {
    std::vector<Word> gens1, gens2;
    int n1 = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < n1; ++i) gens1.push_back(random_reduced_word(rng));
    int n2 = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < n2; ++i) gens2.push_back(random_reduced_word(rng));

    oracle::Subgroup o1(gens1), o2(gens2);
    SubgroupGraph h1 = SubgroupGraph::from_generators(gens1, 2);
    SubgroupGraph h2 = SubgroupGraph::from_generators(gens2, 2);
    SubgroupGraph meet = SubgroupGraph::intersect(h1, h2);
    std::set<Word> ball1 = brute_ball(o1.basis, 8);
    std::set<Word> ball2 = brute_ball(o2.basis, 8);

    for (const Word& w : all_words) {
      bool in1 = ball1.count(w) != 0;
      bool in2 = ball2.count(w) != 0;
      if (h1.contains(w) != in1 || h2.contains(w) != in2)
        return "membership disagrees at trial " + std::to_string(iter) +
               " word " + w.str();
      if (meet.contains(w) != (in1 && in2))
        return "intersection disagrees at trial " + std::to_string(iter) +
               " word " + w.str();
    }
  }
  return "";
}

// ---- 4: fold decomposition replay -------------------------------------------

std::string check_fold_calculus() {
  for (const char* name : {"morphism_collapse.json", "morphism_fold.json",
                           "morphism_mixed.json"}) {
    MorphismSpec spec = morphism_from_json(load_fixture(name));
    std::vector<FoldMove> moves = fold_decompose(spec);
    GraphOfGroups cur = spec.source;
    ScottMonitor prev = cur.monitor();
    for (FoldMove& m : moves) {
      cur = cur.apply_move(m);
      ScottMonitor now = cur.monitor();
      if (now.betti > prev.betti || now.w_count > prev.w_count)
        return std::string(name) + ": monitor increased on " + m.str();
      if (m.kind == FoldMove::FOLD && !m.cert.ok)
        return std::string(name) + ": fold without a verified certificate";
      prev = now;
    }
    if (!cur.isomorphic(spec.target))
      return std::string(name) + ": replay is not isomorphic to the target";
  }
  return "";
}

// ---- 5: monitored pipeline limit ---------------------------------------------

std::string check_scott_pipeline() {
  PipelineSpec p = pipeline_from_json(load_fixture("pipeline_splitting.json"));
  PipelineResult r = scott_pipeline(p.levels, p.maps);
  // image of the level-0 edge group under the composed vertex maps
  int v = p.levels[0].edge(0).u;
  std::vector<Word> image;
  for (const Word& w : p.levels[0].edge(0).group.free_basis()) {
    Word img = w;
    int at = v;
    for (const MorphismSpec& m : p.maps) {
      img = m.push(at, img);
      at = m.vmap[at];
    }
    image.push_back(img);
  }
  SubgroupGraph expected =
      SubgroupGraph::from_generators(image, p.levels[0].alphabet());
  if (!r.limit_group.same_subgroup(expected))
    return "limit edge group differs from the pushed level-0 edge group";

  PipelineSpec bad = pipeline_from_json(load_fixture("pipeline_broken.json"));
  try {
    scott_pipeline(bad.levels, bad.maps);
    return "violating pipeline was not rejected";
  } catch (const MonotonicityViolation& e) {
    if (std::string(e.what()).find("witness") == std::string::npos)
      return "violation reported without a witness";
  }
  return "";
}

// ---- 6: machine outcomes, classifications, orbits, leaf spaces ---------------

std::string mult_exactly_two_off_breakpoints(const IsoSystem& s) {
  for (int c = 0; c < static_cast<int>(s.comps().size()); ++c) {
    Profile p = multiplicity_profile(s, c);
    for (int m : p.open_mult)
      if (m != 2) return "open multiplicity " + std::to_string(m);
  }
  return "";
}

std::string check_rips_and_leaves() {
  IsoSystem band = isosys_from_json(load_fixture("single_band.json"));
  if (rips_run(band).outcome != RipsOutcome::HALT_EMPTY)
    return "single band did not halt empty";
  if (classify(band).kind != SystemClass::SIMPLICIAL)
    return "single band not simplicial";

  IsoSystem rational = isosys_from_json(load_fixture("rational_iet.json"));
  if (rips_run(rational).outcome != RipsOutcome::PURE)
    return "rational exchange not pure";
  if (std::string d = mult_exactly_two_off_breakpoints(rational); !d.empty())
    return "rational exchange: " + d;
  if (classify(rational).kind != SystemClass::SIMPLICIAL)
    return "rational exchange: finite orbits should classify simplicial";

  IsoSystem golden = isosys_from_json(load_fixture("golden_iet.json"));
  if (rips_run(golden).outcome != RipsOutcome::PURE)
    return "golden exchange not pure";
  if (std::string d = mult_exactly_two_off_breakpoints(golden); !d.empty())
    return "golden exchange: " + d;
  if (classify(golden).kind != SystemClass::SURFACE)
    return "golden exchange not classified as surface";

  BasisPtr basis = golden.comps()[0].first.basis();
  std::vector<Rational> zero_c(basis->rank(), Rational(0));
  OrbitResult orb =
      orbit(golden, {0, Scalar::from_coeffs(zero_c, basis)}, 200);
  if (!orb.min_gap) return "golden orbit produced no gap";
  std::vector<Rational> tol_c(basis->rank(), Rational(0));
  tol_c[0] = Rational(1, 100);
  if (compare(*orb.min_gap, Scalar::from_coeffs(tol_c, basis)) >= 0)
    return "golden orbit min gap not below 1/100 within 200 points";

  LeafSpaceGraph circle =
      leaf_space_graph(isosys_from_json(load_fixture("circle.json")));
  if (circle.betti != 1) return "circle leaf space betti";
  if (circle.total_length.str() != "1/2") return "circle leaf space length";

  ImanishiReport two =
      imanishi_components(isosys_from_json(load_fixture("twocomp.json")));
  if (two.block_tag.size() != 2 ||
      two.block_tag[0] != LeafTag::COMPACT_LEAVES ||
      two.block_tag[1] != LeafTag::DENSE_LEAVES)
    return "two-component leaf tags";
  return "";
}

// ---- 7: skeleton, collapse alignment, four-point condition -------------------

std::string check_tree_constructions() {
  SubtreeFamily fam = tree_from_json(load_fixture("tripod.json"));
  if (!fam.tree.check_four_point()) return "tripod four-point condition";
  Skeleton sk = skeleton(fam);
  if (sk.v0.size() != 1) return "skeleton has " + std::to_string(sk.v0.size()) +
                                " branch points";
  if (sk.member_count != 3) return "skeleton member count";
  if (sk.edges.size() != 3) return "skeleton edge count";
  if (!sk.is_tree()) return "skeleton is not a tree";

  for (unsigned mask = 1; mask < 8; ++mask) {
    std::vector<int> kill;
    for (int m = 0; m < 3; ++m)
      if (mask & (1u << m)) kill.push_back(m);
    CollapseResult res = collapse(fam, kill);
    if (!res.aligned)
      return "collapse " + std::to_string(mask) + ": " + res.alignment_note;
    if (!res.target.check_four_point())
      return "collapse " + std::to_string(mask) + ": four-point condition";
  }
  return "";
}

// ---- 8: byte-identical reruns -------------------------------------------------

std::string check_determinism() {
  if (g_cli_path.empty()) return "no CLI path supplied";
  const std::vector<std::string> commands = {
      "group member --sub a,babb --word b",
      "group fold --gens ab,ba --dot",
      "cex spine --k 5",
      "cex gamma --k 2 --dot",
      "cex intersection --n 3 --max-len 6",
      "isosys run " + fx("golden_iet.json"),
      "isosys orbit " + fx("golden_iet.json") + " --point 0:0 --points 200",
      "isosys classify " + fx("twocomp.json") +
          " --seed 0 --points 200 --max-steps 100 --max-len 10",
      "gog scott " + fx("pipeline_splitting.json"),
      "gog monitor " + fx("pipeline_splitting.json") + " --csv",
      "tree skeleton " + fx("tripod.json"),
  };
  for (const std::string& c : commands) {
    CliResult a = run_cli(c);
    CliResult b = run_cli(c);
    if (a.code != b.code || a.out != b.out)
      return "output differs across reruns of: " + c;
    if (a.out.empty()) return "no output from: " + c;
  }
  return "";
}

struct Criterion {
  std::string label;
  std::function<std::string()> body;
  double limit_s;  // 0 = no limit
};

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli_path = argv[1];

  const std::vector<Criterion> criteria = {
      {"exact spine, translation, and extent values", check_exact_values, 10},
      {"chain malnormality and substitution lengths", check_chain_algebra, 60},
      {"membership and intersection vs brute force", check_oracle_equivalence,
       0},
      {"fold decomposition replay with certificates", check_fold_calculus, 5},
      {"monitored pipeline limit and violation witness", check_scott_pipeline,
       0},
      {"machine outcomes, classifications, and leaf spaces",
       check_rips_and_leaves, 10},
      {"skeleton, collapse alignment, four-point checks",
       check_tree_constructions, 0},
      {"byte-identical command reruns", check_determinism, 0},
  };

  bool all_ok = true;
  for (size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    std::string note;
    try {
      note = criteria[i].body();
    } catch (const std::exception& e) {
      note = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    if (note.empty() && criteria[i].limit_s > 0 && secs > criteria[i].limit_s)
      note = "exceeded " + std::to_string(criteria[i].limit_s) + "s budget";
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(1);
    line << (note.empty() ? "[PASS] " : "[FAIL] ") << (i + 1) << ". "
         << criteria[i].label << " (" << secs << "s)";
    if (!note.empty()) line << " -- " << note;
    std::cout << line.str() << "\n";
    if (!note.empty()) all_ok = false;
  }
  return all_ok ? 0 : 1;
}
