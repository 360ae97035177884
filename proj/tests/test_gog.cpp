#include <catch2/catch_amalgamated.hpp>

#include "rtreelab/gog.hpp"

using namespace rtreelab;

namespace {

SubgroupGraph sg(std::vector<std::string> gens, int r) {
  std::vector<Word> ws;
  for (const auto& s : gens) ws.push_back(Word::parse(s));
  return SubgroupGraph::from_generators(ws, r);
}

// v0=<a> --<a>-- v1=<a,b>  over F_2
GraphOfGroups segment_fixture() {
  return GraphOfGroups::make({sg({"a"}, 2), sg({"a", "b"}, 2)},
                             {{0, 1, sg({"a"}, 2)}});
}

// u=<a,b> with two <a>-edges to <a,c> and <a,cc>, over F_3
GraphOfGroups two_edge_fixture() {
  return GraphOfGroups::make(
      {sg({"a", "b"}, 3), sg({"a", "c"}, 3), sg({"a", "cc"}, 3)},
      {{0, 1, sg({"a"}, 3)}, {0, 2, sg({"a"}, 3)}});
}

// the fold target: u=<a,b> --<a>-- <a,c>
GraphOfGroups folded_fixture() {
  return GraphOfGroups::make({sg({"a", "b"}, 3), sg({"a", "c"}, 3)},
                             {{0, 1, sg({"a"}, 3)}});
}

bool witnesses_elliptic(const std::vector<Word>& ell, const GraphOfGroups& g) {
  for (const Word& w : ell) {
    bool ok = false;
    for (int v = 0; v < g.vertex_count() && !ok; ++v)
      ok = g.vertex_group(v).contains_conjugate(w);
    if (!ok) return false;
  }
  return true;
}

void check_replay_monotone(const GraphOfGroups& src, std::vector<FoldMove> moves,
                           const GraphOfGroups& target) {
  GraphOfGroups cur = src;
  ScottMonitor prev = cur.monitor();
  for (FoldMove& m : moves) {
    cur = cur.apply_move(m);
    REQUIRE(cur.validate().ok);
    ScottMonitor now = cur.monitor();
    CHECK(now.betti <= prev.betti);
    CHECK(now.w_count <= prev.w_count);
    if (now.w_count == prev.w_count) CHECK(witnesses_elliptic(prev.ell, cur));
    prev = now;
  }
  CHECK(cur.isomorphic(target));
}

}  // namespace

TEST_CASE("graph of groups validation", "[gog]") {
  GraphOfGroups lone = GraphOfGroups::make({sg({"a", "b"}, 2)}, {});
  CHECK(lone.validate().ok);

  CHECK(segment_fixture().validate().ok);

  // edge group <b> does not include into vertex group <a>
  GraphOfGroups bad = GraphOfGroups::make({sg({"a"}, 2), sg({"a", "b"}, 2)},
                                          {{0, 1, sg({"b"}, 2)}});
  GogDiagnostics d = bad.validate();
  CHECK_FALSE(d.ok);
  REQUIRE(d.witness);
  CHECK(d.witness->str() == "b");

  GraphOfGroups split =
      GraphOfGroups::make({sg({"a"}, 2), sg({"b"}, 2)}, {});
  CHECK_FALSE(split.validate().ok);
}

TEST_CASE("scott monitor", "[gog]") {
  // all inclusions equalities: nothing in W
  GraphOfGroups flat = GraphOfGroups::make({sg({"a"}, 2), sg({"a"}, 2)},
                                           {{0, 1, sg({"a"}, 2)}});
  ScottMonitor m0 = flat.monitor();
  CHECK(m0.betti == 0);
  CHECK(m0.w_count == 0);
  REQUIRE(m0.ell.size() == 1);
  CHECK(m0.ell[0].str() == "a");

  // only the <a,b> end strictly contains the edge group
  ScottMonitor m1 = segment_fixture().monitor();
  CHECK(m1.betti == 0);
  CHECK(m1.w_count == 1);
  CHECK(m1.ell.size() == 2);

  // HNN shape: loop at <a,b> with edge group <a>
  GraphOfGroups hnn =
      GraphOfGroups::make({sg({"a", "b"}, 2)}, {{0, 0, sg({"a"}, 2)}});
  ScottMonitor m2 = hnn.monitor();
  CHECK(m2.betti == 1);
  CHECK(m2.w_count == 1);
}

TEST_CASE("collapse move", "[gog]") {
  FoldMove m;
  m.kind = FoldMove::COLLAPSE;
  m.e1 = 0;
  GraphOfGroups g = segment_fixture().apply_move(m);
  CHECK(g.vertex_count() == 1);
  CHECK(g.edge_count() == 0);
  CHECK(g.vertex_group(0).same_subgroup(sg({"a", "b"}, 2)));
  CHECK(g.validate().ok);

  GraphOfGroups hnn =
      GraphOfGroups::make({sg({"a", "b"}, 2)}, {{0, 0, sg({"a"}, 2)}});
  FoldMove loop;
  loop.kind = FoldMove::COLLAPSE;
  loop.e1 = 0;
  CHECK_THROWS_AS(hnn.apply_move(loop), InputError);
}

TEST_CASE("subdivide move", "[gog]") {
  FoldMove m;
  m.kind = FoldMove::SUBDIVIDE;
  m.e1 = 0;
  GraphOfGroups g = folded_fixture().apply_move(m);
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(g.vertex_group(2).same_subgroup(sg({"a"}, 3)));
  CHECK(g.validate().ok);
  // subdivision does not change the monitors that matter
  CHECK(g.monitor().betti == folded_fixture().monitor().betti);
  CHECK(g.monitor().w_count == folded_fixture().monitor().w_count);
}

TEST_CASE("fold move with certificate", "[gog]") {
  FoldMove m;
  m.kind = FoldMove::FOLD;
  m.e1 = 0;
  m.e2 = 1;
  GraphOfGroups g = two_edge_fixture().apply_move(m);
  CHECK(m.cert.ok);
  CHECK(g.vertex_count() == 2);
  CHECK(g.edge_count() == 1);
  CHECK(g.edge(0).group.same_subgroup(sg({"a"}, 3)));
  CHECK(g.vertex_group(1).same_subgroup(sg({"a", "c"}, 3)));
  CHECK(g.isomorphic(folded_fixture()));
  CHECK(g.validate().ok);
}

TEST_CASE("fold with a conjugator", "[gog]") {
  // second edge carries b^-1 a b; conjugating by b matches the first edge
  GraphOfGroups g = GraphOfGroups::make(
      {sg({"a", "b"}, 3), sg({"a", "c"}, 3), sg({"Bab"}, 3)},
      {{0, 1, sg({"a"}, 3)}, {0, 2, sg({"Bab"}, 3)}});
  REQUIRE(g.validate().ok);
  FoldMove m;
  m.kind = FoldMove::FOLD;
  m.e1 = 0;
  m.e2 = 1;
  m.conj = Word::parse("b");
  GraphOfGroups h = g.apply_move(m);
  CHECK(m.cert.ok);
  CHECK(h.edge(0).group.same_subgroup(sg({"a"}, 3)));

  // without the conjugator the pushed groups differ
  FoldMove bare;
  bare.kind = FoldMove::FOLD;
  bare.e1 = 0;
  bare.e2 = 1;
  CHECK_THROWS_AS(g.apply_move(bare), StarViolation);
  CHECK_FALSE(bare.cert.ok);
  CHECK(bare.cert.witness.str() == "Bab");
}

TEST_CASE("star violation carries a witness", "[gog]") {
  GraphOfGroups g = GraphOfGroups::make(
      {sg({"a", "b"}, 2), sg({"a"}, 2), sg({"b"}, 2)},
      {{0, 1, sg({"a"}, 2)}, {0, 2, sg({"b"}, 2)}});
  FoldMove m;
  m.kind = FoldMove::FOLD;
  m.e1 = 0;
  m.e2 = 1;
  CHECK_THROWS_AS(g.apply_move(m), StarViolation);
  CHECK_FALSE(m.cert.ok);
  CHECK(m.cert.witness.str() == "b");
}

TEST_CASE("group fold", "[gog]") {
  FoldMove m;
  m.kind = FoldMove::GROUPFOLD;
  m.vertex = 1;
  m.killed = {Word::parse("b")};
  GraphOfGroups g = segment_fixture().apply_move(m);
  CHECK(g.vertex_group(1).same_subgroup(sg({"a"}, 2)));
  CHECK(g.edge(0).group.same_subgroup(sg({"a"}, 2)));
  CHECK(g.validate().ok);

  FoldMove not_basis;
  not_basis.kind = FoldMove::GROUPFOLD;
  not_basis.vertex = 1;
  not_basis.killed = {Word::parse("ab")};
  CHECK_THROWS_AS(segment_fixture().apply_move(not_basis), NotRealizable);

  FoldMove outside;
  outside.kind = FoldMove::GROUPFOLD;
  outside.vertex = 0;
  outside.killed = {Word::parse("b")};
  CHECK_THROWS_AS(segment_fixture().apply_move(outside), InputError);
}

TEST_CASE("group fold that breaks the far inclusion", "[gog]") {
  GraphOfGroups g = GraphOfGroups::make({sg({"a", "b"}, 2), sg({"ab"}, 2)},
                                        {{0, 1, sg({"ab"}, 2)}});
  REQUIRE(g.validate().ok);
  FoldMove m;
  m.kind = FoldMove::GROUPFOLD;
  m.vertex = 0;
  m.killed = {Word::parse("b")};
  CHECK_THROWS_AS(g.apply_move(m), NotRealizable);
}

TEST_CASE("fold decomposition: identity is empty", "[gog]") {
  GraphOfGroups g = folded_fixture();
  MorphismSpec spec =
      MorphismSpec::identity_images(g, g, {0, 1}, {{+1}});
  CHECK(fold_decompose(spec).empty());
}

TEST_CASE("fold decomposition: pure collapse", "[gog]") {
  GraphOfGroups src = segment_fixture();
  GraphOfGroups tgt = GraphOfGroups::make({sg({"a", "b"}, 2)}, {});
  MorphismSpec spec = MorphismSpec::identity_images(src, tgt, {0, 0}, {{}});
  std::vector<FoldMove> moves = fold_decompose(spec);
  REQUIRE(moves.size() == 1);
  CHECK(moves[0].kind == FoldMove::COLLAPSE);
  check_replay_monotone(src, moves, tgt);
}

TEST_CASE("fold decomposition: pure fold", "[gog]") {
  GraphOfGroups src = two_edge_fixture();
  GraphOfGroups tgt = folded_fixture();
  MorphismSpec spec =
      MorphismSpec::identity_images(src, tgt, {0, 1, 1}, {{+1}, {+1}});
  std::vector<FoldMove> moves = fold_decompose(spec);
  REQUIRE(moves.size() == 1);
  CHECK(moves[0].kind == FoldMove::FOLD);
  CHECK(moves[0].cert.ok);
  check_replay_monotone(src, moves, tgt);
}

TEST_CASE("fold decomposition: collapse then group fold", "[gog]") {
  // <a> --<a>-- <a,b> --<a>-- <a,c>, collapse the first edge, then kill b
  GraphOfGroups src = GraphOfGroups::make(
      {sg({"a"}, 3), sg({"a", "b"}, 3), sg({"a", "c"}, 3)},
      {{0, 1, sg({"a"}, 3)}, {1, 2, sg({"a"}, 3)}});
  GraphOfGroups tgt = GraphOfGroups::make({sg({"a"}, 3), sg({"a", "c"}, 3)},
                                          {{0, 1, sg({"a"}, 3)}});
  MorphismSpec spec =
      MorphismSpec::identity_images(src, tgt, {0, 0, 1}, {{}, {+1}});
  spec.killed[1] = {Word::parse("b")};
  spec.vimages[1] = {Word::parse("a"), Word()};
  std::vector<FoldMove> moves = fold_decompose(spec);
  REQUIRE(moves.size() == 2);
  CHECK(moves[0].kind == FoldMove::COLLAPSE);
  CHECK(moves[1].kind == FoldMove::GROUPFOLD);
  check_replay_monotone(src, moves, tgt);
}

TEST_CASE("fold decomposition: subdivision for long edge paths", "[gog]") {
  GraphOfGroups src = folded_fixture();
  GraphOfGroups tgt = GraphOfGroups::make(
      {sg({"a", "b"}, 3), sg({"a", "c"}, 3), sg({"a"}, 3)},
      {{0, 2, sg({"a"}, 3)}, {2, 1, sg({"a"}, 3)}});
  MorphismSpec spec =
      MorphismSpec::identity_images(src, tgt, {0, 1}, {{+1, +2}});
  std::vector<FoldMove> moves = fold_decompose(spec);
  REQUIRE(moves.size() == 1);
  CHECK(moves[0].kind == FoldMove::SUBDIVIDE);
  check_replay_monotone(src, moves, tgt);
}

TEST_CASE("graph of groups isomorphism is label-aware", "[gog]") {
  GraphOfGroups a = folded_fixture();
  // same shape, permuted vertex order
  GraphOfGroups b = GraphOfGroups::make({sg({"a", "c"}, 3), sg({"a", "b"}, 3)},
                                        {{1, 0, sg({"a"}, 3)}});
  CHECK(a.isomorphic(b));
  GraphOfGroups c = GraphOfGroups::make({sg({"a", "b"}, 3), sg({"a", "c"}, 3)},
                                        {{0, 1, sg({"c"}, 3)}});
  CHECK_FALSE(a.isomorphic(c));
}

TEST_CASE("scott pipeline: constant free splitting", "[gog]") {
  GraphOfGroups level = GraphOfGroups::make(
      {sg({"a"}, 2), sg({"b"}, 2)}, {{0, 1, SubgroupGraph::trivial_subgroup(2)}});
  MorphismSpec id = MorphismSpec::identity_images(level, level, {0, 1}, {{+1}});
  PipelineResult r = scott_pipeline({level, level, level}, {id, id});
  REQUIRE(r.trace.size() == 3);
  for (const ScottMonitor& m : r.trace) {
    CHECK(m.betti == 0);
    CHECK(m.w_count == 2);
  }
  CHECK(r.stable_from == 0);
  CHECK(r.limit_group.is_trivial());
  CHECK(r.limit_group.same_subgroup(level.edge(0).group));
  for (const Word& w : r.hyperbolic_witness) CHECK_FALSE(w.trivial());
}

TEST_CASE("scott pipeline: fold drops the w count once", "[gog]") {
  GraphOfGroups l0 = two_edge_fixture();
  GraphOfGroups l1 = folded_fixture();
  MorphismSpec m0 =
      MorphismSpec::identity_images(l0, l1, {0, 1, 1}, {{+1}, {+1}});
  MorphismSpec m1 = MorphismSpec::identity_images(l1, l1, {0, 1}, {{+1}});
  PipelineResult r = scott_pipeline({l0, l1, l1}, {m0, m1});
  std::vector<int> w;
  for (const ScottMonitor& m : r.trace) w.push_back(m.w_count);
  CHECK(w == std::vector<int>{3, 2, 2});
  CHECK(r.stable_from == 1);
  CHECK(r.limit_group.same_subgroup(sg({"a"}, 3)));
}

TEST_CASE("scott pipeline: growing edge group is flagged", "[gog]") {
  GraphOfGroups l0 = GraphOfGroups::make({sg({"a", "b"}, 3), sg({"a", "bb"}, 3)},
                                         {{0, 1, sg({"a"}, 3)}});
  GraphOfGroups l1 = GraphOfGroups::make({sg({"a", "b"}, 3), sg({"a", "bb"}, 3)},
                                         {{0, 1, sg({"a", "bb"}, 3)}});
  MorphismSpec m = MorphismSpec::identity_images(l0, l1, {0, 1}, {{+1}});
  try {
    scott_pipeline({l0, l1}, {m});
    FAIL("expected MonotonicityViolation");
  } catch (const MonotonicityViolation& e) {
    CHECK(std::string(e.what()).find("witness bb") != std::string::npos);
  }
}

TEST_CASE("monitor csv", "[gog]") {
  std::vector<ScottMonitor> t = {segment_fixture().monitor(),
                                 segment_fixture().monitor()};
  std::string csv = monitor_csv(t);
  CHECK(csv.find("level,betti,w_count,ell_witnesses\n") == 0);
  CHECK(csv.find("0,0,1,2\n") != std::string::npos);
  CHECK(csv.find("1,0,1,2\n") != std::string::npos);
}
