#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracle_free_group.hpp"
#include "rtreelab/subgroup_graph.hpp"
#include "rtreelab/word.hpp"

using namespace rtreelab;

namespace {

Word W(const std::string& s) { return Word::parse(s); }

// The recursion pattern y -> y x y y, written over {a=x, b=y}.
const char* kPattern = "babb";

Word chain_word(int i) {  // b_1 = babb, b_{i+1} = pattern(a, b_i)
  Word b = W("b");
  for (int k = 0; k < i; ++k) b = W(kPattern).substitute({W("a"), b});
  return b;
}

SubgroupGraph chain_group(int i) {  // M_i = <a, b_i>
  return SubgroupGraph::from_generators({W("a"), chain_word(i)}, 2);
}

Word random_reduced(std::mt19937& rng, int rank, int len) {
  std::uniform_int_distribution<int> gen(0, rank - 1), sgn(0, 1);
  Word w;
  while (static_cast<int>(w.length()) < len) {
    Letter l{gen(rng), sgn(rng) ? 1 : -1};
    if (w.length() > 0 && w.letters().back() == l.inverse()) continue;
    w.push_reduce(l);
  }
  return w;
}

}  // namespace

TEST_CASE("word algebra basics", "[freegrp]") {
  CHECK(W("abBA").trivial());
  CHECK((W("ab") * W("BA")).trivial());
  CHECK(W("ab").inverse().str() == "BA");
  CHECK(W("ab").pow(3).str() == "ababab");
  CHECK(W("ab").pow(-2).str() == "BABA");
  CHECK(W("b").conjugate_by(W("a")).str() == "abA");
  auto [core, conj] = W("AbabBa").cyclic_reduce();
  CHECK(core.str() == "ba");
  CHECK((conj * core * conj.inverse()) == W("AbabBa"));
}

TEST_CASE("chain words grow without cancellation", "[freegrp]") {
  CHECK(chain_word(1).str() == "babb");
  CHECK(chain_word(2).str() == "babbababbbabb");
  size_t prev = 1;
  for (int i = 1; i <= 6; ++i) {
    size_t len = chain_word(i).length();
    CHECK(len == 3 * prev + 1);  // |pattern(a, w)| = 3|w| + 1, no cancellation
    prev = len;
  }
}

TEST_CASE("substitution a,b -> a,babb never cancels", "[freegrp]") {
  std::mt19937 rng(7);
  for (int t = 0; t < 200; ++t) {
    Word w = random_reduced(rng, 2, 1 + t % 10);
    size_t xs = 0, ys = 0;
    for (const Letter& l : w.letters()) (l.gen == 0 ? xs : ys)++;
    CHECK(w.substitute({W("a"), W("babb")}).length() == xs + 4 * ys);
  }
}

TEST_CASE("stallings graph of the first chain group", "[freegrp]") {
  SubgroupGraph m1 = chain_group(1);
  CHECK(m1.vertex_count() == 4);
  CHECK(m1.edge_count() == 5);
  CHECK(m1.rank() == 2);
  auto basis = m1.free_basis();
  REQUIRE(basis.size() == 2);
  CHECK(basis[0].str() == "a");
  CHECK(basis[1].str() == "babb");
}

TEST_CASE("stallings basics and degenerate inputs", "[freegrp]") {
  CHECK(SubgroupGraph::trivial_subgroup(2).rank() == 0);
  CHECK(SubgroupGraph::full_group(2).rank() == 2);
  CHECK(SubgroupGraph::full_group(2).vertex_count() == 1);
  SubgroupGraph a1 = SubgroupGraph::from_generators({W("a"), Word(), W("A")}, 2);
  CHECK(a1.rank() == 1);
  CHECK(a1.vertex_count() == 1);
  CHECK_THROWS_AS(SubgroupGraph::from_generators({W("c")}, 2), InputError);
  // generators that fold down: <ab, a> has basis {a, b}
  SubgroupGraph g = SubgroupGraph::from_generators({W("ab"), W("a")}, 2);
  CHECK(g.same_subgroup(SubgroupGraph::full_group(2)));
}

TEST_CASE("membership along the chain", "[freegrp]") {
  SubgroupGraph m1 = chain_group(1), m2 = chain_group(2);
  CHECK(m1.contains(W("a")));
  CHECK(m1.contains(W("babb")));
  CHECK(!m1.contains(W("b")));
  CHECK(!m1.contains(W("ba")));
  CHECK(m2.contains(chain_word(2)));
  CHECK(m1.contains(chain_word(2)));   // M_2 < M_1
  CHECK(!m2.contains(chain_word(1)));  // strictly
  CHECK(m1.contains(Word()));
}

TEST_CASE("rewrite in the spanning-tree basis is self-similar", "[freegrp]") {
  SubgroupGraph m1 = chain_group(1);
  // b_2 in the basis {a, babb} of M_1 reads exactly like b_1 in {a, b}.
  CHECK(m1.rewrite_in_basis(chain_word(2)).str() == "babb");
  CHECK(m1.rewrite_in_basis(W("a")).str() == "a");
  CHECK_THROWS_AS(m1.rewrite_in_basis(W("b")), NotAMember);
  std::mt19937 rng(3);
  for (int t = 0; t < 50; ++t) {
    Word wb = random_reduced(rng, 2, 1 + t % 6);
    Word wf = m1.expand_from_basis(wb);
    CHECK(m1.contains(wf));
    CHECK(m1.rewrite_in_basis(wf) == wb);
  }
}

TEST_CASE("intersection agrees with membership in both factors", "[freegrp]") {
  SubgroupGraph m2 = chain_group(2);
  SubgroupGraph a = SubgroupGraph::from_generators({W("a")}, 2);
  SubgroupGraph b = SubgroupGraph::from_generators({W("b")}, 2);
  CHECK(SubgroupGraph::intersect(m2, a).same_subgroup(a));
  CHECK(SubgroupGraph::intersect(a, b).is_trivial());
  CHECK(SubgroupGraph::intersect(m2, m2).same_subgroup(m2));
  SubgroupGraph m1 = chain_group(1);
  CHECK(SubgroupGraph::intersect(m1, m2).same_subgroup(m2));
}

TEST_CASE("random membership agrees with the Nielsen oracle", "[freegrp]") {
  std::mt19937 rng(0);
  int checked = 0;
  for (int s = 0; s < 25; ++s) {
    std::vector<Word> gens = {random_reduced(rng, 2, 4 + s % 3),
                              random_reduced(rng, 2, 4 + (s + 1) % 3)};
    oracle::Subgroup ref(gens);
    bool small = false;
    for (const Word& u : ref.basis) small |= u.length() < 3;
    if (small || ref.basis.empty()) continue;  // keep the oracle search bounded
    SubgroupGraph g = SubgroupGraph::from_generators(gens, 2);
    CHECK(g.rank() == ref.rank());
    for (const Word& u : ref.basis) CHECK(g.contains(u));
    for (int t = 0; t < 12; ++t) {
      Word w = random_reduced(rng, 2, 1 + t % 8);
      CHECK(g.contains(w) == ref.member(w));
      ++checked;
    }
    // certified members: random products of the basis
    Word prod;
    for (int t = 0; t < 4; ++t)
      prod = prod * ref.basis[rng() % ref.basis.size()].pow(1 - 2 * (rng() % 2));
    CHECK(g.contains(prod));
  }
  CHECK(checked >= 100);
}

TEST_CASE("random intersections agree with the oracle", "[freegrp]") {
  std::mt19937 rng(11);
  for (int s = 0; s < 12; ++s) {
    std::vector<Word> ga = {random_reduced(rng, 2, 4), random_reduced(rng, 2, 5)};
    std::vector<Word> gb = {random_reduced(rng, 2, 4), random_reduced(rng, 2, 5)};
    oracle::Subgroup ra(ga), rb(gb);
    bool small = false;
    for (const Word& u : ra.basis) small |= u.length() < 3;
    for (const Word& u : rb.basis) small |= u.length() < 3;
    if (small || ra.basis.empty() || rb.basis.empty()) continue;
    SubgroupGraph a = SubgroupGraph::from_generators(ga, 2);
    SubgroupGraph b = SubgroupGraph::from_generators(gb, 2);
    SubgroupGraph meet = SubgroupGraph::intersect(a, b);
    for (const Word& u : meet.free_basis()) {
      CHECK(ra.member(u));
      CHECK(rb.member(u));
    }
    for (int t = 0; t < 10; ++t) {
      Word w = random_reduced(rng, 2, 1 + t % 7);
      CHECK(meet.contains(w) == (ra.member(w) && rb.member(w)));
    }
  }
}

TEST_CASE("malnormality verdicts with verified witnesses", "[freegrp]") {
  SubgroupGraph f2 = SubgroupGraph::full_group(2);

  SubgroupGraph h = SubgroupGraph::from_generators({W("aa"), W("b")}, 2);
  auto rep = h.malnormal_in(f2);
  REQUIRE(!rep.malnormal);
  CHECK(!h.contains(rep.witness));
  SubgroupGraph meet = SubgroupGraph::intersect(h, h.conjugate(rep.witness));
  CHECK(meet.rank() >= 1);
  CHECK(meet.rank() == rep.meet_rank);
  CHECK(!rep.meet_element.trivial());
  CHECK(h.contains(rep.meet_element));

  SubgroupGraph c = SubgroupGraph::from_generators({W("aa")}, 2);
  auto rep2 = c.malnormal_in(f2);
  REQUIRE(!rep2.malnormal);
  CHECK(!c.contains(rep2.witness));
  CHECK(SubgroupGraph::intersect(c, c.conjugate(rep2.witness)).rank() >= 1);

  SubgroupGraph ab = SubgroupGraph::from_generators({W("ab")}, 2);
  CHECK(ab.malnormal_in(f2).malnormal);
  SubgroupGraph a = SubgroupGraph::from_generators({W("a")}, 2);
  CHECK(a.malnormal_in(f2).malnormal);
}

TEST_CASE("malnormal verdict true is confirmed by bounded search", "[freegrp]") {
  SubgroupGraph f2 = SubgroupGraph::full_group(2);
  SubgroupGraph ab = SubgroupGraph::from_generators({W("ab")}, 2);
  REQUIRE(ab.malnormal_in(f2).malnormal);
  std::vector<Word> layer{Word()};
  for (int len = 0; len <= 4; ++len) {
    std::vector<Word> next;
    for (const Word& g : layer) {
      if (!g.trivial() && !ab.contains(g))
        CHECK(SubgroupGraph::intersect(ab, ab.conjugate(g)).is_trivial());
      for (int x = 0; x < 2; ++x)
        for (int e : {1, -1}) {
          Word w = g;
          if (w.length() > 0 && w.letters().back() == Letter{x, -e}) continue;
          w.push_reduce({x, e});
          if (w.length() == g.length() + 1) next.push_back(w);
        }
    }
    layer = std::move(next);
  }
}

TEST_CASE("malnormality in a proper ambient subgroup", "[freegrp]") {
  SubgroupGraph amb = SubgroupGraph::from_generators({W("aa"), W("b")}, 2);

  // <a^2> is malnormal in <a^2, b> even though it is not in F_2: the F_2
  // witness a does not belong to the ambient group.
  SubgroupGraph c = SubgroupGraph::from_generators({W("aa")}, 2);
  CHECK(c.malnormal_in(amb).malnormal);
  CHECK(!c.malnormal_in(SubgroupGraph::full_group(2)).malnormal);

  // <a^4, b> inside <a^2, b> mirrors the <x^2, y> in F(x,y) pattern; the
  // witness must come back expanded in F_2 letters.
  SubgroupGraph h = SubgroupGraph::from_generators({W("aaaa"), W("b")}, 2);
  auto rep = h.malnormal_in(amb);
  REQUIRE(!rep.malnormal);
  CHECK(amb.contains(rep.witness));
  CHECK(!h.contains(rep.witness));
  CHECK(SubgroupGraph::intersect(h, h.conjugate(rep.witness)).rank() >= 1);

  SubgroupGraph b = SubgroupGraph::from_generators({W("b")}, 2);
  CHECK(b.malnormal_in(amb).malnormal);
  SubgroupGraph out = SubgroupGraph::from_generators({W("ab")}, 2);
  CHECK_THROWS_AS(out.malnormal_in(c), NotASubgroup);
}

TEST_CASE("conjugates and conjugacy detection", "[freegrp]") {
  SubgroupGraph m1 = chain_group(1);
  SubgroupGraph conj = m1.conjugate(W("ba"));
  CHECK(conj.contains(W("babb").conjugate_by(W("ba"))));
  CHECK(conj.conjugate(W("ba").inverse()).same_subgroup(m1));
  CHECK(!conj.same_subgroup(m1));

  SubgroupGraph ab = SubgroupGraph::from_generators({W("ab")}, 2);
  CHECK(ab.contains_conjugate(W("ba")));
  CHECK(ab.contains_conjugate(W("Aba.a")));  // conjugate of ba
  CHECK(!ab.contains_conjugate(W("a")));
  CHECK(ab.contains_conjugate(Word()));
}

TEST_CASE("coset neighbors of an index-two subgroup", "[freegrp]") {
  SubgroupGraph f2 = SubgroupGraph::full_group(2);
  SubgroupGraph k = SubgroupGraph::from_generators({W("a"), W("bb"), W("baB")}, 2);
  auto reps = f2.coset_neighbors(k, 2);
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].trivial());
  CHECK(reps[1].str() == "b");
  CHECK_THROWS_AS(k.coset_neighbors(f2, 2), NotASubgroup);

  // join gives back the big group
  CHECK(SubgroupGraph::join(k, SubgroupGraph::from_generators({W("b")}, 2))
            .same_subgroup(f2));
}

TEST_CASE("canonical form is construction independent", "[freegrp]") {
  SubgroupGraph g1 = SubgroupGraph::from_generators({W("a"), W("babb")}, 2);
  SubgroupGraph g2 = SubgroupGraph::from_generators({W("babb"), W("A")}, 2);
  CHECK(g1.same_subgroup(g2));
  CHECK(g1.dot() == g2.dot());
  SubgroupGraph g3 =
      SubgroupGraph::from_generators({W("babb"), W("a"), W("babb") * W("a")}, 2);
  CHECK(g1.same_subgroup(g3));
}
