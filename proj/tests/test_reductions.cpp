#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "factrel/error.hpp"
#include "factrel/reductions.hpp"
#include "factrel/sjw.hpp"
#include "factrel/supports.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace factrel;

namespace {

bool satisfiable(const CnfFormula& phi) {
  for (std::uint32_t m = 0; m < (1U << phi.num_vars); ++m) {
    bool all = std::all_of(phi.clauses.begin(), phi.clauses.end(), [&](const std::vector<int>& c) {
      return std::any_of(c.begin(), c.end(), [&](int lit) {
        bool value = m >> (std::abs(lit) - 1) & 1U;
        return lit > 0 ? value : !value;
      });
    });
    if (all) return true;
  }
  return false;
}

bool hamiltonian_path(const Digraph& g, const std::string& s, const std::string& t) {
  std::vector<std::string> vs(g.vertices.begin(), g.vertices.end());
  do {
    if (vs.front() != s || vs.back() != t) continue;
    bool ok = true;
    for (std::size_t i = 0; i + 1 < vs.size() && ok; ++i) ok = g.edges.contains({vs[i], vs[i + 1]});
    if (ok) return true;
  } while (std::next_permutation(vs.begin(), vs.end()));
  return false;
}

/// Does some simple s→t path use the edge?
bool on_simple_path(const Digraph& g, const std::string& s, const std::string& t, const Edge& e) {
  std::set<std::string> seen{s};
  std::function<bool(const std::string&, bool)> dfs = [&](const std::string& v, bool used) {
    if (v == t) return used;
    for (const auto& [a, b] : g.edges) {
      if (a != v || seen.contains(b)) continue;
      seen.insert(b);
      bool found = dfs(b, used || Edge{a, b} == e);
      seen.erase(b);
      if (found) return true;
    }
    return false;
  };
  return dfs(s, false);
}

Digraph random_digraph(std::mt19937& rng, int vertices, int edges, bool loops) {
  std::uniform_int_distribution<int> v(0, vertices - 1);
  Digraph g;
  for (int i = 0; i < edges; ++i) {
    int a = v(rng), b = v(rng);
    if (a == b && !loops) continue;
    g.add_edge("v" + std::to_string(a), "v" + std::to_string(b));
  }
  return g;
}

}  // namespace

TEST_CASE("digraph and DIMACS text formats") {
  Digraph g = parse_digraph("a -> b\n# comment\nb->c\n\nc -> a\n");
  CHECK(g.edges.size() == 3);
  CHECK(g.vertices == std::set<std::string>{"a", "b", "c"});
  CHECK(parse_digraph(to_string(g)) == g);
  CHECK_FALSE(g.has_loop());
  CHECK_THROWS_AS(parse_digraph("a -> "), ParseError);
  CHECK_THROWS_AS(parse_digraph("a b"), ParseError);

  CnfFormula phi = parse_dimacs("c example\np cnf 3 2\n1 -2 0\n2 3\n0\n");
  CHECK(phi.num_vars == 3);
  CHECK(phi.clauses == std::vector<std::vector<int>>{{1, -2}, {2, 3}});
  CnfFormula again = parse_dimacs(to_dimacs(phi));
  CHECK(again.clauses == phi.clauses);
  CHECK_THROWS_AS(parse_dimacs("1 2 0"), ParseError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 1 1\n2 0\n"), ParseError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 1 2\n1 0\n"), ParseError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 1 1\nx 0\n"), ParseError);
}

TEST_CASE("evaluation reduces to relevance") {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> c(0, 2), rel(0, 1), t(0, 2);
  for (int round = 0; round < 150; ++round) {
    std::vector<Fact> fs;
    for (int i = 0; i < 1 + round % 4; ++i)
      fs.push_back(Fact{rel(rng) ? "R" : "S", {Term::constant("c" + std::to_string(c(rng))),
                                               Term::constant("c" + std::to_string(c(rng)))}});
    std::vector<Atom> as;
    for (int i = 0; i < 1 + round % 3; ++i)
      as.push_back(Atom{rel(rng) ? "R" : "S", {Term::variable("x" + std::to_string(t(rng))),
                                               Term::variable("x" + std::to_string(t(rng)))}});
    CQ q(as);
    Database d(fs);
    RelevanceInstance inst = eval_to_relevance(q, d);
    CHECK(inst.data.contains(inst.fact));
    CHECK(oracle::relevant(inst.fact, inst.query, inst.data) == oracle::entails(d, q));
  }
  RelevanceInstance empty = eval_to_relevance(CQ(), parse_database("R(a,b)"));
  CHECK(oracle::relevant(empty.fact, empty.query, empty.data));
}

TEST_CASE("SAT reduces to atomic-query relevance") {
  HornAqInstance one = sat_to_aq_relevance(parse_dimacs("p cnf 1 1\n1 0\n"));
  CHECK(one.abox.size() == 3);
  CHECK(one.fact == parse_atom("X(d)"));
  CHECK(std::find(one.tbox.begin(), one.tbox.end(), HornRule{{"X", "C1"}, "A"}) != one.tbox.end());
  CHECK(std::find(one.tbox.begin(), one.tbox.end(), HornRule{{"P1", "N1"}, "A"}) != one.tbox.end());
  CHECK(horn_relevance_bruteforce(one));
  CHECK_FALSE(horn_relevance_bruteforce(sat_to_aq_relevance(parse_dimacs("p cnf 1 2\n1 0\n-1 0\n"))));
  CHECK(to_string(HornRule{{"X", "C1"}, "A"}) == "X and C1 sub A");

  std::mt19937 rng(5);
  std::uniform_int_distribution<int> var(1, 3), sign(0, 1), len(1, 3), count(0, 4);
  int sat = 0;
  for (int round = 0; round < 300; ++round) {
    CnfFormula phi;
    phi.num_vars = 3;
    for (int j = count(rng); j > 0; --j) {
      std::vector<int> clause;
      for (int k = len(rng); k > 0; --k) clause.push_back(sign(rng) ? var(rng) : -var(rng));
      phi.clauses.push_back(clause);
    }
    bool expected = satisfiable(phi);
    sat += expected;
    CHECK(horn_relevance_bruteforce(sat_to_aq_relevance(phi)) == expected);
  }
  CHECK(sat > 50);
  CHECK(sat < 300);
}

TEST_CASE("reachability reduces to EL relevance") {
  Digraph path = parse_digraph("s -> v1\nv1 -> v2\nv2 -> t\n");
  CHECK(el_relevance_bruteforce(reach_to_el_relevance(path, "s", "t", {"v1", "v2"})));
  Digraph detour = parse_digraph("s -> t\nt -> w\nw -> s\n");
  // t -> w -> s only returns to s, so it is on no simple s→t path.
  CHECK_FALSE(el_relevance_bruteforce(reach_to_el_relevance(detour, "s", "t", {"t", "w"})));
  Digraph unreachable = parse_digraph("s -> a\nb -> t\n");
  CHECK_FALSE(el_relevance_bruteforce(reach_to_el_relevance(unreachable, "s", "t", {"s", "a"})));
  CHECK_THROWS_AS(reach_to_el_relevance(path, "s", "t", {"s", "t"}), InvalidArgument);

  std::mt19937 rng(8);
  int positive = 0;
  for (int round = 0; round < 300; ++round) {
    Digraph g = random_digraph(rng, 5, 2 + round % 7, true);
    if (g.edges.empty()) continue;
    std::vector<std::string> vs(g.vertices.begin(), g.vertices.end());
    std::string s = vs[round % vs.size()], t = vs[(round / 3) % vs.size()];
    for (const Edge& e : g.edges) {
      bool expected = on_simple_path(g, s, t, e);
      positive += expected;
      CHECK(el_relevance_bruteforce(reach_to_el_relevance(g, s, t, e)) == expected);
    }
  }
  CHECK(positive > 50);
}

TEST_CASE("Hamiltonian path reduces to chain relevance") {
  Digraph path = parse_digraph("s -> m\nm -> t\n");
  RelevanceInstance inst = hampath_to_chain_relevance(path, "s", "t");
  CHECK(inst.query.size() == 4);
  CHECK(inst.data.size() == 4);
  CHECK(relevant_bruteforce(inst.fact, inst.query, inst.data));
  CHECK(oracle::relevant(inst.fact, inst.query, inst.data));

  Digraph star = parse_digraph("s -> a\ns -> b\ns -> t\n");
  CHECK_FALSE(hamiltonian_path(star, "s", "t"));
  RelevanceInstance no = hampath_to_chain_relevance(star, "s", "t");
  CHECK_FALSE(relevant_bruteforce(no.fact, no.query, no.data));
  CHECK_THROWS_AS(hampath_to_chain_relevance(path, "s", "s"), InvalidArgument);
  CHECK_THROWS_AS(hampath_to_chain_relevance(path, "s", "x"), InvalidArgument);

  std::mt19937 rng(13);
  int positive = 0;
  for (int round = 0; round < 300; ++round) {
    Digraph g = random_digraph(rng, 4, 3 + round % 8, false);
    if (g.vertices.size() < 2) continue;
    std::vector<std::string> vs(g.vertices.begin(), g.vertices.end());
    std::string s = vs[0], t = vs[1 + round % (vs.size() - 1)];
    bool expected = hamiltonian_path(g, s, t);
    positive += expected;
    RelevanceInstance r = hampath_to_chain_relevance(g, s, t);
    CHECK(relevant_bruteforce(r.fact, r.query, r.data) == expected);
  }
  CHECK(positive > 20);
}

TEST_CASE("removing self-joins preserves relevance") {
  CQ chain = parse_cq("R(?x,?y), R(?y,?z)");
  Database d = parse_database(fixture("relevance_example.db"));
  SelfJoinFreeOmq out = remove_selfjoins(chain, d);
  CHECK(out.omq.query.atoms() == parse_cq("R_1(?x,?y), R_2(?y,?z)").atoms());
  CHECK(out.omq.tbox.size() == 2);
  CHECK(out.omq.tbox.entails(Role{"R", false}, Role{"R_1", false}));
  CHECK(out.abox == d);
  CHECK(self_join_width(out.omq.query) == 0);
  CHECK(interaction_width(out.omq) > 0);
  for (const Fact& f : d.facts())
    CHECK(relevance_omq(f, out.omq, out.abox).relevant == oracle::relevant(f, chain, d));

  CHECK_THROWS_AS(remove_selfjoins(parse_cq("T(?x,?y,?z)"), d), InvalidArgument);
  CHECK_THROWS_AS(remove_selfjoins(parse_cq("R(?x,?y), ?x != ?y"), d), InvalidArgument);

  std::mt19937 rng(21);
  std::uniform_int_distribution<int> c(0, 2), rel(0, 2), t(0, 2);
  const char* names[] = {"R", "S", "A"};
  for (int round = 0; round < 150; ++round) {
    std::vector<Fact> fs;
    auto k = [&] { return Term::constant("c" + std::to_string(c(rng))); };
    auto v = [&] { return Term::variable("x" + std::to_string(t(rng))); };
    for (int i = 0; i < 2 + round % 4; ++i) {
      int r = rel(rng);
      fs.push_back(r == 2 ? Fact{"A", {k()}} : Fact{names[r], {k(), k()}});
    }
    std::vector<Atom> as;
    for (int i = 0; i < 1 + round % 3; ++i) {
      int r = rel(rng);
      as.push_back(r == 2 ? Atom{"A", {v()}} : Atom{names[r], {v(), v()}});
    }
    CQ q(as);
    Database db(fs);
    SelfJoinFreeOmq sjf = remove_selfjoins(q, db);
    CHECK(self_join_width(sjf.omq.query) == 0);
    InteractionInfo info = analyze_interactions(sjf.omq);
    if (info.int_atoms.size() > kDefaultInteractionWidthCap) continue;
    for (const Fact& f : db.facts())
      CHECK(relevance_omq(f, sjf.omq, sjf.abox, info).relevant == oracle::relevant(f, q, db));
  }
}

TEST_CASE("CQ and DMH translate into each other") {
  RelevanceInstance rel{parse_cq(fixture("relevance_example.cq")), parse_database(fixture("relevance_example.db")),
                        parse_atom("R(c,d)")};
  DmhInstance dmh = relevance_to_dmh(rel);
  CHECK(dmh.pattern.edges == std::set<Edge>{{"x", "y"}, {"y", "z"}});
  CHECK(dmh.host.edges.size() == 4);
  CHECK(dmh.edge == Edge{"c", "d"});
  CHECK(database_of(dmh.host) == rel.data);
  CHECK(digraph_of(cq_of(dmh.pattern)) == dmh.pattern);
  RelevanceInstance back = dmh_to_relevance(dmh);
  CHECK(back.data == rel.data);
  CHECK(back.query == rel.query);

  // Verdicts of the relevance example: f1, f2, f3 relevant, f4 not.
  for (const auto& [f, expected] : std::vector<std::pair<std::string, bool>>{
           {"R(a,b)", true}, {"R(b,e)", true}, {"R(c,c)", true}, {"R(c,d)", false}}) {
    rel.fact = parse_atom(f);
    CHECK(dmh_bruteforce(relevance_to_dmh(rel)) == expected);
  }

  CHECK_THROWS_AS(digraph_of(parse_cq("R(?x,a)")), InvalidArgument);
  CHECK_THROWS_AS(digraph_of(parse_cq("R(?x,?y), S(?y,?z)")), InvalidArgument);
  CHECK_THROWS_AS(digraph_of(parse_cq("R(?x)")), InvalidArgument);

  // Single edge into two disjoint edges: both are minimal images.
  DmhInstance single{parse_digraph("x -> y"), parse_digraph("a -> b\nc -> d"), {"a", "b"}};
  CHECK(dmh_bruteforce(single));
  single.edge = {"c", "d"};
  CHECK(dmh_bruteforce(single));
  // A chain into a cycle with a tail: the tail edge lies only on images
  // that strictly contain the cycle.
  DmhInstance tail{parse_digraph("x -> y\ny -> z\nz -> w"), parse_digraph("a -> b\nb -> a\nc -> a"), {"c", "a"}};
  CHECK_FALSE(dmh_bruteforce(tail));
  tail.edge = {"a", "b"};
  CHECK(dmh_bruteforce(tail));

  std::mt19937 rng(34);
  for (int round = 0; round < 300; ++round) {
    Digraph p = random_digraph(rng, 3 + round % 3, 1 + round % 4, true);
    Digraph h = random_digraph(rng, 5, 2 + round % 6, true);
    if (p.edges.empty() || h.edges.empty()) continue;
    for (const Edge& e : h.edges) {
      DmhInstance inst{p, h, e};
      RelevanceInstance r = dmh_to_relevance(inst);
      CHECK(dmh_bruteforce(inst) == oracle::relevant(r.fact, r.query, r.data));
    }
  }
  CHECK_THROWS_AS(dmh_bruteforce(tail, 1), ResourceLimit);
}

TEST_CASE("prime-cycle gadget") {
  CHECK(first_primes(4) == std::vector<std::size_t>{2, 3, 5, 7});
  CHECK(first_primes(6).back() == 13);

  CQ q = parse_cq("R(?x,?y), S(?y,?z)");
  Database d = parse_database("R(a,b)\nS(b,c)\nR(c,c)");
  DmhInstance g = db_to_digraph_gadget(q, d, parse_atom("S(b,c)"));
  CHECK_FALSE(g.host.has_loop());
  CHECK(g.host.edges.contains(g.edge));
  // Anchors lie on both a C5 and a C7; every fact has two paths of length 7.
  const std::size_t anchors = 3, facts = 3;
  std::size_t expected_edges = anchors * (5 + 7) + facts * 2 * 7 + (2 + 3 + 2);
  CHECK(g.host.edges.size() == expected_edges);

  // Vertices on both a C5 and a C7 are exactly the anchors.
  std::set<std::string> on5, on7;
  for (const std::string& v : g.host.vertices) {
    // Walk forward along unique successors for p steps.
    auto on_cycle = [&](std::size_t p) {
      std::function<bool(const std::string&, std::size_t)> walk = [&](const std::string& u, std::size_t left) {
        if (left == 0) return u == v;
        for (const auto& [a, b] : g.host.edges)
          if (a == u && walk(b, left - 1)) return true;
        return false;
      };
      return walk(v, p);
    };
    if (on_cycle(5)) on5.insert(v);
    if (on_cycle(7)) on7.insert(v);
  }
  std::set<std::string> both;
  std::set_intersection(on5.begin(), on5.end(), on7.begin(), on7.end(), std::inserter(both, both.end()));
  CHECK(both == std::set<std::string>{"u_a", "u_b", "u_c"});

  // Isomorphic query and database give the same graph.
  CQ frozen_copy = parse_cq("R(?a,?b), S(?b,?c), R(?c,?c)");
  CHECK(db_to_digraph_gadget(frozen_copy, d, parse_atom("R(a,b)")).pattern == g.host);

  CHECK_THROWS_AS(db_to_digraph_gadget(parse_cq("R(?x,a)"), d, parse_atom("R(a,b)")), InvalidArgument);
  CHECK_THROWS_AS(db_to_digraph_gadget(q, d, parse_atom("R(b,a)")), InvalidArgument);
}

TEST_CASE("prime-cycle gadget preserves relevance") {
  std::vector<std::pair<std::string, std::string>> cases{
      {"R(?x,?y), R(?y,?z)", "R(a,b)\nR(b,e)\nR(c,c)\nR(c,d)"},
      {"R(?x,?y), S(?y,?x)", "R(a,b)\nS(b,a)\nR(a,a)\nS(a,a)"},
      {"R(?x,?y), S(?y,?z)", "R(a,b)\nS(b,c)\nS(a,c)\nR(c,a)"},
      {"R(?x,?y), S(?x,?y)", "R(a,b)\nS(a,b)\nR(b,b)"},
  };
  for (const auto& [qs, ds] : cases) {
    CQ q = parse_cq(qs);
    Database d = parse_database(ds);
    for (const Fact& f : d.facts()) {
      CAPTURE(qs);
      CAPTURE(to_string(f));
      CHECK(dmh_bruteforce(db_to_digraph_gadget(q, d, f)) == oracle::relevant(f, q, d));
    }
  }
}
