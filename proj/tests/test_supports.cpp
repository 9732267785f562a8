#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "factrel/error.hpp"
#include "factrel/supports.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace factrel;

namespace {

struct RelevanceExample {
  CQ q = parse_cq(fixture("relevance_example.cq"));
  Database d = parse_database(fixture("relevance_example.db"));
  Fact f1 = parse_atom("R(a,b)"), f2 = parse_atom("R(b,e)"), f3 = parse_atom("R(c,c)"), f4 = parse_atom("R(c,d)");
};

Database random_db(std::mt19937& rng, int facts) {
  std::uniform_int_distribution<int> rel(0, 1), c(0, 2);
  std::vector<Fact> fs;
  for (int i = 0; i < facts; ++i)
    fs.push_back(Fact{rel(rng) ? "R" : "S", {Term::constant("c" + std::to_string(c(rng))),
                                             Term::constant("c" + std::to_string(c(rng)))}});
  return Database(fs);
}

CQ random_cq(std::mt19937& rng, int atoms) {
  std::uniform_int_distribution<int> rel(0, 1), t(0, 3);
  std::vector<Atom> as;
  auto term = [&] {
    int k = t(rng);
    return k < 3 ? Term::variable("x" + std::to_string(k)) : Term::constant("c0");
  };
  for (int i = 0; i < atoms; ++i) as.push_back(Atom{rel(rng) ? "R" : "S", {term(), term()}});
  return CQ(as);
}

}  // namespace

TEST_CASE("minimal supports of the relevance example") {
  RelevanceExample ex;
  auto supports = minimal_supports(ex.q, ex.d);
  CHECK(supports == std::vector<std::vector<Fact>>{{ex.f1, ex.f2}, {ex.f3}});
  CHECK(minimal_supports(ex.d, cq_oracle(ex.q)) == supports);
}

TEST_CASE("is_minimal_support") {
  RelevanceExample ex;
  auto oracle = cq_oracle(ex.q);
  CHECK(is_minimal_support(Database({ex.f3}), oracle));
  CHECK_FALSE(is_minimal_support(Database({ex.f3, ex.f4}), oracle));
  CHECK_FALSE(is_minimal_support(Database(), oracle));
  CHECK(is_minimal_support(Database({ex.f1, ex.f2}), oracle));
}

TEST_CASE("relevance verdicts of the relevance example") {
  RelevanceExample ex;
  auto oracle = cq_oracle(ex.q);
  for (const Fact& f : {ex.f1, ex.f2, ex.f3}) {
    CHECK(relevant_bruteforce(f, ex.d, oracle));
    CHECK(relevant_bruteforce(f, ex.q, ex.d));
  }
  CHECK_FALSE(relevant_bruteforce(ex.f4, ex.d, oracle));
  CHECK_FALSE(relevant_bruteforce(ex.f4, ex.q, ex.d));
  CHECK(relevant_facts(ex.d, oracle) == std::vector<Fact>{ex.f1, ex.f2, ex.f3});
  CHECK(relevant_facts(ex.q, ex.d) == std::vector<Fact>{ex.f1, ex.f2, ex.f3});
  CHECK(support_containing(ex.f2, ex.q, ex.d) == std::vector<Fact>{ex.f1, ex.f2});
}

TEST_CASE("degenerate oracles and instances") {
  Database d = parse_database("R(a,b)\nR(b,c)");
  CHECK(minimal_supports(parse_cq("R(?x,?y)"), d) ==
        std::vector<std::vector<Fact>>{{parse_atom("R(a,b)")}, {parse_atom("R(b,c)")}});
  CHECK(minimal_supports(parse_cq("S(?x)"), d).empty());
  EntailmentOracle always = [](const Database&) { return true; };
  CHECK_FALSE(relevant_bruteforce(parse_atom("R(a,b)"), d, always));
  CHECK(minimal_supports(d, always) == std::vector<std::vector<Fact>>{{}});
  CHECK(relevant_facts(parse_cq("S(?x)"), d).empty());
  Database one = parse_database("A(c)");
  CHECK(relevant_facts(parse_cq("A(?x)"), one) == std::vector<Fact>{parse_atom("A(c)")});
}

TEST_CASE("errors") {
  Database d = parse_database("R(a,b)");
  CHECK_THROWS_AS(relevant_bruteforce(parse_atom("R(b,a)"), d, cq_oracle(parse_cq("R(?x,?y)"))), InvalidArgument);
  CHECK_THROWS_AS(relevant_bruteforce(parse_atom("R(b,a)"), parse_cq("R(?x,?y)"), d), InvalidArgument);
  std::vector<Fact> many;
  for (int i = 0; i < 21; ++i) many.push_back(parse_atom("R(a,c" + std::to_string(i) + ")"));
  Database big(many);
  CHECK_THROWS_AS(relevant_bruteforce(many[0], big, cq_oracle(parse_cq("R(?x,?y)"))), ResourceLimit);
  CHECK_NOTHROW(relevant_bruteforce(many[0], big, cq_oracle(parse_cq("R(?x,?y)")), 21));
  CHECK_THROWS_AS(minimal_supports(parse_cq("R(?x,?y)"), big, 5), ResourceLimit);
}

TEST_CASE("image-based and subset-based supports agree with the definition") {
  std::mt19937 rng(3);
  for (int round = 0; round < 400; ++round) {
    CQ q = random_cq(rng, 1 + round % 3);
    Database d = random_db(rng, 1 + round % 7);
    auto expected = oracle::minimal_supports(q, d);
    auto by_images = minimal_supports(q, d);
    auto by_subsets = minimal_supports(d, cq_oracle(q));
    CHECK(std::set<std::vector<Fact>>(by_images.begin(), by_images.end()) == expected);
    CHECK(by_images == by_subsets);

    // Union property and non-emptiness.
    std::set<Fact> uni;
    for (const auto& s : by_images) uni.insert(s.begin(), s.end());
    auto rel = relevant_facts(q, d);
    CHECK(std::vector<Fact>(uni.begin(), uni.end()) == rel);
    CHECK(oracle::entails(d, q) == !rel.empty());
    for (const Fact& f : d.facts()) CHECK(relevant_bruteforce(f, q, d) == oracle::relevant(f, q, d));

    for (const auto& s : by_images) {
      CHECK(is_minimal_support(Database(s), cq_oracle(q)));
      for (const auto& t : by_images)
        if (s != t) CHECK_FALSE(std::includes(t.begin(), t.end(), s.begin(), s.end()));
    }
  }
}

TEST_CASE("CQ oracle is monotone on sampled chains") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::uint64_t> mask(0, 127);
  for (int round = 0; round < 200; ++round) {
    CQ q = random_cq(rng, 2);
    Database d = random_db(rng, 7);
    auto oracle = cq_oracle(q);
    std::uint64_t s = mask(rng), s2 = s | mask(rng);
    if (oracle(d.subset(s))) CHECK(oracle(d.subset(s2)));
  }
}
