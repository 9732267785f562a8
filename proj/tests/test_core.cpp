#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "factrel/core.hpp"
#include "factrel/error.hpp"

using namespace factrel;

TEST_CASE("terms are classified by the question mark") {
  CHECK(Term::parse("?x").is_variable());
  CHECK(Term::parse("c").is_constant());
  CHECK(Term::variable("x") == Term::parse("?x"));
  CHECK(Term::parse("?x").bare_name() == "x");
  CHECK_THROWS_AS(Term::parse("?"), InvalidArgument);
  CHECK_THROWS_AS(Term::parse("1a"), InvalidArgument);
}

TEST_CASE("parse_cq") {
  SUBCASE("chain") {
    CQ q = parse_cq("R(?x,?y), R(?y,?z)");
    CHECK(q.size() == 2);
    CHECK(q.variables() == std::vector{Term::parse("?x"), Term::parse("?y"), Term::parse("?z")});
    CHECK(q.constants().empty());
  }
  SUBCASE("constants") {
    CQ q = parse_cq("R(c,?x), R(c2,?y)");
    CHECK(q.constants() == std::vector{Term::parse("c"), Term::parse("c2")});
  }
  SUBCASE("inequality") {
    CQ q = parse_cq("R(?x,?y), ?x != ?y");
    REQUIRE(q.diseqs().size() == 1);
    CHECK(q.diseqs()[0] == CQ::Diseq{Term::parse("?x"), Term::parse("?y")});
  }
  SUBCASE("inequalities are unordered") {
    CHECK(parse_cq("R(?x,?y), ?y != ?x") == parse_cq("R(?x,?y), ?x != ?y"));
    CHECK(parse_cq("R(?x,c), c != ?x").diseqs().size() == 1);
  }
  SUBCASE("comments and whitespace") {
    CHECK(parse_cq("# chain\n R ( ?x , ?y ) ,\n R(?y,?z) # end") == parse_cq("R(?x,?y),R(?y,?z)"));
  }
  SUBCASE("empty query") { CHECK(parse_cq("  # nothing\n").empty()); }
}

TEST_CASE("parse_cq errors") {
  SUBCASE("syntax error carries a position") {
    try {
      parse_cq("R(?x,?y),\n  R(?y ?z)");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 8);
    }
  }
  CHECK_THROWS_AS(parse_cq("R(?x,?y), R(?x)"), ParseError);
  CHECK_THROWS_AS(parse_cq("R(?x,?y), ?x != ?z"), ParseError);
  CHECK_THROWS_AS(parse_cq("R(?x,?y), ?x != ?x"), ParseError);
  CHECK_THROWS_AS(parse_cq("R(?x,?y),"), ParseError);
  CHECK_THROWS_AS(parse_cq("R()"), ParseError);
}

TEST_CASE("parse_database") {
  Database d = parse_database("R(a,b)\nR(b,c)");
  CHECK(d.size() == 2);
  CHECK(parse_database("A(d)\nR(a,a)").signature().entries() ==
        std::map<std::string, std::size_t>{{"A", 1}, {"R", 2}});
  CHECK(parse_database("R(a,b)\nR(a,b)").size() == 1);
  CHECK(parse_database("").empty());
  CHECK_THROWS_AS(parse_database("R(a,?x)"), ParseError);
  CHECK_THROWS_AS(parse_database("R(a,b)\nR(a)"), ParseError);
  CHECK_THROWS_AS(parse_database("R(a,b) R(b,c)"), ParseError);
}

TEST_CASE("serialization round-trips") {
  for (const char* text : {"R(?x,?y), R(?y,?z)", "S(?y,?x), R(c,?x), ?x != c, ?x != ?y", "T(a,?x,?x)"}) {
    CQ q = parse_cq(text);
    CHECK(parse_cq(to_string(q)) == q);
  }
  Database d = parse_database("R(b,c)\nA(d)\nR(a,b)");
  CHECK(parse_database(to_string(d)) == d);
  CHECK(to_string(d) == "A(d)\nR(a,b)\nR(b,c)\n");
  CHECK(to_string(parse_cq("R(?y,?z), R(?x,?y)")) == "R(?x,?y), R(?y,?z)");
}

TEST_CASE("validate") {
  Database d = parse_database("R(a,b)");
  CHECK(validate(parse_cq("R(?x,?y)"), d).empty());
  auto w = validate(parse_cq("R(?x,?y), S(?y)"), d);
  REQUIRE(w.size() == 1);
  CHECK(w[0].severity == Diagnostic::Severity::Warning);
  CHECK(w[0].message.starts_with("S unmatched"));
  auto e = validate(parse_cq("R(?x,?y,?z)"), d);
  REQUIRE(e.size() == 1);
  CHECK(e[0].severity == Diagnostic::Severity::Error);
}

TEST_CASE("database subsets and constants") {
  Database d = parse_database("R(a,b)\nR(b,c)\nS(c)");
  CHECK(d.constants() == std::vector<std::string>{"a", "b", "c"});
  CHECK(d.subset(0b101) == parse_database("R(a,b)\nS(c)"));
  CHECK(d.index_of(parse_atom("R(b,c)")) == 1);
  CHECK_FALSE(d.index_of(parse_atom("R(c,b)")));
}

TEST_CASE("fresh names avoid collisions") {
  std::set<std::string> taken{"A", "A1"};
  CHECK(fresh_name("A", [&](const std::string& s) { return taken.contains(s); }) == "A2");
  CHECK(fresh_name("B", [&](const std::string& s) { return taken.contains(s); }) == "B");
}
