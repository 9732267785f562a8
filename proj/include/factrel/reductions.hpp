#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factrel/core.hpp"
#include "factrel/dllite.hpp"

namespace factrel {

using Edge = std::pair<std::string, std::string>;

/// Directed graph given by its edges; vertices are the edge endpoints.
struct Digraph {
  std::set<std::string> vertices;
  std::set<Edge> edges;

  Digraph() = default;
  explicit Digraph(std::set<Edge> es);
  void add_edge(const std::string& u, const std::string& v);
  bool has_loop() const;
  bool operator==(const Digraph&) const = default;
};

/// One `u -> v` per line; `#` comments. Vertex names must be identifiers.
Digraph parse_digraph(std::string_view text);
std::string to_string(const Digraph& g);

struct CnfFormula {
  std::size_t num_vars = 0;
  std::vector<std::vector<int>> clauses;  // DIMACS literals, ±(1..num_vars)
};

/// DIMACS subset: `c` comment lines, a `p cnf n m` header, clauses ended by 0.
CnfFormula parse_dimacs(std::string_view text);
std::string to_dimacs(const CnfFormula& phi);

/// A CQ relevance instance: is `fact` relevant for `query` in `data`?
struct RelevanceInstance {
  CQ query;
  Database data;
  Fact fact;
};

/// Adds a fresh atom A(?x) to q and the fresh fact A(c) to D. D ⊨ q iff A(c)
/// is relevant.
RelevanceInstance eval_to_relevance(const CQ& q, const Database& d);

/// Propositional definite Horn rule over concept names at a single individual:
/// body_1 ⊓ ... ⊓ body_k ⊑ head.
struct HornRule {
  std::vector<std::string> body;
  std::string head;
  bool operator==(const HornRule&) const = default;
};

std::string to_string(const HornRule& r);

/// Atomic-query relevance over a TBox of Horn rules: is `fact` relevant for
/// goal(individual) in `abox`?
struct HornAqInstance {
  std::vector<HornRule> tbox;
  std::string goal;
  std::string individual;
  Database abox;
  Fact fact;
};

/// Rules P_i ⊓ N_i ⊑ A, P_i ⊑ C_j (v_i in c_j), N_i ⊑ C_j (¬v_i in c_j),
/// X ⊓ C_1 ⊓ ... ⊓ C_m ⊑ A; ABox {X(d), P_i(d), N_i(d)}; fact X(d).
/// X(d) is relevant for A(d) iff phi is satisfiable.
HornAqInstance sat_to_aq_relevance(const CnfFormula& phi);

/// Closure of the unary facts on `individual` under the rules.
bool horn_entails(const HornAqInstance& inst, const Database& abox);
/// Subset enumeration with horn_entails as the oracle.
bool horn_relevance_bruteforce(const HornAqInstance& inst);

/// Atomic-query relevance under the single axiom ∃role.concept ⊑ concept.
struct ElAqInstance {
  std::string role = "R";
  std::string concept_name = "A";
  std::string individual;
  Database abox;
  Fact fact;
};

/// ABox {R(u,v) | (u,v) ∈ G} ∪ {A(t)}, query A(s), fact R(v1,v2). The fact
/// is relevant iff the edge lies on a simple s→t path.
ElAqInstance reach_to_el_relevance(const Digraph& g, const std::string& s, const std::string& t, const Edge& e);
/// Forward chaining of ∃R.A ⊑ A from the A-facts.
bool el_entails(const ElAqInstance& inst, const Database& abox);
bool el_relevance_bruteforce(const ElAqInstance& inst);

/// D = {R(s',s), R(t,t')} ∪ {R(u,v) | (u,v) ∈ G} with fresh s', t', chain
/// query of |V|+1 atoms, fact R(s',s). Relevant iff G has a Hamiltonian
/// s→t path. Requires s ≠ t, both vertices of G.
RelevanceInstance hampath_to_chain_relevance(const Digraph& g, const std::string& s, const std::string& t);

/// Every occurrence of a relation R gets a fresh name R_i, with the axiom
/// R ⊑ R_i (concept or role inclusion by arity). Relations must have arity
/// at most 2 and the query no inequalities.
struct SelfJoinFreeOmq {
  OMQ omq;
  Database abox;
};
SelfJoinFreeOmq remove_selfjoins(const CQ& q, const Database& d);

/// DMH instance: is `edge` in some minimal pattern-homomorphic image on host?
struct DmhInstance {
  Digraph pattern;
  Digraph host;
  Edge edge;
};

/// Edges of a constant-free CQ over one binary relation; vertices are the
/// variable names without `?`.
Digraph digraph_of(const CQ& q);
/// Edges of a database over one binary relation.
Digraph digraph_of(const Database& d);
CQ cq_of(const Digraph& g, const std::string& relation = "R");
Database database_of(const Digraph& g, const std::string& relation = "R");

DmhInstance relevance_to_dmh(const RelevanceInstance& inst);
RelevanceInstance dmh_to_relevance(const DmhInstance& inst, const std::string& relation = "R");

/// The first `count` primes.
std::vector<std::size_t> first_primes(std::size_t count);

/// Prime-cycle encoding of a constant-free CQ and a database over binary
/// relations R_1 < ... < R_n (sorted union of both signatures). Each term
/// becomes an anchor on a C_{p_{n+1}} and a C_{p_{n+2}} cycle; each atom or
/// fact R_i(c,d) becomes a path of length p_{n+2} from the anchor of c into a
/// C_{p_i} cycle and a second such path from the cycle to the anchor of d.
/// The edge is the first edge of the cycle of `fact`.
DmhInstance db_to_digraph_gadget(const CQ& q, const Database& d, const Fact& fact);

inline constexpr std::uint64_t kDefaultDmhHomCap = 50'000'000;

/// Enumerates all homomorphisms pattern → host, keeps the inclusion-minimal
/// edge images and tests membership of the edge. Throws ResourceLimit after
/// `hom_cap` homomorphisms.
bool dmh_bruteforce(const DmhInstance& inst, std::uint64_t hom_cap = kDefaultDmhHomCap);

}  // namespace factrel
