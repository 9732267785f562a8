#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "factrel/dllite.hpp"

namespace chase_oracle {

using namespace factrel;

// Reference chase: applies axioms one at a time to an explicit
// interpretation, creating a fresh null for every (element, role) demand,
// then joins the query over the result. Shares only the axiom data types
// with the library.
struct Chase {
  struct Elem {
    std::string name;
    std::size_t depth;
    std::set<std::string> concepts;
    std::set<std::pair<std::string, std::size_t>> out, in;  // (role name, neighbour)
  };
  std::vector<Elem> elems;
  std::map<std::string, std::size_t> ids;
  std::set<std::pair<std::size_t, Role>> spawned;
  bool consistent = true;

  std::size_t intern(const std::string& name, std::size_t depth) {
    auto [it, fresh] = ids.emplace(name, elems.size());
    if (fresh) elems.push_back({name, depth, {}, {}, {}});
    return it->second;
  }

  bool edge(const Role& r, std::size_t a, std::size_t b) const {
    return (r.inverse ? elems[b] : elems[a]).out.contains({r.name, r.inverse ? a : b});
  }
  bool add_edge(const Role& r, std::size_t a, std::size_t b) {
    if (r.inverse) std::swap(a, b);
    elems[b].in.emplace(r.name, a);
    return elems[a].out.emplace(r.name, b).second;
  }
  bool member(const BasicConcept& c, std::size_t e) const {
    if (!c.exists) return elems[e].concepts.contains(c.name);
    const auto& adj = c.inverse ? elems[e].in : elems[e].out;
    auto it = adj.lower_bound({c.name, 0});
    return it != adj.end() && it->first == c.name;
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs(const Role& r) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t a = 0; a < elems.size(); ++a)
      for (const auto& [n, b] : elems[a].out)
        if (n == r.name) out.emplace_back(r.inverse ? b : a, r.inverse ? a : b);
    return out;
  }

  Chase(const Database& abox, const std::vector<Axiom>& axioms, std::size_t depth) {
    for (const Fact& f : abox.facts()) {
      std::size_t a = intern(f.args[0].name(), 0);
      if (f.arity() == 1) elems[a].concepts.insert(f.relation);
      else add_edge(Role{f.relation, false}, a, intern(f.args[1].name(), 0));
    }
    for (bool changed = true; changed;) {
      changed = false;
      for (const Axiom& ax : axioms) {
        if (ax.negated) continue;
        if (ax.kind == Axiom::Kind::Role) {
          for (auto [a, b] : pairs(ax.lhs_role)) changed = add_edge(ax.rhs_role, a, b) || changed;
          continue;
        }
        for (std::size_t e = 0; e < elems.size(); ++e) {
          if (!member(ax.lhs_concept, e)) continue;
          const BasicConcept& c = ax.rhs_concept;
          if (!c.exists) {
            changed = elems[e].concepts.insert(c.name).second || changed;
          } else if (elems[e].depth < depth && spawned.emplace(e, c.role()).second) {
            std::size_t n = intern(elems[e].name + "/" + to_string(c.role()), elems[e].depth + 1);
            add_edge(c.role(), e, n);
            changed = true;
          }
        }
      }
    }
    for (const Axiom& ax : axioms) {
      if (!ax.negated) continue;
      for (std::size_t a = 0; a < elems.size(); ++a) {
        if (ax.kind == Axiom::Kind::Concept) {
          if (member(ax.lhs_concept, a) && member(ax.rhs_concept, a)) consistent = false;
          continue;
        }
        for (const auto& [n, b] : elems[a].out)
          if (edge(ax.lhs_role, a, b) && edge(ax.rhs_role, a, b)) consistent = false;
        for (const auto& [n, b] : elems[a].in)
          if (edge(ax.lhs_role, a, b) && edge(ax.rhs_role, a, b)) consistent = false;
      }
    }
  }

  bool satisfies(const CQ& q) const {
    std::map<Term, std::size_t> h;
    auto value = [&](const Term& t) -> std::optional<std::size_t> {
      if (t.is_constant()) {
        auto it = ids.find(t.name());
        return it == ids.end() ? std::optional<std::size_t>(SIZE_MAX) : it->second;
      }
      auto it = h.find(t);
      if (it == h.end()) return std::nullopt;
      return it->second;
    };
    std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
      if (i == q.atoms().size()) return true;
      const Atom& at = q.atoms()[i];
      std::vector<std::vector<std::size_t>> tuples;
      auto x = value(at.args[0]);
      if (at.arity() == 1) {
        for (std::size_t e = 0; e < elems.size(); ++e)
          if ((!x || *x == e) && elems[e].concepts.contains(at.relation)) tuples.push_back({e});
      } else {
        auto y = value(at.args[1]);
        for (std::size_t a = 0; a < elems.size(); ++a) {
          if (x && *x != a) continue;
          for (const auto& [n, b] : elems[a].out)
            if (n == at.relation && (!y || *y == b)) tuples.push_back({a, b});
        }
      }
      for (const auto& tuple : tuples) {
        std::vector<Term> bound;
        bool ok = true;
        for (std::size_t k = 0; k < tuple.size() && ok; ++k) {
          const Term& t = at.args[k];
          if (auto v = value(t)) ok = *v == tuple[k];
          else {
            h[t] = tuple[k];
            bound.push_back(t);
          }
        }
        if (ok && go(i + 1)) return true;
        for (const Term& t : bound) h.erase(t);
      }
      return false;
    };
    return go(0);
  }
};

inline bool chase_entails(const Database& abox, const TBox& t, const CQ& q) {
  Chase c(abox, t.axioms(), 2 * t.size() + q.size() + 2);
  return c.satisfies(q);
}

inline bool chase_consistent(const Database& abox, const TBox& t) {
  return Chase(abox, t.axioms(), t.size() + 2).consistent;
}

inline TBox random_tbox(std::mt19937& rng, int n, bool with_negation) {
  std::vector<std::string> cs{"A", "B"};
  std::vector<std::string> rs{"R", "S"};
  std::uniform_int_distribution<int> pick(0, 1), form(0, with_negation ? 7 : 6);
  auto role = [&] { return Role{rs[pick(rng)], pick(rng) == 1}; };
  auto basic = [&] {
    return pick(rng) ? BasicConcept::atomic(cs[pick(rng)]) : BasicConcept::some(role());
  };
  std::vector<Axiom> ax;
  for (int i = 0; i < n; ++i) {
    switch (form(rng)) {
      case 0: ax.push_back(Axiom::concept_incl(BasicConcept::atomic(cs[pick(rng)]), BasicConcept::some(role()))); break;
      case 1: ax.push_back(Axiom::concept_incl(BasicConcept::some(role()), BasicConcept::atomic(cs[pick(rng)]))); break;
      case 2: case 3: ax.push_back(Axiom::role_incl(role(), role())); break;
      case 4: ax.push_back(Axiom::concept_incl(BasicConcept::some(role()), BasicConcept::some(role()))); break;
      case 5: case 6: ax.push_back(Axiom::concept_incl(basic(), basic())); break;
      default:
        if (pick(rng)) ax.push_back(Axiom::concept_incl(basic(), basic(), true));
        else ax.push_back(Axiom::role_incl(role(), role(), true));
    }
  }
  return TBox(ax);
}

inline Database random_abox(std::mt19937& rng, int n) {
  std::uniform_int_distribution<int> kind(0, 3), c(0, 2);
  auto k = [&] { return Term::constant(std::string(1, static_cast<char>('a' + c(rng)))); };
  std::vector<Fact> fs;
  for (int i = 0; i < n; ++i) {
    switch (kind(rng)) {
      case 0: fs.push_back(Fact{"A", {k()}}); break;
      case 1: fs.push_back(Fact{"B", {k()}}); break;
      case 2: fs.push_back(Fact{"R", {k(), k()}}); break;
      default: fs.push_back(Fact{"S", {k(), k()}});
    }
  }
  return Database(fs);
}

inline CQ random_query(std::mt19937& rng, int n) {
  std::uniform_int_distribution<int> kind(0, 3), v(0, 5);
  auto term = [&] {
    int x = v(rng);
    return x < 3 ? Term::variable("x" + std::to_string(x)) : x < 5 ? Term::variable("x0") : Term::constant("a");
  };
  std::vector<Atom> as;
  for (int i = 0; i < n; ++i) {
    switch (kind(rng)) {
      case 0: as.push_back(Atom{"A", {term()}}); break;
      case 1: as.push_back(Atom{"B", {term()}}); break;
      case 2: as.push_back(Atom{"R", {term(), term()}}); break;
      default: as.push_back(Atom{"S", {term(), term()}});
    }
  }
  return CQ(as);
}

}  // namespace chase_oracle
