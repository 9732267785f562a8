#pragma once

// Independent reference implementations used by the tests. They share no
// code with the library beyond the data model.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "factrel/core.hpp"

namespace oracle {

using factrel::Atom;
using factrel::CQ;
using factrel::Database;
using factrel::Fact;
using factrel::Term;

using Assignment = std::map<Term, std::string>;

/// Calls `visit` on every map from the variables of `q` to `domain`.
inline void for_each_assignment(const CQ& q, const std::vector<std::string>& domain,
                                const std::function<void(const Assignment&)>& visit) {
  std::vector<Term> vars = q.variables();
  std::vector<std::size_t> idx(vars.size(), 0);
  if (!vars.empty() && domain.empty()) return;
  for (;;) {
    Assignment a;
    for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = domain[idx[i]];
    visit(a);
    std::size_t i = 0;
    while (i < idx.size() && ++idx[i] == domain.size()) idx[i++] = 0;
    if (i == idx.size()) return;
  }
}

inline std::string apply(const Assignment& a, const Term& t) {
  return t.is_variable() ? a.at(t) : t.name();
}

inline Fact apply(const Assignment& a, const Atom& at) {
  Fact f{at.relation, {}};
  for (const Term& t : at.args) f.args.push_back(Term::constant(apply(a, t)));
  return f;
}

/// Whether `a` maps `q` into `d`; inequalities require distinct constants.
inline bool is_hom(const CQ& q, const Database& d, const Assignment& a) {
  for (const Atom& at : q.atoms())
    if (!d.contains(apply(a, at))) return false;
  for (const auto& [l, r] : q.diseqs())
    if (apply(a, l) == apply(a, r)) return false;
  return true;
}

inline std::vector<std::string> domain_of(const CQ& q, const Database& d) {
  std::set<std::string> dom;
  for (const std::string& c : d.constants()) dom.insert(c);
  for (const Term& c : q.constants()) dom.insert(c.name());
  return {dom.begin(), dom.end()};
}

inline bool entails(const Database& d, const CQ& q) {
  bool found = false;
  oracle::for_each_assignment(q, oracle::domain_of(q, d), [&](const Assignment& a) { found = found || is_hom(q, d, a); });
  return found;
}

/// All homomorphic images as sorted fact vectors.
inline std::set<std::vector<Fact>> images(const CQ& q, const Database& d) {
  std::set<std::vector<Fact>> out;
  oracle::for_each_assignment(q, oracle::domain_of(q, d), [&](const Assignment& a) {
    if (!is_hom(q, d, a)) return;
    std::set<Fact> img;
    for (const Atom& at : q.atoms()) img.insert(apply(a, at));
    out.emplace(img.begin(), img.end());
  });
  return out;
}

/// Inclusion-minimal subsets of `d` satisfying `q`, by checking every subset.
inline std::set<std::vector<Fact>> minimal_supports(const CQ& q, const Database& d) {
  std::vector<std::uint64_t> sat;
  const std::uint64_t n = d.size();
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m)
    if (entails(d.subset(m), q)) sat.push_back(m);
  std::set<std::vector<Fact>> out;
  for (std::uint64_t m : sat) {
    bool minimal = std::none_of(sat.begin(), sat.end(), [&](std::uint64_t s) { return s != m && (s & m) == s; });
    if (!minimal) continue;
    Database sub = d.subset(m);
    out.emplace(sub.facts().begin(), sub.facts().end());
  }
  return out;
}

/// Whether `f` lies in some minimal support, straight from the definition.
inline bool relevant(const Fact& f, const CQ& q, const Database& d) {
  for (const auto& s : oracle::minimal_supports(q, d))
    if (std::find(s.begin(), s.end(), f) != s.end()) return true;
  return false;
}

/// Hom between CQs: variables go to terms of `target`; constants are fixed.
/// An inequality t != t' holds in the target when the images differ and are
/// both constants or are related by an inequality of `target`.
inline bool cq_hom_exists(const CQ& source, const CQ& target) {
  std::vector<std::string> dom;
  for (const Term& t : target.terms()) dom.push_back(t.name());
  for (const Term& c : source.constants()) dom.push_back(c.name());
  std::sort(dom.begin(), dom.end());
  dom.erase(std::unique(dom.begin(), dom.end()), dom.end());
  std::set<Atom> atoms(target.atoms().begin(), target.atoms().end());
  std::set<std::pair<std::string, std::string>> neq;
  for (const auto& [l, r] : target.diseqs()) {
    neq.emplace(l.name(), r.name());
    neq.emplace(r.name(), l.name());
  }
  bool found = false;
  for_each_assignment(source, dom, [&](const Assignment& a) {
    if (found) return;
    for (const Atom& at : source.atoms()) {
      Atom img{at.relation, {}};
      for (const Term& t : at.args) img.args.push_back(Term::parse(apply(a, t)));
      if (!atoms.contains(img)) return;
    }
    for (const auto& [l, r] : source.diseqs()) {
      std::string x = apply(a, l), y = apply(a, r);
      bool both_const = x.front() != '?' && y.front() != '?';
      if (x == y || !(both_const || neq.contains({x, y}))) return;
    }
    found = true;
  });
  return found;
}

}  // namespace oracle
