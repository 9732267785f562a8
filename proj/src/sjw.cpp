#include "factrel/sjw.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <map>
#include <numeric>
#include <set>

#include "factrel/error.hpp"

namespace factrel {

bool mergeable(const Atom& a, const Atom& b) {
  if (a.relation != b.relation || a.arity() != b.arity()) return false;
  std::map<Term, Term> parent;
  auto find = [&](Term t) {
    for (;;) {
      auto it = parent.find(t);
      if (it == parent.end() || it->second == t) return t;
      t = it->second;
    }
  };
  for (std::size_t i = 0; i < a.arity(); ++i) {
    Term x = find(a.args[i]), y = find(b.args[i]);
    if (x == y) continue;
    // Constants stay roots, so two constants meeting means a clash.
    if (x.is_constant() && y.is_constant()) return false;
    if (x.is_constant()) std::swap(x, y);
    parent[x] = y;
  }
  return true;
}

std::vector<Term> merge_set(const CQ& q) {
  std::set<Term> out;
  const auto& atoms = q.atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      if (!mergeable(atoms[i], atoms[j])) continue;
      for (std::size_t p = 0; p < atoms[i].arity(); ++p) {
        const Term &s = atoms[i].args[p], &t = atoms[j].args[p];
        if (s == t) continue;
        if (s.is_variable()) out.insert(s);
        if (t.is_variable()) out.insert(t);
      }
    }
  return {out.begin(), out.end()};
}

std::size_t self_join_width(const CQ& q) { return merge_set(q).size(); }

bool EquivRelation::same_class(const Term& a, const Term& b) const {
  for (const auto& c : classes) {
    bool has_a = std::binary_search(c.begin(), c.end(), a);
    bool has_b = std::binary_search(c.begin(), c.end(), b);
    if (has_a || has_b) return has_a && has_b;
  }
  return a == b;
}

namespace {

void require_no_diseqs(const CQ& q) {
  if (!q.diseqs().empty()) throw InvalidArgument("self-join width machinery expects a query without inequalities");
}

}  // namespace

std::vector<EquivRelation> enumerate_equivs(const CQ& q, std::size_t cap) {
  require_no_diseqs(q);
  std::vector<Term> merge = merge_set(q);
  if (merge.size() > cap)
    throw ResourceLimit("self-join width " + std::to_string(merge.size()) + " exceeds cap " + std::to_string(cap));
  std::vector<Term> elems = merge;
  for (const Term& c : q.constants()) elems.push_back(c);
  std::sort(elems.begin(), elems.end());

  std::vector<EquivRelation> out;
  // Restricted growth strings: a[0] = 0 and a[i] <= 1 + max(a[0..i-1]).
  std::vector<std::size_t> a(elems.size(), 0);
  std::function<void(std::size_t, std::size_t)> grow = [&](std::size_t i, std::size_t blocks) {
    if (i == elems.size()) {
      EquivRelation e;
      e.classes.resize(blocks);
      for (std::size_t j = 0; j < elems.size(); ++j) e.classes[a[j]].push_back(elems[j]);
      bool ok = std::all_of(e.classes.begin(), e.classes.end(), [](const std::vector<Term>& c) {
        return std::count_if(c.begin(), c.end(), [](const Term& t) { return t.is_constant(); }) <= 1;
      });
      if (ok) out.push_back(std::move(e));
      return;
    }
    for (std::size_t b = 0; b <= blocks; ++b) {
      a[i] = b;
      grow(i + 1, std::max(blocks, b + 1));
    }
  };
  grow(0, 0);
  return out;
}

CollapsedQuery collapse(const CQ& q, const EquivRelation& e) {
  require_no_diseqs(q);
  std::map<Term, Term> rep;
  for (const auto& c : e.classes) {
    auto constant = std::find_if(c.begin(), c.end(), [](const Term& t) { return t.is_constant(); });
    // Classes are sorted and `?` sorts before letters, so c.front() is the
    // least variable whenever the class has one.
    Term r = constant != c.end() ? *constant : c.front();
    for (const Term& t : c) rep[t] = r;
  }
  CQ q_e = substitute(q, rep);

  std::vector<Term> merge;
  std::vector<Term> targets;
  for (const auto& c : e.classes)
    for (const Term& t : c) {
      targets.push_back(t);
      if (t.is_variable()) merge.push_back(t);
    }
  std::set<CQ::Diseq> neq;
  for (const Term& t : merge)
    for (const Term& u : targets) {
      if (e.same_class(t, u)) continue;
      Term a = rep.at(t), b = rep.at(u);
      if (b < a) std::swap(a, b);
      neq.emplace(a, b);
    }
  CQ q_e_neq(q_e.atoms(), {neq.begin(), neq.end()});
  return {std::move(q_e), std::move(q_e_neq)};
}

NiceEquivs nice_equivs(const CQ& q, std::size_t cap) {
  std::vector<EquivRelation> equivs = enumerate_equivs(q, cap);
  std::vector<CollapsedQuery> all;
  for (const auto& e : equivs) all.push_back(collapse(q, e));
  // Only core candidates need the pairwise comparison, but every E' counts.
  std::vector<bool> core(all.size());
  for (std::size_t i = 0; i < all.size(); ++i)
    core[i] = is_core(all[i].q_e, std::max(kDefaultCoreAtomCap, q.size()));
  std::vector<std::unique_ptr<Structure>> frozen;
  for (const auto& c : all) frozen.push_back(std::make_unique<Structure>(c.q_e_neq));

  NiceEquivs out{q, {}, {}};
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!core[i]) continue;
    bool nice = true;
    for (std::size_t j = 0; j < all.size() && nice; ++j) {
      if (j == i) continue;
      if (find_hom(all[j].q_e_neq, *frozen[i]) && !find_hom(all[i].q_e_neq, *frozen[j])) nice = false;
    }
    if (nice) {
      out.equivs.push_back(equivs[i]);
      out.collapsed.push_back(all[i]);
    }
  }
  return out;
}

bool is_nice(const EquivRelation& e, const CQ& q, std::size_t cap) {
  NiceEquivs all = nice_equivs(q, cap);
  return std::find(all.equivs.begin(), all.equivs.end(), e) != all.equivs.end();
}

namespace {

/// Maps the variables of `atom` onto the constants of `f` if the atom is
/// consistent with f.
std::optional<std::map<Term, Term>> instantiate(const Atom& atom, const Fact& f) {
  if (atom.relation != f.relation || atom.arity() != f.arity()) return std::nullopt;
  std::map<Term, Term> subst;
  for (std::size_t i = 0; i < atom.arity(); ++i) {
    const Term &t = atom.args[i], &c = f.args[i];
    if (t.is_constant()) {
      if (t != c) return std::nullopt;
      continue;
    }
    auto [it, inserted] = subst.emplace(t, c);
    if (!inserted && it->second != c) return std::nullopt;
  }
  return subst;
}

/// Applies `subst` to the collapsed query, or nullopt when an inequality
/// becomes `c != c`.
std::optional<CQ> instantiate(const CQ& q_e_neq, const std::map<Term, Term>& subst) {
  auto map_term = [&](const Term& t) {
    auto it = subst.find(t);
    return it == subst.end() ? t : it->second;
  };
  std::vector<CQ::Diseq> diseqs;
  for (const auto& [l, r] : q_e_neq.diseqs()) {
    Term a = map_term(l), b = map_term(r);
    if (a == b) return std::nullopt;
    diseqs.emplace_back(a, b);
  }
  std::vector<Atom> atoms;
  for (const Atom& a : q_e_neq.atoms()) {
    Atom b{a.relation, {}};
    for (const Term& t : a.args) b.args.push_back(map_term(t));
    atoms.push_back(std::move(b));
  }
  return CQ(std::move(atoms), std::move(diseqs));
}

}  // namespace

std::optional<FactIndexSet> sjw_witness(const Fact& f, const NiceEquivs& nice, const Database& d) {
  if (!d.contains(f)) throw InvalidArgument("fact " + to_string(f) + " is not in the database");
  Structure target(d);
  for (const CollapsedQuery& c : nice.collapsed) {
    for (const Atom& atom : c.q_e.atoms()) {
      auto subst = instantiate(atom, f);
      if (!subst) continue;
      auto q_hat = instantiate(c.q_e_neq, *subst);
      if (!q_hat) continue;
      auto h = find_hom(*q_hat, target);
      if (!h) continue;
      FactIndexSet image;
      for (const Atom& a : c.q_e.atoms()) {
        Fact img{a.relation, {}};
        for (const Term& t : a.args) {
          auto it = subst->find(t);
          img.args.push_back(it != subst->end() ? it->second : Term::constant((*h)(t)));
        }
        image.push_back(static_cast<std::uint32_t>(*d.index_of(img)));
      }
      std::sort(image.begin(), image.end());
      image.erase(std::unique(image.begin(), image.end()), image.end());
      return image;
    }
  }
  return std::nullopt;
}

bool relevant_sjw(const Fact& f, const NiceEquivs& nice, const Database& d) {
  return sjw_witness(f, nice, d).has_value();
}

bool relevant_sjw(const Fact& f, const CQ& q, const Database& d, std::size_t cap) {
  return relevant_sjw(f, nice_equivs(q, cap), d);
}

}  // namespace factrel
