#include "factrel/dllite.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "factrel/error.hpp"
#include "lexer.hpp"

namespace factrel {

// ------------------------------------------------------------------ syntax

Axiom Axiom::concept_incl(BasicConcept lhs, BasicConcept rhs, bool negated) {
  Axiom a;
  a.kind = Kind::Concept;
  a.lhs_concept = std::move(lhs);
  a.rhs_concept = std::move(rhs);
  a.negated = negated;
  return a;
}

Axiom Axiom::role_incl(Role lhs, Role rhs, bool negated) {
  Axiom a;
  a.kind = Kind::Role;
  a.lhs_role = std::move(lhs);
  a.rhs_role = std::move(rhs);
  a.negated = negated;
  return a;
}

std::string to_string(const Role& r) { return r.inverse ? r.name + "-" : r.name; }

std::string to_string(const BasicConcept& b) { return b.exists ? "ex " + to_string(b.role()) : b.name; }

std::string to_string(const Axiom& a) {
  std::string lhs = a.kind == Axiom::Kind::Concept ? to_string(a.lhs_concept) : to_string(a.lhs_role);
  std::string rhs = a.kind == Axiom::Kind::Concept ? to_string(a.rhs_concept) : to_string(a.rhs_role);
  return lhs + " sub " + (a.negated ? "not " : "") + rhs;
}

std::string to_string(const TBox& t) {
  std::string out;
  for (const Axiom& a : t.axioms()) out += to_string(a) + "\n";
  return out;
}

namespace {

/// One side of an axiom as written.
struct Expr {
  enum class Shape { Name, InverseRole, Exists } shape = Shape::Name;
  std::string name;
  bool inverse = false;  // for Exists
};

Expr read_expr(detail::Cursor& in) {
  Expr e;
  std::string word = in.identifier(false);
  in.skip_space(true);
  if (word == "ex" && detail::Cursor::ident_start(in.peek())) {
    e.shape = Expr::Shape::Exists;
    e.name = in.identifier(false);
    e.inverse = in.accept('-');
    return e;
  }
  e.name = std::move(word);
  if (in.accept('-')) e.shape = Expr::Shape::InverseRole;
  return e;
}

struct RawAxiom {
  Expr lhs, rhs;
  bool negated = false;
  std::size_t line = 0, column = 0;
};

}  // namespace

TBox parse_tbox(std::string_view text, const Signature& hint) {
  detail::Cursor in(text);
  std::vector<RawAxiom> raw;
  for (;;) {
    in.skip_space();
    if (in.at_end()) break;
    RawAxiom r;
    r.line = in.line();
    r.column = in.column();
    r.lhs = read_expr(in);
    in.skip_space(true);
    if (in.identifier(false) != "sub") throw ParseError("expected 'sub'", r.line, r.column);
    in.skip_space(true);
    r.rhs = read_expr(in);
    if (r.rhs.shape == Expr::Shape::Name && r.rhs.name == "not") {
      r.negated = true;
      in.skip_space(true);
      r.rhs = read_expr(in);
    }
    in.skip_space(true);
    if (!in.at_end() && in.peek() != '\n') in.fail("expected one axiom per line");
    raw.push_back(std::move(r));
  }

  // Decide which names denote roles.
  std::set<std::string> roles, concepts;
  for (const auto& [name, arity] : hint.entries()) (arity == 2 ? roles : concepts).insert(name);
  for (const RawAxiom& r : raw)
    for (const Expr* e : {&r.lhs, &r.rhs})
      if (e->shape != Expr::Shape::Name) roles.insert(e->name);
  for (const RawAxiom& r : raw) {
    bool lhs_concept = r.lhs.shape == Expr::Shape::Exists;
    bool rhs_concept = r.rhs.shape == Expr::Shape::Exists;
    if (lhs_concept && r.rhs.shape == Expr::Shape::Name) concepts.insert(r.rhs.name);
    if (rhs_concept && r.lhs.shape == Expr::Shape::Name) concepts.insert(r.lhs.name);
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (const RawAxiom& r : raw) {
      if (r.lhs.shape != Expr::Shape::Name || r.rhs.shape != Expr::Shape::Name) continue;
      for (auto* kind : {&roles, &concepts}) {
        if (kind->contains(r.lhs.name) && kind->insert(r.rhs.name).second) changed = true;
        if (kind->contains(r.rhs.name) && kind->insert(r.lhs.name).second) changed = true;
      }
    }
  }

  std::vector<Axiom> axioms;
  for (const RawAxiom& r : raw) {
    auto fail = [&](const std::string& msg) { throw ParseError(msg, r.line, r.column); };
    bool is_role_axiom = r.lhs.shape == Expr::Shape::InverseRole || r.rhs.shape == Expr::Shape::InverseRole ||
                         (r.lhs.shape == Expr::Shape::Name && r.rhs.shape == Expr::Shape::Name &&
                          roles.contains(r.lhs.name));
    if (is_role_axiom) {
      for (const Expr* e : {&r.lhs, &r.rhs})
        if (e->shape == Expr::Shape::Exists) fail("role inclusion mixes a role with an existential");
      Role lhs{r.lhs.name, r.lhs.shape == Expr::Shape::InverseRole};
      Role rhs{r.rhs.name, r.rhs.shape == Expr::Shape::InverseRole};
      axioms.push_back(Axiom::role_incl(lhs, rhs, r.negated));
    } else {
      auto concept_of = [](const Expr& e) {
        return e.shape == Expr::Shape::Exists ? BasicConcept::some(Role{e.name, e.inverse})
                                              : BasicConcept::atomic(e.name);
      };
      axioms.push_back(Axiom::concept_incl(concept_of(r.lhs), concept_of(r.rhs), r.negated));
    }
  }
  try {
    return TBox(std::move(axioms));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 1, 1);
  }
}

// -------------------------------------------------------------- saturation

namespace {

template <typename T>
std::map<T, std::set<T>> reflexive_transitive_closure(const std::set<T>& nodes, const std::multimap<T, T>& edges) {
  std::map<T, std::set<T>> up;
  for (const T& n : nodes) {
    std::set<T>& seen = up[n];
    std::vector<T> stack{n};
    seen.insert(n);
    while (!stack.empty()) {
      T x = stack.back();
      stack.pop_back();
      auto [lo, hi] = edges.equal_range(x);
      for (auto it = lo; it != hi; ++it)
        if (seen.insert(it->second).second) stack.push_back(it->second);
    }
  }
  return up;
}

}  // namespace

TBox::TBox(std::vector<Axiom> axioms) : axioms_(std::move(axioms)) {
  std::sort(axioms_.begin(), axioms_.end());
  axioms_.erase(std::unique(axioms_.begin(), axioms_.end()), axioms_.end());

  auto note_concept = [&](const BasicConcept& b) {
    (b.exists ? role_names_ : concept_names_).insert(b.name);
  };
  for (const Axiom& a : axioms_) {
    if (a.kind == Axiom::Kind::Concept) {
      note_concept(a.lhs_concept);
      note_concept(a.rhs_concept);
    } else {
      role_names_.insert(a.lhs_role.name);
      role_names_.insert(a.rhs_role.name);
    }
  }
  for (const std::string& n : concept_names_)
    if (role_names_.contains(n)) throw InvalidArgument("'" + n + "' is used both as a concept and as a role");
  for (const auto* names : {&concept_names_, &role_names_})
    for (const std::string& n : *names)
      if (!is_identifier(n)) throw InvalidArgument("invalid name '" + n + "'");

  std::set<Role> roles;
  std::set<BasicConcept> concepts;
  for (const std::string& r : role_names_) {
    roles.insert(Role{r, false});
    roles.insert(Role{r, true});
    concepts.insert(BasicConcept::some(Role{r, false}));
    concepts.insert(BasicConcept::some(Role{r, true}));
  }
  for (const std::string& c : concept_names_) concepts.insert(BasicConcept::atomic(c));

  std::multimap<Role, Role> role_edges;
  for (const Axiom& a : axioms_)
    if (a.kind == Axiom::Kind::Role && !a.negated) {
      role_edges.emplace(a.lhs_role, a.rhs_role);
      role_edges.emplace(a.lhs_role.inv(), a.rhs_role.inv());
    }
  role_up_ = reflexive_transitive_closure(roles, role_edges);

  std::multimap<BasicConcept, BasicConcept> concept_edges;
  for (const Axiom& a : axioms_)
    if (a.kind == Axiom::Kind::Concept && !a.negated) concept_edges.emplace(a.lhs_concept, a.rhs_concept);
  for (const auto& [p, ups] : role_up_)
    for (const Role& s : ups)
      if (s != p) concept_edges.emplace(BasicConcept::some(p), BasicConcept::some(s));
  concept_up_ = reflexive_transitive_closure(concepts, concept_edges);

  // Negative inclusions, closed under inverting both sides of role ones.
  std::vector<std::pair<BasicConcept, BasicConcept>> concept_nis;
  std::vector<std::pair<Role, Role>> role_nis;
  for (const Axiom& a : axioms_) {
    if (!a.negated) continue;
    if (a.kind == Axiom::Kind::Concept) {
      concept_nis.emplace_back(a.lhs_concept, a.rhs_concept);
    } else {
      role_nis.emplace_back(a.lhs_role, a.rhs_role);
      role_nis.emplace_back(a.lhs_role.inv(), a.rhs_role.inv());
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [b, ups] : concept_up_) {
      if (unsat_concepts_.contains(b)) continue;
      bool bad = std::any_of(ups.begin(), ups.end(), [&](const BasicConcept& c) {
                   return c != b && unsat_concepts_.contains(c);
                 }) ||
                 std::any_of(concept_nis.begin(), concept_nis.end(),
                             [&](const auto& ni) { return ups.contains(ni.first) && ups.contains(ni.second); }) ||
                 (b.exists && unsat_roles_.contains(b.role()));
      if (bad) changed = unsat_concepts_.insert(b).second || changed;
    }
    for (const auto& [p, ups] : role_up_) {
      if (unsat_roles_.contains(p)) continue;
      bool bad = std::any_of(ups.begin(), ups.end(),
                             [&](const Role& s) { return s != p && unsat_roles_.contains(s); }) ||
                 std::any_of(role_nis.begin(), role_nis.end(),
                             [&](const auto& ni) { return ups.contains(ni.first) && ups.contains(ni.second); }) ||
                 unsat_concepts_.contains(BasicConcept::some(p)) ||
                 unsat_concepts_.contains(BasicConcept::some(p.inv())) || unsat_roles_.contains(p.inv());
      if (bad) changed = unsat_roles_.insert(p).second || changed;
    }
  }
}

bool TBox::entails(const BasicConcept& b, const BasicConcept& c) const {
  if (b == c) return true;
  auto it = concept_up_.find(b);
  return it != concept_up_.end() && it->second.contains(c);
}

bool TBox::entails(const Role& p, const Role& s) const {
  if (p == s) return true;
  auto it = role_up_.find(p);
  return it != role_up_.end() && it->second.contains(s);
}

std::vector<BasicConcept> TBox::superconcepts(const BasicConcept& b) const {
  auto it = concept_up_.find(b);
  if (it == concept_up_.end()) return {b};
  return {it->second.begin(), it->second.end()};
}

std::vector<Role> TBox::superroles(const Role& p) const {
  auto it = role_up_.find(p);
  if (it == role_up_.end()) return {p};
  return {it->second.begin(), it->second.end()};
}

bool TBox::unsatisfiable(const BasicConcept& b) const { return unsat_concepts_.contains(b); }
bool TBox::unsatisfiable(const Role& p) const { return unsat_roles_.contains(p); }

bool TBox::entails_disjoint(const BasicConcept& b, const BasicConcept& c) const {
  if (unsatisfiable(b) || unsatisfiable(c)) return true;
  for (const Axiom& a : axioms_) {
    if (!a.negated || a.kind != Axiom::Kind::Concept) continue;
    if ((entails(b, a.lhs_concept) && entails(c, a.rhs_concept)) ||
        (entails(c, a.lhs_concept) && entails(b, a.rhs_concept)))
      return true;
  }
  return false;
}

bool TBox::entails_disjoint(const Role& p, const Role& s) const {
  if (unsatisfiable(p) || unsatisfiable(s)) return true;
  for (const Axiom& a : axioms_) {
    if (!a.negated || a.kind != Axiom::Kind::Role) continue;
    for (const auto& [x, y] : {std::pair(a.lhs_role, a.rhs_role), std::pair(a.lhs_role.inv(), a.rhs_role.inv())})
      if ((entails(p, x) && entails(s, y)) || (entails(s, x) && entails(p, y))) return true;
  }
  return false;
}

// --------------------------------------------------------------- ABox side

namespace {

void validate_abox(const Database& abox, const TBox& t) {
  for (const auto& [name, arity] : abox.signature().entries()) {
    if (arity > 2) throw InvalidArgument("ABox relation " + name + " has arity " + std::to_string(arity));
    if (arity == 1 && t.role_names().contains(name))
      throw InvalidArgument(name + " is a role in the TBox but a concept in the ABox");
    if (arity == 2 && t.concept_names().contains(name))
      throw InvalidArgument(name + " is a concept in the TBox but a role in the ABox");
  }
}

/// Entailed assertions about the ABox constants.
struct AboxClosure {
  std::map<std::string, std::set<BasicConcept>> concepts;
  /// Roles holding from the first constant to the second, both directions.
  std::map<std::pair<std::string, std::string>, std::set<Role>> roles;

  AboxClosure(const Database& abox, const TBox& t) {
    for (const Fact& f : abox.facts()) {
      if (f.arity() == 1) {
        for (const BasicConcept& b : t.superconcepts(BasicConcept::atomic(f.relation)))
          concepts[f.args[0].name()].insert(b);
        continue;
      }
      const std::string &a = f.args[0].name(), &b = f.args[1].name();
      Role p{f.relation, false};
      for (const BasicConcept& c : t.superconcepts(BasicConcept::some(p))) concepts[a].insert(c);
      for (const BasicConcept& c : t.superconcepts(BasicConcept::some(p.inv()))) concepts[b].insert(c);
      for (const Role& s : t.superroles(p)) {
        roles[{a, b}].insert(s);
        roles[{b, a}].insert(s.inv());
      }
    }
  }
};

bool consistent_closure(const Database& abox, const TBox& t) {
  AboxClosure c(abox, t);
  for (const auto& [_, bs] : c.concepts) {
    for (const BasicConcept& b : bs)
      if (t.unsatisfiable(b)) return false;
    for (const Axiom& a : t.axioms())
      if (a.negated && a.kind == Axiom::Kind::Concept && bs.contains(a.lhs_concept) && bs.contains(a.rhs_concept))
        return false;
  }
  for (const auto& [_, ps] : c.roles)
    for (const Axiom& a : t.axioms())
      if (a.negated && a.kind == Axiom::Kind::Role && ps.contains(a.lhs_role) && ps.contains(a.rhs_role))
        return false;
  return true;
}

void require_consistent(const Database& abox, const TBox& t) {
  ConsistencyResult r = is_consistent(abox, t);
  if (r.consistent) return;
  std::vector<std::string> conflict;
  std::string msg = "inconsistent knowledge base; conflicting facts:";
  for (const Fact& f : r.conflict) {
    conflict.push_back(to_string(f));
    msg += " " + to_string(f);
  }
  throw InconsistentKB(msg, std::move(conflict));
}

}  // namespace

ConsistencyResult is_consistent(const Database& abox, const TBox& t) {
  validate_abox(abox, t);
  if (consistent_closure(abox, t)) return {};
  // Conflicts in DL-Lite_R involve at most two facts.
  auto facts = abox.facts();
  for (const Fact& f : facts)
    if (!consistent_closure(Database({f}), t)) return {false, {f}};
  for (std::size_t i = 0; i < facts.size(); ++i)
    for (std::size_t j = i + 1; j < facts.size(); ++j)
      if (!consistent_closure(Database({facts[i], facts[j]}), t)) return {false, {facts[i], facts[j]}};
  throw Error("inconsistency without a conflict of size at most two");
}

// ---------------------------------------------------------- canonical model

std::string to_string(const CanonicalElement& e) {
  std::string out = e.root;
  for (const Role& r : e.word) out += "." + to_string(r);
  return out;
}

namespace {

/// Role and concept tables of a TBox over a fixed set of names. They depend
/// on the TBox and the ABox signature only, so they are shared between
/// targets.
struct CanonicalTables {
  TBox tbox;
  std::vector<Role> roles;  // index r: roles[r], with roles[r ^ 1] its inverse
  std::map<Role, int> role_index;
  std::set<std::string> role_names, concept_names;
  std::vector<std::pair<std::string, std::size_t>> rels;
  std::map<std::string, int> rel_index;
  std::vector<std::vector<int>> gen_after;            // per last role
  std::vector<std::set<std::string>> concepts_after;  // per last role
  std::vector<std::vector<bool>> sub;                 // sub[p][r]: p ⊑ r

  CanonicalTables(const TBox& t, std::set<std::string> rn, std::set<std::string> cn)
      : tbox(t), role_names(std::move(rn)), concept_names(std::move(cn)) {
    for (const std::string& r : role_names) {
      role_index[Role{r, false}] = static_cast<int>(roles.size());
      roles.push_back(Role{r, false});
      role_index[Role{r, true}] = static_cast<int>(roles.size());
      roles.push_back(Role{r, true});
    }
    for (const std::string& c : concept_names) add_rel(c, 1);
    for (const std::string& r : role_names) add_rel(r, 2);

    const std::size_t nr = roles.size();
    sub.assign(nr, std::vector<bool>(nr, false));
    for (std::size_t p = 0; p < nr; ++p)
      for (std::size_t r = 0; r < nr; ++r) sub[p][r] = tbox.entails(roles[p], roles[r]);
    gen_after.resize(nr);
    concepts_after.resize(nr);
    for (std::size_t q = 0; q < nr; ++q) {
      BasicConcept tail = BasicConcept::some(roles[q ^ 1]);
      for (std::size_t p = 0; p < nr; ++p)
        if (p != (q ^ 1) && tbox.entails(tail, BasicConcept::some(roles[p]))) gen_after[q].push_back(static_cast<int>(p));
      for (const std::string& c : concept_names)
        if (tbox.entails(tail, BasicConcept::atomic(c))) concepts_after[q].insert(c);
    }
  }

  void add_rel(const std::string& name, std::size_t arity) {
    rel_index.emplace(name, static_cast<int>(rels.size()));
    rels.emplace_back(name, arity);
  }
};

/// Small per-thread memo; relevance checks build many targets over the same
/// TBox.
std::shared_ptr<const CanonicalTables> tables_for(const TBox& t, const Signature& abox_sig) {
  std::set<std::string> role_names = t.role_names(), concept_names = t.concept_names();
  for (const auto& [name, arity] : abox_sig.entries()) (arity == 2 ? role_names : concept_names).insert(name);
  thread_local std::vector<std::shared_ptr<const CanonicalTables>> recent;
  for (const auto& tab : recent)
    if (tab->role_names == role_names && tab->concept_names == concept_names && tab->tbox == t) return tab;
  auto tab = std::make_shared<const CanonicalTables>(t, std::move(role_names), std::move(concept_names));
  if (recent.size() >= 16) recent.erase(recent.begin());
  recent.push_back(tab);
  return tab;
}

}  // namespace

struct CanonicalTarget::Impl {
  struct Node {
    ElemId parent = kUnbound;
    int last = -1;  // role index of the last letter; -1 for constants
    std::size_t length = 0;
    std::string name;
  };

  std::shared_ptr<const CanonicalTables> tab;
  const TBox& tbox;
  std::size_t depth;
  const std::vector<Role>& roles;
  const std::map<Role, int>& role_index;
  const std::set<std::string>& concept_names;
  const std::vector<std::pair<std::string, std::size_t>>& rels;
  const std::map<std::string, int>& rel_index;
  const std::vector<std::vector<int>>& gen_after;
  const std::vector<std::set<std::string>>& concepts_after;
  const std::vector<std::vector<bool>>& sub;

  std::vector<Node> nodes;
  std::map<std::string, ElemId> constants;
  std::map<std::pair<ElemId, int>, ElemId> children;
  std::vector<std::set<std::string>> const_concepts;            // per constant
  std::vector<std::vector<int>> const_generating;               // per constant
  std::vector<std::map<ElemId, std::vector<ElemId>>> abox_out;  // per role: a -> b with P(a,b)
  std::vector<ElemId> seed_list;

  Impl(const Database& abox, const TBox& t, std::size_t d)
      : tab(tables_for(t, abox.signature())),
        tbox(tab->tbox),
        depth(d),
        roles(tab->roles),
        role_index(tab->role_index),
        concept_names(tab->concept_names),
        rels(tab->rels),
        rel_index(tab->rel_index),
        gen_after(tab->gen_after),
        concepts_after(tab->concepts_after),
        sub(tab->sub) {
    const std::size_t nr = roles.size();
  AboxClosure closure(abox, tbox);
    for (const std::string& c : abox.constants()) {
      constants.emplace(c, static_cast<ElemId>(nodes.size()));
      nodes.push_back(Node{kUnbound, -1, 0, c});
    }
    abox_out.resize(nr);
    for (const auto& [pair, ps] : closure.roles)
      for (const Role& p : ps) {
        auto it = role_index.find(p);
        if (it == role_index.end()) continue;
        abox_out[it->second][constants.at(pair.first)].push_back(constants.at(pair.second));
      }
    for (auto& per_role : abox_out)
      for (auto& [_, targets] : per_role) {
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      }
    // A constant gets an anonymous P-successor only when no constant
    // already is one.
    for (const auto& [c, id] : constants) {
      std::set<std::string> names;
      std::vector<int> gen;
      for (const BasicConcept& b : closure.concepts[c]) {
        if (!b.exists) {
          names.insert(b.name);
        } else if (auto it = role_index.find(b.role()); it != role_index.end() && !abox_out[it->second].contains(id)) {
          gen.push_back(it->second);
        }
      }
      const_concepts.push_back(std::move(names));
      std::sort(gen.begin(), gen.end());
      const_generating.push_back(std::move(gen));
    }
    build_seeds();
  }

  bool is_const(ElemId e) const { return nodes[e].last < 0; }

  const std::vector<int>& generating(ElemId e) const {
    return is_const(e) ? const_generating[e] : gen_after[nodes[e].last];
  }

  ElemId child(ElemId e, int p) {
    auto [it, inserted] = children.emplace(std::pair(e, p), static_cast<ElemId>(nodes.size()));
    if (inserted) {
      const Node& parent = nodes[e];
      nodes.push_back(Node{e, p, parent.length + 1, parent.name + "." + to_string(roles[p])});
    }
    return it->second;
  }

  std::vector<ElemId> children_of(ElemId e) {
    std::vector<ElemId> out;
    if (nodes[e].length >= depth) return out;
    for (int p : generating(e)) out.push_back(child(e, p));
    return out;
  }

  /// Elements y with r(e, y).
  void neighbours(ElemId e, int r, std::vector<ElemId>& out) {
    if (is_const(e)) {
      auto it = abox_out[r].find(e);
      if (it != abox_out[r].end()) out.insert(out.end(), it->second.begin(), it->second.end());
    } else if (sub[nodes[e].last][r ^ 1]) {
      out.push_back(nodes[e].parent);
    }
    if (nodes[e].length >= depth) return;
    for (int p : generating(e))
      if (sub[p][r]) out.push_back(child(e, p));
  }

  bool has_role(ElemId x, ElemId y, int r) const {
    if (is_const(x) && is_const(y)) {
      auto it = abox_out[r].find(x);
      return it != abox_out[r].end() && std::binary_search(it->second.begin(), it->second.end(), y);
    }
    if (!is_const(y) && nodes[y].parent == x) return sub[nodes[y].last][r];
    if (!is_const(x) && nodes[x].parent == y) return sub[nodes[x].last][r ^ 1];
    return false;
  }

  bool has_concept(ElemId e, const std::string& name) const {
    return is_const(e) ? const_concepts[e].contains(name) : concepts_after[nodes[e].last].contains(name);
  }

  /// Constants, then a shortest element for every role that can end a word.
  void build_seeds() {
    for (const auto& [_, id] : constants) seed_list.push_back(id);
    std::vector<bool> seen(roles.size(), false);
    std::deque<ElemId> queue;
    for (const auto& [_, id] : constants) queue.push_back(id);
    while (!queue.empty()) {
      ElemId e = queue.front();
      queue.pop_front();
      if (nodes[e].length >= depth) continue;
      for (int p : generating(e)) {
        if (seen[p]) continue;
        seen[p] = true;
        ElemId c = child(e, p);
        seed_list.push_back(c);
        queue.push_back(c);
      }
    }
  }

  CanonicalElement element(ElemId e) const {
    CanonicalElement out;
    while (!is_const(e)) {
      out.word.push_back(roles[nodes[e].last]);
      e = nodes[e].parent;
    }
    out.root = nodes[e].name;
    std::reverse(out.word.begin(), out.word.end());
    return out;
  }
};

CanonicalTarget::CanonicalTarget(const Database& abox, const TBox& t, std::size_t depth)
    : impl_(std::make_unique<Impl>(abox, t, depth)) {}

CanonicalTarget::~CanonicalTarget() = default;

std::optional<ElemId> CanonicalTarget::constant(const std::string& name) {
  auto it = impl_->constants.find(name);
  if (it == impl_->constants.end()) return std::nullopt;
  return it->second;
}

std::optional<int> CanonicalTarget::relation(const std::string& name, std::size_t arity) {
  auto it = impl_->rel_index.find(name);
  if (it == impl_->rel_index.end() || impl_->rels[it->second].second != arity) return std::nullopt;
  return it->second;
}

bool CanonicalTarget::holds(int rel, std::span<const ElemId> tuple) {
  const auto& [name, arity] = impl_->rels[rel];
  if (arity == 1) return impl_->has_concept(tuple[0], name);
  return impl_->has_role(tuple[0], tuple[1], impl_->role_index.at(Role{name, false}));
}

void CanonicalTarget::extend(int rel, std::span<const ElemId> partial, std::size_t pos, std::vector<ElemId>& out) {
  const auto& [name, arity] = impl_->rels[rel];
  if (arity == 1) {
    if (partial[0] != kUnbound && impl_->has_concept(partial[0], name)) out.push_back(partial[0]);
    return;
  }
  int r = impl_->role_index.at(Role{name, false});
  ElemId other = partial[1 - pos];
  if (other == kUnbound) throw InvalidArgument("generated targets need a bound position to extend");
  std::vector<ElemId> found;
  impl_->neighbours(other, pos == 1 ? r : r ^ 1, found);
  for (ElemId e : found)
    if (partial[pos] == kUnbound || partial[pos] == e) out.push_back(e);
}

void CanonicalTarget::seeds(std::vector<ElemId>& out) {
  out.insert(out.end(), impl_->seed_list.begin(), impl_->seed_list.end());
}

std::string CanonicalTarget::element_name(ElemId e) const { return impl_->nodes[e].name; }

CanonicalElement CanonicalTarget::element(ElemId e) const { return impl_->element(e); }

bool CanonicalTarget::is_constant(ElemId e) const { return impl_->is_const(e); }

std::optional<std::size_t> CanonicalModel::find(const CanonicalElement& e) const {
  auto it = std::find(elements.begin(), elements.end(), e);
  if (it == elements.end()) return std::nullopt;
  return static_cast<std::size_t>(it - elements.begin());
}

bool CanonicalModel::has_concept(const std::string& name, const CanonicalElement& e) const {
  auto i = find(e);
  auto it = concepts.find(name);
  return i && it != concepts.end() && it->second.contains(*i);
}

bool CanonicalModel::has_role(const std::string& name, const CanonicalElement& a, const CanonicalElement& b) const {
  auto i = find(a), j = find(b);
  auto it = roles.find(name);
  return i && j && it != roles.end() && it->second.contains({*i, *j});
}

CanonicalModel canonical_model(const Database& abox, const TBox& t, std::size_t depth, std::size_t element_cap) {
  require_consistent(abox, t);
  CanonicalTarget::Impl m(abox, t, depth);
  // Breadth-first generation assigns ids in order of word length.
  std::vector<ElemId> order;
  for (const auto& [_, id] : m.constants) order.push_back(id);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (ElemId c : m.children_of(order[i])) {
      order.push_back(c);
      if (order.size() > element_cap)
        throw ResourceLimit("canonical model exceeds " + std::to_string(element_cap) + " elements");
    }
  }
  std::map<ElemId, std::size_t> index;
  CanonicalModel out;
  out.depth = depth;
  for (ElemId e : order) {
    index.emplace(e, out.elements.size());
    out.elements.push_back(m.element(e));
  }
  for (const std::string& c : m.concept_names) {
    auto& ext = out.concepts[c];
    for (ElemId e : order)
      if (m.has_concept(e, c)) ext.insert(index.at(e));
  }
  for (int r = 0; r < static_cast<int>(m.roles.size()); r += 2) {
    auto& ext = out.roles[m.roles[r].name];
    for (ElemId e : order) {
      std::vector<ElemId> ns;
      m.neighbours(e, r, ns);
      for (ElemId n : ns) ext.emplace(index.at(e), index.at(n));
    }
  }
  return out;
}

// --------------------------------------------------------------- evaluation

std::size_t evaluation_depth(const TBox& t, const CQ& q) { return 2 * t.size() + q.size(); }
std::size_t atom_depth(const TBox& t) { return 2 * t.size() + 2; }

bool evaluate_omq(const Database& abox, const OMQ& q, std::optional<std::size_t> depth) {
  if (!q.query.diseqs().empty()) throw InvalidArgument("ontology-mediated queries cannot contain inequalities");
  require_consistent(abox, q.tbox);
  if (q.query.empty()) return true;
  CanonicalTarget target(abox, q.tbox, depth.value_or(evaluation_depth(q.tbox, q.query)));
  return find_hom(q.query, target).has_value();
}

bool potentially_relevant(const Fact& f, const Atom& a, const TBox& t) {
  Database single({f});
  validate_abox(single, t);
  if (!consistent_closure(single, t)) return false;
  CanonicalTarget target(single, t, atom_depth(t));
  return find_hom(CQ({a}), target).has_value();
}

namespace {

/// One fact per isomorphism type over the given names and constants, plus
/// fresh constants.
std::vector<Fact> fact_shapes(const TBox& t, const std::vector<Atom>& atoms) {
  std::set<std::string> concepts = t.concept_names(), roles = t.role_names();
  std::set<std::string> taken;
  for (const Atom& a : atoms) {
    (a.arity() == 1 ? concepts : roles).insert(a.relation);
    for (const Term& x : a.args)
      if (x.is_constant()) taken.insert(x.name());
  }
  std::vector<Term> consts;
  for (const std::string& c : taken) consts.push_back(Term::constant(c));
  auto is_taken = [&](const std::string& s) { return taken.contains(s); };
  Term c1 = Term::constant(fresh_name("c", is_taken));
  taken.insert(c1.name());
  Term c2 = Term::constant(fresh_name("d", is_taken));
  std::vector<Term> unary = consts, binary = consts;
  unary.push_back(c1);
  binary.push_back(c1);
  binary.push_back(c2);

  std::vector<Fact> out;
  for (const std::string& a : concepts)
    if (!roles.contains(a))
      for (const Term& x : unary) out.push_back(Fact{a, {x}});
  for (const std::string& r : roles) {
    if (concepts.contains(r)) continue;
    for (const Term& x : binary)
      for (const Term& y : binary) {
        // c2 only ever appears next to c1, and never alone.
        if ((x == c2 || y == c2) && !(x == c1 || y == c1)) continue;
        out.push_back(Fact{r, {x, y}});
      }
  }
  return out;
}

bool single_fact_entails(const Fact& f, const Atom& a, const TBox& t) {
  if (a.arity() > 2) return false;
  return potentially_relevant(f, a, t);
}

bool self_interacting_via(const Fact& f, const Atom& a, const TBox& t) {
  Database single({f});
  if (!consistent_closure(single, t)) return false;
  CanonicalTarget target(single, t, atom_depth(t));
  CQ q({a});
  std::vector<Term> terms = q.terms();
  std::vector<std::set<ElemId>> images(terms.size());
  for_each_hom(q, target, {}, [&](std::span<const ElemId> vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) images[i].insert(vals[i]);
    return true;
  });
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!terms[i].is_variable() || images[i].size() < 2) continue;
    if (std::any_of(images[i].begin(), images[i].end(), [&](ElemId e) { return target.is_constant(e); }))
      return true;
  }
  return false;
}

}  // namespace

bool interacting(const Atom& a, const Atom& b, const TBox& t) {
  for (const Fact& f : fact_shapes(t, {a, b}))
    if (single_fact_entails(f, a, t) && single_fact_entails(f, b, t)) return true;
  return false;
}

bool self_interacting(const Atom& a, const TBox& t) {
  for (const Fact& f : fact_shapes(t, {a}))
    if (self_interacting_via(f, a, t)) return true;
  return false;
}

InteractionInfo analyze_interactions(const OMQ& q) {
  const std::vector<Atom>& atoms = q.query.atoms();
  std::vector<bool> is_int(atoms.size(), false);
  for (const Fact& f : fact_shapes(q.tbox, atoms)) {
    std::vector<std::size_t> entailed;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (single_fact_entails(f, atoms[i], q.tbox)) entailed.push_back(i);
    if (entailed.size() >= 2)
      for (std::size_t i : entailed) is_int[i] = true;
    for (std::size_t i : entailed)
      if (!is_int[i] && self_interacting_via(f, atoms[i], q.tbox)) is_int[i] = true;
  }
  InteractionInfo info;
  std::set<Term> int_vars, other_vars;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    (is_int[i] ? info.int_atoms : info.other_atoms).push_back(atoms[i]);
    for (const Term& x : atoms[i].args)
      if (x.is_variable()) (is_int[i] ? int_vars : other_vars).insert(x);
  }
  std::set_intersection(int_vars.begin(), int_vars.end(), other_vars.begin(), other_vars.end(),
                        std::back_inserter(info.frontier));
  return info;
}

std::vector<Atom> int_atoms(const OMQ& q) { return analyze_interactions(q).int_atoms; }
std::size_t interaction_width(const OMQ& q) { return analyze_interactions(q).int_atoms.size(); }
std::vector<Term> frontier_vars(const OMQ& q) { return analyze_interactions(q).frontier; }

std::string to_string(OmqAlgorithm a) {
  switch (a) {
    case OmqAlgorithm::None: return "none";
    case OmqAlgorithm::TypeI: return "omq-type-i";
    case OmqAlgorithm::TypeII: return "omq-type-ii";
  }
  return "none";
}

// ---------------------------------------------------------------- relevance

namespace {

/// Pins variables to constants through fresh concepts: for x -> c, adds the
/// atom A_c(x) to the query and the fact A_c(c) to the ABox.
struct Instantiation {
  std::vector<Atom> atoms;
  std::vector<Fact> facts;
};

Instantiation pin(const std::map<Term, std::string>& assignment, const OMQ& q, const Database& abox) {
  std::set<std::string> used(q.tbox.concept_names());
  used.insert(q.tbox.role_names().begin(), q.tbox.role_names().end());
  for (const auto& [name, _] : abox.signature().entries()) used.insert(name);
  Signature qsig = q.query.signature();
  for (const auto& [name, _] : qsig.entries()) used.insert(name);
  Instantiation out;
  std::map<std::string, std::string> concept_for;
  for (const auto& [x, c] : assignment) {
    auto it = concept_for.find(c);
    if (it == concept_for.end()) {
      std::string name = fresh_name("Pin_" + c, [&](const std::string& s) { return used.contains(s); });
      used.insert(name);
      it = concept_for.emplace(c, name).first;
      out.facts.push_back(Fact{name, {Term::constant(c)}});
    }
    out.atoms.push_back(Atom{it->second, {x}});
  }
  return out;
}

bool evaluate_pinned(const std::vector<Atom>& rest, const std::map<Term, std::string>& assignment, const OMQ& q,
                     const Database& abox) {
  Instantiation inst = pin(assignment, q, abox);
  std::vector<Atom> atoms = rest;
  atoms.insert(atoms.end(), inst.atoms.begin(), inst.atoms.end());
  std::vector<Fact> facts(abox.facts().begin(), abox.facts().end());
  facts.insert(facts.end(), inst.facts.begin(), inst.facts.end());
  return evaluate_omq(Database(std::move(facts)), OMQ{q.tbox, CQ(std::move(atoms))});
}

std::vector<std::size_t> potential_atoms(const Fact& f, const OMQ& q) {
  std::vector<std::size_t> out;
  Database single({f});
  validate_abox(single, q.tbox);
  if (!consistent_closure(single, q.tbox)) return out;
  CanonicalTarget target(single, q.tbox, atom_depth(q.tbox));
  const auto& atoms = q.query.atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (atoms[i].arity() <= 2 && find_hom(CQ({atoms[i]}), target).has_value()) out.push_back(i);
  return out;
}

bool contains(const std::vector<Atom>& atoms, const Atom& a) {
  return std::find(atoms.begin(), atoms.end(), a) != atoms.end();
}

}  // namespace

bool relevance_type_i(const Fact& f, const OMQ& q, const Database& abox) {
  return relevance_type_i(f, q, abox, analyze_interactions(q));
}

namespace {

bool type_i(const Fact& f, const OMQ& q, const Database& abox, const InteractionInfo& info,
            const std::vector<std::size_t>& pot) {
  if (pot.size() != 1 || contains(info.int_atoms, q.query.atoms()[pot[0]]))
    throw InvalidArgument("fact must be potentially relevant to exactly one non-interacting atom");
  const Atom& alpha = q.query.atoms()[pot[0]];

  Database single({f});
  CanonicalTarget target(single, q.tbox, atom_depth(q.tbox));
  CQ alpha_q({alpha});
  std::vector<Term> terms = alpha_q.terms();
  std::optional<std::vector<ElemId>> h;
  for_each_hom(alpha_q, target, {}, [&](std::span<const ElemId> vals) {
    h.emplace(vals.begin(), vals.end());
    return false;
  });
  std::vector<Atom> rest;
  std::set<Term> rest_vars;
  for (const Atom& a : q.query.atoms()) {
    if (a == alpha) continue;
    rest.push_back(a);
    for (const Term& x : a.args)
      if (x.is_variable()) rest_vars.insert(x);
  }
  std::map<Term, std::string> assignment;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!terms[i].is_variable() || !rest_vars.contains(terms[i])) continue;
    // A shared variable in the anonymous part would make alpha interact.
    if (!target.is_constant((*h)[i])) return false;
    assignment[terms[i]] = target.element_name((*h)[i]);
  }
  return evaluate_pinned(rest, assignment, q, abox);
}

bool type_ii(const Fact& f, const OMQ& q, const Database& abox, const InteractionInfo& info,
             const std::vector<std::size_t>& pot) {
  bool touches_int = std::any_of(pot.begin(), pot.end(),
                                 [&](std::size_t i) { return contains(info.int_atoms, q.query.atoms()[i]); });
  if (!touches_int) throw InvalidArgument("fact must be potentially relevant to an interacting atom");

  const std::size_t k = info.int_atoms.size();
  const CQ int_q(info.int_atoms);
  const std::size_t depth = evaluation_depth(q.tbox, int_q);
  std::vector<Fact> others;
  for (const Fact& g : abox.facts())
    if (g != f) others.push_back(g);

  auto admits = [&](const std::vector<Fact>& s, const Frozen& frozen) {
    CanonicalTarget target(Database(s), q.tbox, depth);
    return find_hom(int_q, target, frozen).has_value();
  };

  // Candidate sets S ∋ f by increasing size.
  for (std::size_t size = 1; size <= k && size <= abox.size(); ++size) {
    std::vector<bool> pick(others.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(size - 1), true);
    do {
      std::vector<Fact> s{f};
      for (std::size_t i = 0; i < others.size(); ++i)
        if (pick[i]) s.push_back(others[i]);
      Database sdb(s);
      if (!admits(s, {})) continue;
      std::vector<std::string> consts = sdb.constants();

      // Frontier variables land on constants of S.
      std::vector<std::size_t> choice(info.frontier.size(), 0);
      for (bool more = true; more;) {
        Frozen frozen;
        for (std::size_t i = 0; i < choice.size(); ++i) frozen[info.frontier[i]] = consts[choice[i]];
        bool ok = admits(s, frozen);
        // No strictly smaller S' admits a homomorphism agreeing on the frontier.
        for (std::uint64_t m = 0; ok && m + 1 < (std::uint64_t{1} << s.size()); ++m) {
          std::vector<Fact> smaller;
          for (std::size_t i = 0; i < s.size(); ++i)
            if (m >> i & 1U) smaller.push_back(s[i]);
          if (admits(smaller, frozen)) ok = false;
        }
        if (ok && evaluate_pinned(info.other_atoms, frozen, q, abox)) return true;

        std::size_t i = 0;
        while (i < choice.size() && ++choice[i] == consts.size()) choice[i++] = 0;
        more = i < choice.size();
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return false;
}

}  // namespace

bool relevance_type_i(const Fact& f, const OMQ& q, const Database& abox, const InteractionInfo& info) {
  return type_i(f, q, abox, info, potential_atoms(f, q));
}

bool relevance_type_ii(const Fact& f, const OMQ& q, const Database& abox) {
  return relevance_type_ii(f, q, abox, analyze_interactions(q));
}

bool relevance_type_ii(const Fact& f, const OMQ& q, const Database& abox, const InteractionInfo& info) {
  return type_ii(f, q, abox, info, potential_atoms(f, q));
}

OmqRelevance relevance_omq(const Fact& f, const OMQ& q, const Database& abox, std::size_t cap) {
  if (!abox.contains(f)) throw InvalidArgument("fact " + to_string(f) + " is not in the ABox");
  require_consistent(abox, q.tbox);
  return relevance_omq(f, q, abox, analyze_interactions(q), cap);
}

OmqRelevance relevance_omq(const Fact& f, const OMQ& q, const Database& abox, const InteractionInfo& info,
                           std::size_t cap) {
  if (!abox.contains(f)) throw InvalidArgument("fact " + to_string(f) + " is not in the ABox");
  if (!q.query.diseqs().empty()) throw InvalidArgument("ontology-mediated queries cannot contain inequalities");
  require_consistent(abox, q.tbox);
  if (info.int_atoms.size() > cap)
    throw ResourceLimit("interaction width " + std::to_string(info.int_atoms.size()) + " exceeds cap " +
                        std::to_string(cap));
  std::vector<std::size_t> pot = potential_atoms(f, q);
  if (pot.empty()) return {false, OmqAlgorithm::None};
  if (pot.size() == 1 && !contains(info.int_atoms, q.query.atoms()[pot[0]]))
    return {type_i(f, q, abox, info, pot), OmqAlgorithm::TypeI};
  return {type_ii(f, q, abox, info, pot), OmqAlgorithm::TypeII};
}

}  // namespace factrel
