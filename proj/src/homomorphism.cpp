#include "factrel/homomorphism.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "factrel/error.hpp"

namespace factrel {

// ---------------------------------------------------------------- Structure

ElemId Structure::intern(const std::string& name, bool is_constant) {
  auto [it, inserted] = ids_.emplace(name, static_cast<ElemId>(names_.size()));
  if (inserted) {
    names_.push_back(name);
    is_constant_.push_back(is_constant);
  }
  return it->second;
}

void Structure::add_tuple(const Atom& a, std::uint32_t origin) {
  auto [it, inserted] = rel_ids_.emplace(std::pair(a.relation, a.arity()), static_cast<int>(rels_.size()));
  if (inserted) rels_.push_back(Rel{a.arity(), {}, {}});
  Rel& r = rels_[it->second];
  for (const Term& t : a.args) r.flat.push_back(intern(t.name(), t.is_constant()));
  r.origin.push_back(origin);
}

Structure::Structure(const Database& d) {
  auto facts = d.facts();
  for (std::size_t i = 0; i < facts.size(); ++i) add_tuple(facts[i], static_cast<std::uint32_t>(i));
}

Structure::Structure(const CQ& q, std::span<const std::size_t> skip) {
  for (const Term& t : q.terms()) intern(t.name(), t.is_constant());
  const auto& atoms = q.atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (std::find(skip.begin(), skip.end(), i) != skip.end()) continue;
    add_tuple(atoms[i], static_cast<std::uint32_t>(i));
  }
  for (const auto& [l, r] : q.diseqs()) {
    ElemId a = ids_.at(l.name()), b = ids_.at(r.name());
    diseqs_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(diseqs_.begin(), diseqs_.end());
}

std::optional<ElemId> Structure::constant(const std::string& name) {
  auto it = ids_.find(name);
  if (it == ids_.end() || !is_constant_[it->second]) return std::nullopt;
  return it->second;
}

std::optional<int> Structure::relation(const std::string& name, std::size_t arity) {
  auto it = rel_ids_.find(std::pair(name, arity));
  if (it == rel_ids_.end()) return std::nullopt;
  return it->second;
}

bool Structure::holds(int rel, std::span<const ElemId> tuple) { return tuple_origin(rel, tuple) >= 0; }

long Structure::tuple_origin(int rel, std::span<const ElemId> tuple) const {
  const Rel& r = rels_[rel];
  for (std::size_t row = 0; row * r.arity < r.flat.size(); ++row) {
    if (std::equal(tuple.begin(), tuple.end(), r.flat.begin() + static_cast<long>(row * r.arity)))
      return r.origin[row];
  }
  return -1;
}

void Structure::extend(int rel, std::span<const ElemId> partial, std::size_t pos, std::vector<ElemId>& out) {
  const Rel& r = rels_[rel];
  for (std::size_t base = 0; base < r.flat.size(); base += r.arity) {
    bool ok = true;
    for (std::size_t i = 0; i < r.arity && ok; ++i)
      ok = partial[i] == kUnbound || partial[i] == r.flat[base + i];
    if (ok) out.push_back(r.flat[base + pos]);
  }
}

void Structure::seeds(std::vector<ElemId>& out) {
  for (ElemId e = 0; e < names_.size(); ++e) out.push_back(e);
}

bool Structure::distinct(ElemId a, ElemId b) const {
  if (a == b) return false;
  if (is_constant_[a] && is_constant_[b]) return true;
  return std::binary_search(diseqs_.begin(), diseqs_.end(), std::pair(std::min(a, b), std::max(a, b)));
}

// ------------------------------------------------------------------- search

namespace {

struct Slot {
  bool is_var;
  std::uint32_t value;  // variable index, or element id
};

struct CompiledAtom {
  int rel;
  std::vector<Slot> slots;
};

/// Source query compiled against one target.
class Search {
 public:
  Search(const CQ& source, HomTarget& target, const Frozen& frozen) : target_(target) {
    terms_ = source.terms();
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (terms_[i].is_variable()) {
        term_slot_.push_back(Slot{true, static_cast<std::uint32_t>(vars_.size())});
        vars_.push_back(terms_[i]);
      } else {
        auto e = target.constant(terms_[i].name());
        term_slot_.push_back(Slot{false, e ? *e : kUnbound});
      }
    }
    assignment_.assign(vars_.size(), kUnbound);
    atoms_of_var_.resize(vars_.size());
    diseqs_of_var_.resize(vars_.size());

    auto slot_of = [&](const Term& t) {
      auto it = std::lower_bound(terms_.begin(), terms_.end(), t);
      return term_slot_[static_cast<std::size_t>(it - terms_.begin())];
    };

    for (const Atom& a : source.atoms()) {
      auto rel = target.relation(a.relation, a.arity());
      if (!rel) {
        impossible_ = true;
        return;
      }
      CompiledAtom ca{*rel, {}};
      for (const Term& t : a.args) {
        Slot s = slot_of(t);
        if (!s.is_var && s.value == kUnbound) {
          impossible_ = true;
          return;
        }
        ca.slots.push_back(s);
      }
      int idx = static_cast<int>(atoms_.size());
      atoms_.push_back(std::move(ca));
      for (const Slot& s : atoms_.back().slots)
        if (s.is_var && (atoms_of_var_[s.value].empty() || atoms_of_var_[s.value].back() != idx))
          atoms_of_var_[s.value].push_back(idx);
    }
    for (const auto& [l, r] : source.diseqs()) {
      Slot a = slot_of(l), b = slot_of(r);
      // A constant missing from the target differs from every element.
      if ((!a.is_var && a.value == kUnbound) || (!b.is_var && b.value == kUnbound)) continue;
      int idx = static_cast<int>(diseqs_.size());
      diseqs_.emplace_back(a, b);
      if (a.is_var) diseqs_of_var_[a.value].push_back(idx);
      if (b.is_var && !(a.is_var && a.value == b.value)) diseqs_of_var_[b.value].push_back(idx);
    }
    for (const auto& [var, name] : frozen) {
      auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
      if (it == vars_.end() || *it != var) continue;
      auto e = target.constant(name);
      if (!e) {
        impossible_ = true;
        return;
      }
      assignment_[static_cast<std::size_t>(it - vars_.begin())] = *e;
    }
    for (std::size_t v = 0; v < vars_.size(); ++v)
      if (assignment_[v] != kUnbound && !consistent(static_cast<std::uint32_t>(v))) impossible_ = true;
    if (!impossible_) check_ground();
    if (!impossible_) build_groups();
  }

  bool impossible() const { return impossible_; }
  std::size_t group_count() const { return groups_.size(); }

  /// Enumerates assignments of group `g`, calling `next` for each; stops and
  /// returns false as soon as `next` does, leaving that assignment in place.
  bool solve_group(std::size_t g, const std::function<bool()>& next) {
    const std::vector<std::uint32_t>& vars = groups_[g];
    bool anchored = std::any_of(vars.begin(), vars.end(), [&](std::uint32_t v) { return has_bound_neighbour(v); });
    if (target_.seeds_cover_domain() || anchored) return step(vars, next);
    // Lazy target: try each variable as the component's topmost element.
    std::vector<ElemId> seeds;
    target_.seeds(seeds);
    for (std::uint32_t v : vars) {
      for (ElemId e : seeds) {
        assignment_[v] = e;
        if (consistent(v) && !step(vars, next)) return false;
      }
      assignment_[v] = kUnbound;
    }
    return true;
  }

  void clear_group(std::size_t g) {
    for (std::uint32_t v : groups_[g]) assignment_[v] = kUnbound;
  }

  /// Runs all groups in sequence; `visit` sees complete assignments.
  bool solve_all(std::size_t g, const std::function<bool()>& visit) {
    if (g == groups_.size()) return visit();
    return solve_group(g, [&] { return solve_all(g + 1, visit); });
  }

  std::vector<ElemId> term_values() const {
    std::vector<ElemId> out;
    out.reserve(terms_.size());
    for (const Slot& s : term_slot_) out.push_back(s.is_var ? assignment_[s.value] : s.value);
    return out;
  }

  Homomorphism to_hom() const {
    Homomorphism h;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const Slot& s = term_slot_[i];
      h.mapping[terms_[i]] = s.is_var ? target_.element_name(assignment_[s.value]) : terms_[i].name();
    }
    return h;
  }

  const std::vector<CompiledAtom>& atoms() const { return atoms_; }
  ElemId value(const Slot& s) const { return s.is_var ? assignment_[s.value] : s.value; }
  const std::vector<std::uint32_t>& group(std::size_t g) const { return groups_[g]; }
  const std::vector<int>& group_atoms(std::size_t g) const { return group_atoms_[g]; }

 private:
  void check_ground() {
    for (const CompiledAtom& a : atoms_) {
      bool ground = std::none_of(a.slots.begin(), a.slots.end(), [](const Slot& s) { return s.is_var; });
      if (ground && !atom_holds(a)) impossible_ = true;
    }
    for (const auto& [a, b] : diseqs_)
      if (!a.is_var && !b.is_var && !target_.distinct(a.value, b.value)) impossible_ = true;
  }

  void build_groups() {
    std::vector<std::uint32_t> parent(vars_.size());
    std::iota(parent.begin(), parent.end(), 0U);
    auto find = [&](std::uint32_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    auto join = [&](const Slot& a, const Slot& b) {
      if (a.is_var && b.is_var) parent[find(a.value)] = find(b.value);
    };
    for (const CompiledAtom& a : atoms_) {
      const Slot* first = nullptr;
      for (const Slot& s : a.slots)
        if (s.is_var) {
          if (first) join(*first, s);
          first = &s;
        }
    }
    bool has_diseq_links = false;
    for (const auto& [a, b] : diseqs_)
      if (a.is_var && b.is_var && find(a.value) != find(b.value)) {
        has_diseq_links = true;
        join(a, b);
      }
    if (has_diseq_links && !target_.seeds_cover_domain())
      throw InvalidArgument("inequality atoms across components are not supported on generated targets");

    std::map<std::uint32_t, std::size_t> index;
    for (std::uint32_t v = 0; v < vars_.size(); ++v) {
      if (assignment_[v] != kUnbound) continue;
      auto [it, inserted] = index.emplace(find(v), groups_.size());
      if (inserted) groups_.emplace_back();
      groups_[it->second].push_back(v);
    }
    group_atoms_.resize(groups_.size());
    for (int i = 0; i < static_cast<int>(atoms_.size()); ++i) {
      for (const Slot& s : atoms_[i].slots) {
        if (s.is_var && assignment_[s.value] == kUnbound) {
          group_atoms_[index.at(find(s.value))].push_back(i);
          break;
        }
      }
    }
  }

  bool atom_holds(const CompiledAtom& a) {
    tuple_.clear();
    for (const Slot& s : a.slots) tuple_.push_back(value(s));
    return target_.holds(a.rel, tuple_);
  }

  /// Checks every atom and inequality of `v` whose terms are all bound.
  bool consistent(std::uint32_t v) {
    for (int ai : atoms_of_var_[v]) {
      const CompiledAtom& a = atoms_[ai];
      bool bound = std::all_of(a.slots.begin(), a.slots.end(), [&](const Slot& s) { return value(s) != kUnbound; });
      if (bound && !atom_holds(a)) return false;
    }
    for (int di : diseqs_of_var_[v]) {
      const auto& [a, b] = diseqs_[di];
      ElemId x = value(a), y = value(b);
      if (x != kUnbound && y != kUnbound && !target_.distinct(x, y)) return false;
    }
    return true;
  }

  bool has_bound_neighbour(std::uint32_t v) const {
    for (int ai : atoms_of_var_[v])
      for (const Slot& s : atoms_[ai].slots)
        if (!(s.is_var && s.value == v) && value(s) != kUnbound) return true;
    return false;
  }

  /// Candidate values for `v` from the atoms with a bound position.
  /// Returns false when no atom constrains `v`.
  bool candidates(std::uint32_t v, std::vector<ElemId>& out) {
    bool constrained = false;
    std::vector<ElemId> partial, got;
    for (int ai : atoms_of_var_[v]) {
      const CompiledAtom& a = atoms_[ai];
      partial.clear();
      std::size_t pos = 0;
      bool any_bound = false;
      for (std::size_t i = 0; i < a.slots.size(); ++i) {
        ElemId x = value(a.slots[i]);
        if (a.slots[i].is_var && a.slots[i].value == v) pos = i;
        if (x != kUnbound) any_bound = true;
        partial.push_back(x);
      }
      if (!any_bound) continue;
      got.clear();
      target_.extend(a.rel, partial, pos, got);
      std::sort(got.begin(), got.end());
      got.erase(std::unique(got.begin(), got.end()), got.end());
      if (!constrained) {
        out.swap(got);
        constrained = true;
      } else {
        std::vector<ElemId> both;
        std::set_intersection(out.begin(), out.end(), got.begin(), got.end(), std::back_inserter(both));
        out.swap(both);
      }
      if (out.empty()) break;
    }
    return constrained;
  }

  bool step(const std::vector<std::uint32_t>& vars, const std::function<bool()>& next) {
    // Most constrained unassigned variable; ties go to the smaller name.
    std::uint32_t best = kUnbound;
    std::vector<ElemId> best_cands, cands;
    bool any_free = false;
    std::uint32_t first_free = kUnbound;
    for (std::uint32_t v : vars) {
      if (assignment_[v] != kUnbound) continue;
      any_free = true;
      cands.clear();
      if (!candidates(v, cands)) {
        if (first_free == kUnbound) first_free = v;
        continue;
      }
      if (best == kUnbound || cands.size() < best_cands.size()) {
        best = v;
        best_cands.swap(cands);
        if (best_cands.empty()) return true;
      }
    }
    if (!any_free) return next();
    if (best == kUnbound) {
      best = first_free;
      best_cands.clear();
      const auto& atoms = atoms_of_var_[best];
      if (!atoms.empty() && target_.seeds_cover_domain()) {
        const CompiledAtom& a = atoms_[atoms.front()];
        std::vector<ElemId> partial(a.slots.size(), kUnbound);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < a.slots.size(); ++i)
          if (a.slots[i].is_var && a.slots[i].value == best) pos = i;
        target_.extend(a.rel, partial, pos, best_cands);
        std::sort(best_cands.begin(), best_cands.end());
        best_cands.erase(std::unique(best_cands.begin(), best_cands.end()), best_cands.end());
      } else {
        target_.seeds(best_cands);
      }
    }
    for (ElemId e : best_cands) {
      assignment_[best] = e;
      if (consistent(best) && !step(vars, next)) return false;
    }
    assignment_[best] = kUnbound;
    return true;
  }

  HomTarget& target_;
  std::vector<Term> terms_;
  std::vector<Slot> term_slot_;
  std::vector<Term> vars_;
  std::vector<ElemId> assignment_;
  std::vector<CompiledAtom> atoms_;
  std::vector<std::pair<Slot, Slot>> diseqs_;
  std::vector<std::vector<int>> atoms_of_var_;
  std::vector<std::vector<int>> diseqs_of_var_;
  std::vector<std::vector<std::uint32_t>> groups_;
  std::vector<std::vector<int>> group_atoms_;
  std::vector<ElemId> tuple_;
  bool impossible_ = false;
};

}  // namespace

std::optional<Homomorphism> find_hom(const CQ& source, HomTarget& target, const Frozen& frozen) {
  Search s(source, target, frozen);
  if (s.impossible()) return std::nullopt;
  // Groups share no variables, so each one is solved on its own and the
  // solutions are kept side by side.
  for (std::size_t g = 0; g < s.group_count(); ++g) {
    bool found = false;
    s.solve_group(g, [&] {
      found = true;
      return false;
    });
    if (!found) return std::nullopt;
  }
  return s.to_hom();
}

std::optional<Homomorphism> find_hom(const CQ& source, const Database& target, const Frozen& frozen) {
  Structure t(target);
  return find_hom(source, t, frozen);
}

std::optional<Homomorphism> find_hom(const CQ& source, const CQ& target, const Frozen& frozen) {
  Structure t(target);
  return find_hom(source, t, frozen);
}

void for_each_hom(const CQ& source, HomTarget& target, const Frozen& frozen,
                  const std::function<bool(std::span<const ElemId>)>& visit) {
  Search s(source, target, frozen);
  if (s.impossible()) return;
  for (std::size_t g = 0; g < s.group_count(); ++g) {
    bool found = false;
    s.solve_group(g, [&] {
      found = true;
      return false;
    });
    if (!found) return;
    s.clear_group(g);
  }
  s.solve_all(0, [&] {
    auto values = s.term_values();
    return visit(values);
  });
}

std::vector<FactIndexSet> enumerate_image_indices(const CQ& q, Structure& d, const Frozen& frozen) {
  Search s(q, d, frozen);
  if (s.impossible()) return {};
  std::vector<ElemId> tuple;
  auto image_of = [&](const std::vector<int>& atom_ids, FactIndexSet& out) {
    for (int ai : atom_ids) {
      const CompiledAtom& a = s.atoms()[ai];
      tuple.clear();
      for (const Slot& sl : a.slots) tuple.push_back(s.value(sl));
      out.push_back(static_cast<std::uint32_t>(d.tuple_origin(a.rel, tuple)));
    }
  };

  // Atoms whose variables are all fixed up front contribute to every image.
  std::vector<int> fixed;
  {
    std::vector<bool> in_group(s.atoms().size(), false);
    for (std::size_t g = 0; g < s.group_count(); ++g)
      for (int ai : s.group_atoms(g)) in_group[ai] = true;
    for (int ai = 0; ai < static_cast<int>(s.atoms().size()); ++ai)
      if (!in_group[ai]) fixed.push_back(ai);
  }
  std::set<FactIndexSet> images;
  {
    FactIndexSet base;
    image_of(fixed, base);
    std::sort(base.begin(), base.end());
    base.erase(std::unique(base.begin(), base.end()), base.end());
    images.insert(base);
  }
  for (std::size_t g = 0; g < s.group_count(); ++g) {
    std::set<FactIndexSet> part;
    s.solve_group(g, [&] {
      FactIndexSet img;
      image_of(s.group_atoms(g), img);
      std::sort(img.begin(), img.end());
      img.erase(std::unique(img.begin(), img.end()), img.end());
      part.insert(std::move(img));
      return true;
    });
    if (part.empty()) return {};
    std::set<FactIndexSet> merged;
    for (const FactIndexSet& a : images) {
      for (const FactIndexSet& b : part) {
        FactIndexSet u;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
        merged.insert(std::move(u));
      }
    }
    images.swap(merged);
  }
  return {images.begin(), images.end()};
}

std::vector<FactIndexSet> enumerate_image_indices(const CQ& q, const Database& d, const Frozen& frozen) {
  Structure t(d);
  return enumerate_image_indices(q, t, frozen);
}

std::vector<std::vector<Fact>> enumerate_images(const CQ& q, const Database& d) {
  std::vector<std::vector<Fact>> out;
  for (const FactIndexSet& img : enumerate_image_indices(q, d)) {
    std::vector<Fact> facts;
    for (std::uint32_t i : img) facts.push_back(d.facts()[i]);
    out.push_back(std::move(facts));
  }
  return out;
}

bool cq_entails(const CQ& q, const CQ& q2) { return find_hom(q2, q).has_value(); }

bool is_core(const CQ& q, std::size_t atom_cap) {
  if (q.size() > atom_cap)
    throw ResourceLimit("core test limited to " + std::to_string(atom_cap) + " atoms, query has " +
                        std::to_string(q.size()));
  // Non-injective endomorphisms are exactly those whose image misses an atom.
  for (std::size_t i = 0; i < q.size(); ++i) {
    std::size_t skip[] = {i};
    Structure t(q, skip);
    if (find_hom(q, t)) return false;
  }
  return true;
}

namespace {

CQ induced_subquery(const CQ& q, const std::vector<std::size_t>& keep) {
  std::vector<Atom> atoms;
  std::set<Term> terms;
  for (std::size_t i : keep) {
    atoms.push_back(q.atoms()[i]);
    terms.insert(q.atoms()[i].args.begin(), q.atoms()[i].args.end());
  }
  std::vector<CQ::Diseq> diseqs;
  for (const auto& d : q.diseqs())
    if (terms.contains(d.first) && terms.contains(d.second)) diseqs.push_back(d);
  return CQ(std::move(atoms), std::move(diseqs));
}

}  // namespace

CQ core_of(const CQ& q, std::size_t atom_cap) {
  if (q.size() > atom_cap)
    throw ResourceLimit("core computation limited to " + std::to_string(atom_cap) + " atoms, query has " +
                        std::to_string(q.size()));
  // Greedy retraction gives the core size.
  std::vector<std::size_t> kept(q.size());
  std::iota(kept.begin(), kept.end(), 0U);
  for (bool shrunk = true; shrunk;) {
    shrunk = false;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      std::vector<std::size_t> smaller = kept;
      smaller.erase(smaller.begin() + static_cast<long>(j));
      CQ sub = induced_subquery(q, smaller);
      if (find_hom(q, sub)) {
        kept = std::move(smaller);
        shrunk = true;
        break;
      }
    }
  }
  // Every size-m subquery that q maps into is a minimum retract; keep the
  // least serialization.
  const std::size_t m = kept.size();
  std::optional<CQ> best;
  std::string best_text;
  std::vector<bool> choose(q.size(), false);
  std::fill(choose.begin(), choose.begin() + static_cast<long>(m), true);
  do {
    std::vector<std::size_t> pick;
    for (std::size_t i = 0; i < choose.size(); ++i)
      if (choose[i]) pick.push_back(i);
    CQ sub = induced_subquery(q, pick);
    std::string text = to_string(sub);
    if ((!best || text < best_text) && find_hom(q, sub)) {
      best = std::move(sub);
      best_text = std::move(text);
    }
  } while (std::prev_permutation(choose.begin(), choose.end()));
  return *best;
}

std::vector<std::vector<std::size_t>> atom_components(const CQ& q) {
  const auto& atoms = q.atoms();
  std::vector<std::size_t> parent(atoms.size());
  std::iota(parent.begin(), parent.end(), 0U);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<Term, std::size_t> owner;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (const Term& t : atoms[i].args) {
      if (!t.is_variable()) continue;
      auto [it, inserted] = owner.emplace(t, i);
      if (!inserted) parent[find(i)] = find(it->second);
    }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < atoms.size(); ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace factrel
