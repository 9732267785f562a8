#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "factrel/core.hpp"
#include "factrel/homomorphism.hpp"

namespace factrel {

/// Role name or its inverse.
struct Role {
  std::string name;
  bool inverse = false;

  Role inv() const { return Role{name, !inverse}; }
  auto operator<=>(const Role&) const = default;
};

/// A concept name, or ∃P for a role P.
struct BasicConcept {
  std::string name;  // concept name, or role name when `exists`
  bool exists = false;
  bool inverse = false;

  static BasicConcept atomic(std::string name) { return {std::move(name), false, false}; }
  static BasicConcept some(const Role& r) { return {r.name, true, r.inverse}; }
  Role role() const { return Role{name, inverse}; }
  auto operator<=>(const BasicConcept&) const = default;
};

struct Axiom {
  enum class Kind { Concept, Role };
  Kind kind = Kind::Concept;
  BasicConcept lhs_concept, rhs_concept;  // Kind::Concept
  Role lhs_role, rhs_role;                // Kind::Role
  bool negated = false;                   // rhs is negated

  static Axiom concept_incl(BasicConcept lhs, BasicConcept rhs, bool negated = false);
  static Axiom role_incl(Role lhs, Role rhs, bool negated = false);
  auto operator<=>(const Axiom&) const = default;
};

std::string to_string(const Role& r);
std::string to_string(const BasicConcept& b);
std::string to_string(const Axiom& a);

/// DL-Lite_R TBox with its saturation (entailed positive inclusions,
/// unsatisfiable basic concepts and roles), computed at construction.
class TBox {
 public:
  TBox() : TBox(std::vector<Axiom>{}) {}
  /// Throws InvalidArgument when a name is used both as a concept and a role.
  explicit TBox(std::vector<Axiom> axioms);

  const std::vector<Axiom>& axioms() const { return axioms_; }
  std::size_t size() const { return axioms_.size(); }
  const std::set<std::string>& concept_names() const { return concept_names_; }
  const std::set<std::string>& role_names() const { return role_names_; }

  /// T ⊨ b ⊑ c. Names unknown to the TBox only entail themselves.
  bool entails(const BasicConcept& b, const BasicConcept& c) const;
  /// T ⊨ p ⊑ s.
  bool entails(const Role& p, const Role& s) const;
  /// T ⊨ b ⊑ ¬c.
  bool entails_disjoint(const BasicConcept& b, const BasicConcept& c) const;
  /// T ⊨ p ⊑ ¬s.
  bool entails_disjoint(const Role& p, const Role& s) const;
  /// T ⊨ b ⊑ ¬b: no model has an instance of b.
  bool unsatisfiable(const BasicConcept& b) const;
  bool unsatisfiable(const Role& p) const;

  /// Every basic concept entailed by `b`, including `b`.
  std::vector<BasicConcept> superconcepts(const BasicConcept& b) const;
  /// Every role entailed by `p`, including `p`.
  std::vector<Role> superroles(const Role& p) const;

  bool operator==(const TBox& o) const { return axioms_ == o.axioms_; }

 private:
  std::vector<Axiom> axioms_;
  std::set<std::string> concept_names_, role_names_;
  std::map<BasicConcept, std::set<BasicConcept>> concept_up_;
  std::map<Role, std::set<Role>> role_up_;
  std::set<BasicConcept> unsat_concepts_;
  std::set<Role> unsat_roles_;
};

/// Parses one axiom per line: `A sub B`, `A sub not B`, `ex R sub A`,
/// `A sub ex R-`, `R sub S`, `R sub not S-`. A line relating two bare names
/// is a role inclusion when either name is known as a role (from other
/// axioms or from the binary relations of `hint`), a concept inclusion
/// otherwise.
TBox parse_tbox(std::string_view text, const Signature& hint = {});
std::string to_string(const TBox& t);

struct OMQ {
  TBox tbox;
  CQ query;
};

struct ConsistencyResult {
  bool consistent = true;
  std::vector<Fact> conflict;  // at most two facts when inconsistent
};

/// Throws InvalidArgument when the ABox has relations of arity above 2, or
/// uses a TBox role as a concept or vice versa.
ConsistencyResult is_consistent(const Database& abox, const TBox& t);

struct CanonicalElement {
  std::string root;
  std::vector<Role> word;

  auto operator<=>(const CanonicalElement&) const = default;
};

std::string to_string(const CanonicalElement& e);

/// The canonical model of a consistent KB, cut at words of length `depth`.
struct CanonicalModel {
  std::size_t depth = 0;
  std::vector<CanonicalElement> elements;                            // constants first
  std::map<std::string, std::set<std::size_t>> concepts;             // name -> elements
  std::map<std::string, std::set<std::pair<std::size_t, std::size_t>>> roles;  // name -> pairs

  std::optional<std::size_t> find(const CanonicalElement& e) const;
  bool has_concept(const std::string& name, const CanonicalElement& e) const;
  bool has_role(const std::string& name, const CanonicalElement& a, const CanonicalElement& b) const;
};

inline constexpr std::size_t kDefaultCanonicalElementCap = 200'000;

/// Throws InconsistentKB on inconsistent input, ResourceLimit past `element_cap`.
CanonicalModel canonical_model(const Database& abox, const TBox& t, std::size_t depth,
                               std::size_t element_cap = kDefaultCanonicalElementCap);

/// The canonical model as a homomorphism target. Elements are generated on
/// demand up to `depth`; seeds() lists the constants and, for every role that
/// can end a word, one shortest element ending with it.
class CanonicalTarget final : public HomTarget {
 public:
  /// The KB must be consistent; this is not checked here.
  CanonicalTarget(const Database& abox, const TBox& t, std::size_t depth);
  ~CanonicalTarget() override;

  std::optional<ElemId> constant(const std::string& name) override;
  std::optional<int> relation(const std::string& name, std::size_t arity) override;
  bool holds(int rel, std::span<const ElemId> tuple) override;
  void extend(int rel, std::span<const ElemId> partial, std::size_t pos, std::vector<ElemId>& out) override;
  void seeds(std::vector<ElemId>& out) override;
  bool seeds_cover_domain() const override { return false; }
  std::string element_name(ElemId e) const override;

  CanonicalElement element(ElemId e) const;
  bool is_constant(ElemId e) const;

 private:
  friend CanonicalModel canonical_model(const Database&, const TBox&, std::size_t, std::size_t);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Depth used for evaluating `q` under `t`: 2|T| + |q|.
std::size_t evaluation_depth(const TBox& t, const CQ& q);
/// Depth used for single-atom checks: 2|T| + 2.
std::size_t atom_depth(const TBox& t);

/// (A,T) ⊨ q, by a homomorphism into the canonical model cut at `depth`
/// (default evaluation_depth). Throws InconsistentKB when (A,T) has no model,
/// InvalidArgument when q has inequality atoms.
bool evaluate_omq(const Database& abox, const OMQ& q, std::optional<std::size_t> depth = std::nullopt);

/// ({f},T) ⊨ a. False when ({f},T) is inconsistent.
bool potentially_relevant(const Fact& f, const Atom& a, const TBox& t);

/// Some fact f has ({f},T) ⊨ a and ({f},T) ⊨ b. Facts range over one
/// representative per isomorphism type: every concept and role name of T, a
/// and b, over two fresh constants and the constants of a and b.
bool interacting(const Atom& a, const Atom& b, const TBox& t);
/// Some fact f and homomorphisms h1, h2 of a into the canonical model of
/// ({f},T) with h1(x) a constant of f and h2(x) ≠ h1(x) for a variable x.
bool self_interacting(const Atom& a, const TBox& t);

/// Interacting atoms and the variables they share with the other atoms.
struct InteractionInfo {
  std::vector<Atom> int_atoms;
  std::vector<Atom> other_atoms;
  std::vector<Term> frontier;
};

InteractionInfo analyze_interactions(const OMQ& q);
std::vector<Atom> int_atoms(const OMQ& q);
std::size_t interaction_width(const OMQ& q);
std::vector<Term> frontier_vars(const OMQ& q);

inline constexpr std::size_t kDefaultInteractionWidthCap = 5;

enum class OmqAlgorithm { None, TypeI, TypeII };
std::string to_string(OmqAlgorithm a);

struct OmqRelevance {
  bool relevant = false;
  OmqAlgorithm algorithm = OmqAlgorithm::None;  // None: f potentially relevant to no atom
};

/// Requires f potentially relevant to exactly one atom, outside int_atoms;
/// throws InvalidArgument otherwise.
bool relevance_type_i(const Fact& f, const OMQ& q, const Database& abox);
bool relevance_type_i(const Fact& f, const OMQ& q, const Database& abox, const InteractionInfo& info);
/// Requires f potentially relevant to some atom of int_atoms.
bool relevance_type_ii(const Fact& f, const OMQ& q, const Database& abox);
bool relevance_type_ii(const Fact& f, const OMQ& q, const Database& abox, const InteractionInfo& info);

/// Full pipeline. Throws InconsistentKB, InvalidArgument when f is not in the
/// ABox, ResourceLimit when the interaction width exceeds `cap`.
OmqRelevance relevance_omq(const Fact& f, const OMQ& q, const Database& abox,
                           std::size_t cap = kDefaultInteractionWidthCap);
OmqRelevance relevance_omq(const Fact& f, const OMQ& q, const Database& abox, const InteractionInfo& info,
                           std::size_t cap = kDefaultInteractionWidthCap);

}  // namespace factrel
