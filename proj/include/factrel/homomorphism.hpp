#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factrel/core.hpp"

namespace factrel {

using ElemId = std::uint32_t;
inline constexpr ElemId kUnbound = static_cast<ElemId>(-1);

/// A relational structure that homomorphisms are searched into.
///
/// Finite structures list their whole domain through seeds(). Structures
/// whose domain is generated on demand (the DL-Lite canonical model) return
/// only representative elements and report `seeds_cover_domain() == false`;
/// the search then tries every variable of a connected component as the
/// component's topmost element, so seeds() must contain, up to isomorphism of
/// the generated subtree, every element a component can be rooted at.
class HomTarget {
 public:
  virtual ~HomTarget() = default;

  /// Element denoting the constant `name`, if present.
  virtual std::optional<ElemId> constant(const std::string& name) = 0;
  /// Handle for a relation, or nullopt when it has no tuples at all.
  virtual std::optional<int> relation(const std::string& name, std::size_t arity) = 0;
  virtual bool holds(int rel, std::span<const ElemId> tuple) = 0;
  /// Appends the values at `pos` of tuples of `rel` agreeing with the bound
  /// entries of `partial` (kUnbound marks free positions). Finite targets
  /// accept a fully unbound `partial`; lazy targets require a bound entry.
  virtual void extend(int rel, std::span<const ElemId> partial, std::size_t pos, std::vector<ElemId>& out) = 0;
  virtual void seeds(std::vector<ElemId>& out) = 0;
  virtual bool seeds_cover_domain() const = 0;
  virtual std::string element_name(ElemId e) const = 0;
  /// Whether two elements satisfy an inequality atom.
  virtual bool distinct(ElemId a, ElemId b) const { return a != b; }
};

/// Finite structure over interned elements. Built from a database (every
/// element a constant) or by freezing a CQ (variables become elements named
/// like the variable, inequality atoms become a symmetric relation).
class Structure final : public HomTarget {
 public:
  explicit Structure(const Database& d);
  /// Frozen copy of `q`; atoms listed in `skip` (indices into q.atoms()) are left out.
  explicit Structure(const CQ& q, std::span<const std::size_t> skip = {});

  std::optional<ElemId> constant(const std::string& name) override;
  std::optional<int> relation(const std::string& name, std::size_t arity) override;
  bool holds(int rel, std::span<const ElemId> tuple) override;
  void extend(int rel, std::span<const ElemId> partial, std::size_t pos, std::vector<ElemId>& out) override;
  void seeds(std::vector<ElemId>& out) override;
  bool seeds_cover_domain() const override { return true; }
  std::string element_name(ElemId e) const override { return names_[e]; }
  bool distinct(ElemId a, ElemId b) const override;

  /// Index of the source fact/atom a tuple came from, or -1.
  long tuple_origin(int rel, std::span<const ElemId> tuple) const;

 private:
  struct Rel {
    std::size_t arity = 0;
    std::vector<ElemId> flat;          // tuples, row-major
    std::vector<std::uint32_t> origin; // per tuple
  };
  ElemId intern(const std::string& name, bool is_constant);
  void add_tuple(const Atom& a, std::uint32_t origin);

  std::vector<std::string> names_;
  std::vector<bool> is_constant_;
  std::map<std::string, ElemId> ids_;
  std::map<std::pair<std::string, std::size_t>, int> rel_ids_;
  std::vector<Rel> rels_;
  std::vector<std::pair<ElemId, ElemId>> diseqs_;  // sorted, a < b
};

/// Term -> element name. Total on the terms of the source query.
struct Homomorphism {
  std::map<Term, std::string> mapping;
  const std::string& operator()(const Term& t) const { return mapping.at(t); }
};

/// Partial assignment of source variables to constants that any returned
/// homomorphism must extend.
using Frozen = std::map<Term, std::string>;

std::optional<Homomorphism> find_hom(const CQ& source, HomTarget& target, const Frozen& frozen = {});
std::optional<Homomorphism> find_hom(const CQ& source, const Database& target, const Frozen& frozen = {});
std::optional<Homomorphism> find_hom(const CQ& source, const CQ& target, const Frozen& frozen = {});

/// Visits every homomorphism extending `frozen` as an element vector indexed
/// like `source.terms()`. Stops early when `visit` returns false. On targets
/// that do not cover their domain, homomorphisms that are isomorphic shifts of
/// each other inside the generated part are visited once per representative
/// and may repeat.
void for_each_hom(const CQ& source, HomTarget& target, const Frozen& frozen,
                  const std::function<bool(std::span<const ElemId>)>& visit);

/// Sorted fact indices into a database.
using FactIndexSet = std::vector<std::uint32_t>;

/// Distinct images h(q) over all homomorphisms q -> d, as sorted index sets,
/// in lexicographic order.
std::vector<FactIndexSet> enumerate_image_indices(const CQ& q, const Database& d, const Frozen& frozen = {});
/// Same, over a prebuilt structure of a database; indices are tuple origins.
std::vector<FactIndexSet> enumerate_image_indices(const CQ& q, Structure& d, const Frozen& frozen = {});
std::vector<std::vector<Fact>> enumerate_images(const CQ& q, const Database& d);

bool cq_entails(const CQ& q, const CQ& q2);

inline constexpr std::size_t kDefaultCoreAtomCap = 12;

bool is_core(const CQ& q, std::size_t atom_cap = kDefaultCoreAtomCap);
/// Minimum-size retract of `q`; among those, the one with the least
/// canonical serialization.
CQ core_of(const CQ& q, std::size_t atom_cap = kDefaultCoreAtomCap);

/// Atoms grouped by shared variables (inequality atoms ignored); ground atoms
/// form singleton groups. Groups list atom indices into q.atoms().
std::vector<std::vector<std::size_t>> atom_components(const CQ& q);

}  // namespace factrel
