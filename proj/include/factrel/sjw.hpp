#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "factrel/core.hpp"
#include "factrel/homomorphism.hpp"

namespace factrel {

/// Same relation, and unifying position-wise never forces two distinct
/// constants together.
bool mergeable(const Atom& a, const Atom& b);

/// Variables occurring at a position where two mergeable atoms differ. Sorted.
std::vector<Term> merge_set(const CQ& q);
std::size_t self_join_width(const CQ& q);

inline constexpr std::size_t kDefaultSjwCap = 6;

/// Partition of Merge(q) ∪ const(q) with at most one constant per class.
/// Classes are sorted, and listed in order of their least term.
struct EquivRelation {
  std::vector<std::vector<Term>> classes;

  bool same_class(const Term& a, const Term& b) const;
  bool operator==(const EquivRelation&) const = default;
};

/// Every admissible partition exactly once, in restricted-growth-string order
/// over the sorted elements. Throws ResourceLimit when the width exceeds `cap`.
std::vector<EquivRelation> enumerate_equivs(const CQ& q, std::size_t cap = kDefaultSjwCap);

struct CollapsedQuery {
  CQ q_e;      // classes collapsed, repeated atoms removed
  CQ q_e_neq;  // q_e plus an inequality for each non-equivalent pair
};

CollapsedQuery collapse(const CQ& q, const EquivRelation& e);

bool is_nice(const EquivRelation& e, const CQ& q, std::size_t cap = kDefaultSjwCap);

/// The nice equivalence relations of a query with their collapsed queries,
/// computed once and reusable across databases.
struct NiceEquivs {
  CQ query;
  std::vector<EquivRelation> equivs;
  std::vector<CollapsedQuery> collapsed;
};

NiceEquivs nice_equivs(const CQ& q, std::size_t cap = kDefaultSjwCap);

/// A minimal support of q containing `f`, found through the nice collapsed
/// queries, as indices into `d`. Throws InvalidArgument when f is not in d.
std::optional<FactIndexSet> sjw_witness(const Fact& f, const NiceEquivs& nice, const Database& d);

bool relevant_sjw(const Fact& f, const NiceEquivs& nice, const Database& d);
bool relevant_sjw(const Fact& f, const CQ& q, const Database& d, std::size_t cap = kDefaultSjwCap);

}  // namespace factrel
