#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "factrel/core.hpp"

namespace factrel {

// Structural measures look at variables only: constants are fixed by every
// homomorphism and never create cycles. Inequality atoms count as binary edges.

/// GYO reduction of the query hypergraph empties it.
bool is_acyclic(const CQ& q);

/// Degree-1 vertices of the underlying tree. Requires an acyclic, connected
/// query over a binary signature; throws InvalidArgument otherwise.
std::size_t leaf_count(const CQ& q);

/// R(?x1,?x2), ..., R(?xn,?xn+1) over one binary relation, all variables
/// distinct, no constants or inequalities.
bool is_chain(const CQ& q);

inline constexpr std::size_t kDefaultTreewidthVarLimit = 12;

/// Exact treewidth of the primal graph by dynamic programming over
/// elimination orders, or nullopt when it exceeds `cap`. Throws ResourceLimit
/// when the query has more than `var_limit` variables.
std::optional<std::size_t> treewidth_exact(const CQ& q, std::size_t cap = static_cast<std::size_t>(-1),
                                           std::size_t var_limit = kDefaultTreewidthVarLimit);

/// Sub-queries induced by the connected components of the variable graph.
/// Ground atoms form components of their own.
std::vector<CQ> connected_components(const CQ& q);

struct ComponentReport {
  CQ component;
  std::optional<std::size_t> leaf_count;  // when acyclic over a binary signature
  bool is_chain = false;
};

struct StructureReport {
  bool acyclic = false;
  bool is_chain = false;
  bool self_join_free = false;
  std::optional<std::size_t> treewidth;  // nullopt: exceeds the variable limit
  std::vector<ComponentReport> components;
};

StructureReport classify(const CQ& q, std::size_t var_limit = kDefaultTreewidthVarLimit);

}  // namespace factrel
