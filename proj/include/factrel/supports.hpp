#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "factrel/core.hpp"

namespace factrel {

/// Monotone entailment test over fact sets.
using EntailmentOracle = std::function<bool(const Database&)>;

/// Plain CQ evaluation as an oracle.
EntailmentOracle cq_oracle(CQ q);

inline constexpr std::size_t kDefaultImageCap = 1'000'000;
inline constexpr std::size_t kDefaultSubsetCap = 20;

/// Inclusion-minimal subsets of `d` entailing `q`, each sorted, in
/// lexicographic order. Computed from the homomorphic images of `q`.
/// Throws ResourceLimit when `q` has more than `image_cap` images.
std::vector<std::vector<Fact>> minimal_supports(const CQ& q, const Database& d,
                                                std::size_t image_cap = kDefaultImageCap);

/// Minimal supports under an arbitrary oracle, by subset enumeration in order
/// of cardinality. Throws ResourceLimit when |d| > subset_cap.
std::vector<std::vector<Fact>> minimal_supports(const Database& d, const EntailmentOracle& oracle,
                                                std::size_t subset_cap = kDefaultSubsetCap);

bool is_minimal_support(const Database& s, const EntailmentOracle& oracle);

/// Whether `f` belongs to a minimal support of `d` under `oracle`.
/// Throws InvalidArgument when f is not in d, ResourceLimit when |d| > subset_cap.
bool relevant_bruteforce(const Fact& f, const Database& d, const EntailmentOracle& oracle,
                         std::size_t subset_cap = kDefaultSubsetCap);

/// CQ specialization: decided from the minimal images of `q`.
bool relevant_bruteforce(const Fact& f, const CQ& q, const Database& d, std::size_t image_cap = kDefaultImageCap);

/// First minimal support containing `f`, in the order of minimal_supports().
std::optional<std::vector<Fact>> support_containing(const Fact& f, const CQ& q, const Database& d,
                                                    std::size_t image_cap = kDefaultImageCap);
std::optional<std::vector<Fact>> support_containing(const Fact& f, const Database& d, const EntailmentOracle& oracle,
                                                    std::size_t subset_cap = kDefaultSubsetCap);

/// Union of all minimal supports, sorted.
std::vector<Fact> relevant_facts(const Database& d, const EntailmentOracle& oracle,
                                 std::size_t subset_cap = kDefaultSubsetCap);
std::vector<Fact> relevant_facts(const CQ& q, const Database& d, std::size_t image_cap = kDefaultImageCap);

}  // namespace factrel
