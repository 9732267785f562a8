#include "factrel/supports.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "factrel/error.hpp"
#include "factrel/homomorphism.hpp"

namespace factrel {

namespace {

bool is_subset(const FactIndexSet& a, const FactIndexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<FactIndexSet> minimal_images(const CQ& q, const Database& d, std::size_t image_cap) {
  std::vector<FactIndexSet> images = enumerate_image_indices(q, d);
  if (images.size() > image_cap)
    throw ResourceLimit("query has " + std::to_string(images.size()) + " homomorphic images, cap is " +
                        std::to_string(image_cap));
  // Smaller sets first, so every set is only compared against possible subsets.
  std::stable_sort(images.begin(), images.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  std::vector<FactIndexSet> minimal;
  for (const FactIndexSet& img : images)
    if (std::none_of(minimal.begin(), minimal.end(), [&](const FactIndexSet& m) { return is_subset(m, img); }))
      minimal.push_back(img);
  std::sort(minimal.begin(), minimal.end());
  return minimal;
}

std::vector<Fact> to_facts(const Database& d, const FactIndexSet& s) {
  std::vector<Fact> out;
  for (std::uint32_t i : s) out.push_back(d.facts()[i]);
  return out;
}

std::vector<Fact> to_facts(const Database& d, std::uint64_t mask) {
  std::vector<Fact> out;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (mask >> i & 1U) out.push_back(d.facts()[i]);
  return out;
}

void check_subset_cap(const Database& d, std::size_t cap) {
  if (d.size() > cap || d.size() >= 64)
    throw ResourceLimit("brute force limited to " + std::to_string(cap) + " facts, database has " +
                        std::to_string(d.size()));
}

std::size_t require_member(const Fact& f, const Database& d) {
  auto idx = d.index_of(f);
  if (!idx) throw InvalidArgument("fact " + to_string(f) + " is not in the database");
  return *idx;
}

/// Visits minimal supports (as masks) in order of cardinality, then mask
/// value; stops when `visit` returns false.
void for_each_minimal_mask(const Database& d, const EntailmentOracle& oracle,
                           const std::function<bool(std::uint64_t)>& visit) {
  const std::size_t n = d.size();
  std::vector<std::uint64_t> found;
  for (std::size_t k = 0; k <= n; ++k) {
    // Gosper's hack over k-subsets of n bits.
    std::uint64_t m = k == 0 ? 0 : (std::uint64_t{1} << k) - 1;
    const std::uint64_t limit = std::uint64_t{1} << n;
    while (m < limit) {
      bool covered = std::any_of(found.begin(), found.end(), [&](std::uint64_t s) { return (s & m) == s; });
      if (!covered && oracle(d.subset(m))) {
        found.push_back(m);
        if (!visit(m)) return;
      }
      if (k == 0) break;
      std::uint64_t c = m & -m, r = m + c;
      m = (((r ^ m) >> 2) / c) | r;
    }
  }
}

}  // namespace

EntailmentOracle cq_oracle(CQ q) {
  return [q = std::move(q)](const Database& s) { return find_hom(q, s).has_value(); };
}

std::vector<std::vector<Fact>> minimal_supports(const CQ& q, const Database& d, std::size_t image_cap) {
  std::vector<std::vector<Fact>> out;
  for (const FactIndexSet& s : minimal_images(q, d, image_cap)) out.push_back(to_facts(d, s));
  return out;
}

std::vector<std::vector<Fact>> minimal_supports(const Database& d, const EntailmentOracle& oracle,
                                                std::size_t subset_cap) {
  check_subset_cap(d, subset_cap);
  std::vector<std::vector<Fact>> out;
  for_each_minimal_mask(d, oracle, [&](std::uint64_t m) {
    out.push_back(to_facts(d, m));
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

bool is_minimal_support(const Database& s, const EntailmentOracle& oracle) {
  if (!oracle(s)) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::uint64_t all_but_i = ~(std::uint64_t{1} << i);
    if (oracle(s.subset(all_but_i))) return false;
  }
  return true;
}

std::optional<std::vector<Fact>> support_containing(const Fact& f, const Database& d, const EntailmentOracle& oracle,
                                                    std::size_t subset_cap) {
  std::size_t idx = require_member(f, d);
  check_subset_cap(d, subset_cap);
  std::optional<std::vector<Fact>> out;
  for_each_minimal_mask(d, oracle, [&](std::uint64_t m) {
    if (m >> idx & 1U) out = to_facts(d, m);
    return !out;
  });
  return out;
}

bool relevant_bruteforce(const Fact& f, const Database& d, const EntailmentOracle& oracle, std::size_t subset_cap) {
  return support_containing(f, d, oracle, subset_cap).has_value();
}

std::optional<std::vector<Fact>> support_containing(const Fact& f, const CQ& q, const Database& d,
                                                    std::size_t image_cap) {
  auto idx = static_cast<std::uint32_t>(require_member(f, d));
  for (const FactIndexSet& s : minimal_images(q, d, image_cap))
    if (std::binary_search(s.begin(), s.end(), idx)) return to_facts(d, s);
  return std::nullopt;
}

bool relevant_bruteforce(const Fact& f, const CQ& q, const Database& d, std::size_t image_cap) {
  return support_containing(f, q, d, image_cap).has_value();
}

std::vector<Fact> relevant_facts(const Database& d, const EntailmentOracle& oracle, std::size_t subset_cap) {
  std::set<Fact> out;
  for (const auto& s : minimal_supports(d, oracle, subset_cap)) out.insert(s.begin(), s.end());
  return {out.begin(), out.end()};
}

std::vector<Fact> relevant_facts(const CQ& q, const Database& d, std::size_t image_cap) {
  std::set<Fact> out;
  for (const auto& s : minimal_supports(q, d, image_cap)) out.insert(s.begin(), s.end());
  return {out.begin(), out.end()};
}

}  // namespace factrel
