#include "factrel/structure.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include "factrel/error.hpp"
#include "factrel/homomorphism.hpp"

namespace factrel {

namespace {

using Edge = std::set<Term>;

std::vector<Edge> hyperedges(const CQ& q) {
  std::vector<Edge> out;
  for (const Atom& a : q.atoms()) {
    Edge e;
    for (const Term& t : a.args)
      if (t.is_variable()) e.insert(t);
    out.push_back(std::move(e));
  }
  for (const auto& [l, r] : q.diseqs()) {
    Edge e;
    if (l.is_variable()) e.insert(l);
    if (r.is_variable()) e.insert(r);
    out.push_back(std::move(e));
  }
  return out;
}

/// Simple undirected graph on variables; edges join distinct variables that
/// share an atom or inequality.
std::map<Term, std::set<Term>> primal_graph(const CQ& q) {
  std::map<Term, std::set<Term>> adj;
  for (const Term& v : q.variables()) adj[v];
  for (const Edge& e : hyperedges(q))
    for (const Term& a : e)
      for (const Term& b : e)
        if (a != b) adj[a].insert(b);
  return adj;
}

}  // namespace

bool is_acyclic(const CQ& q) {
  std::vector<Edge> edges = hyperedges(q);
  for (bool changed = true; changed;) {
    changed = false;
    // Drop vertices occurring in a single edge.
    std::map<Term, int> occurrences;
    for (const Edge& e : edges)
      for (const Term& t : e) ++occurrences[t];
    for (Edge& e : edges)
      for (auto it = e.begin(); it != e.end();) {
        if (occurrences[*it] == 1) {
          it = e.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
    // Drop edges contained in another edge (and empty ones).
    for (std::size_t i = 0; i < edges.size(); ++i) {
      bool contained = edges[i].empty();
      for (std::size_t j = 0; j < edges.size() && !contained; ++j)
        contained = j != i && std::includes(edges[j].begin(), edges[j].end(), edges[i].begin(), edges[i].end()) &&
                    (edges[j] != edges[i] || j < i);
      if (contained) {
        edges.erase(edges.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
    }
  }
  return edges.empty();
}

std::vector<CQ> connected_components(const CQ& q) {
  // Atom groups sharing variables, then glued along inequalities.
  std::vector<std::vector<std::size_t>> groups = atom_components(q);
  std::map<Term, std::size_t> group_of;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t i : groups[g])
      for (const Term& t : q.atoms()[i].args)
        if (t.is_variable()) group_of[t] = g;
  std::vector<std::size_t> parent(groups.size());
  for (std::size_t g = 0; g < parent.size(); ++g) parent[g] = g;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [l, r] : q.diseqs())
    if (l.is_variable() && r.is_variable()) parent[find(group_of.at(l))] = find(group_of.at(r));

  std::map<std::size_t, std::pair<std::vector<Atom>, std::vector<CQ::Diseq>>> parts;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t i : groups[g]) parts[find(g)].first.push_back(q.atoms()[i]);
  for (const auto& d : q.diseqs()) {
    const Term& v = d.first.is_variable() ? d.first : d.second;
    if (v.is_variable()) parts[find(group_of.at(v))].second.push_back(d);
  }
  std::vector<CQ> out;
  for (auto& [_, part] : parts) out.emplace_back(std::move(part.first), std::move(part.second));
  return out;
}

std::size_t leaf_count(const CQ& q) {
  if (!q.signature().is_binary()) throw InvalidArgument("leaf count needs a binary signature");
  if (!is_acyclic(q)) throw InvalidArgument("leaf count needs an acyclic query");
  auto adj = primal_graph(q);
  // Connectivity over variables.
  if (!adj.empty()) {
    std::set<Term> seen{adj.begin()->first};
    std::vector<Term> stack{adj.begin()->first};
    while (!stack.empty()) {
      Term t = stack.back();
      stack.pop_back();
      for (const Term& u : adj[t])
        if (seen.insert(u).second) stack.push_back(u);
    }
    if (seen.size() != adj.size()) throw InvalidArgument("leaf count needs a connected query");
  }
  return static_cast<std::size_t>(
      std::count_if(adj.begin(), adj.end(), [](const auto& e) { return e.second.size() == 1; }));
}

bool is_chain(const CQ& q) {
  if (q.empty() || !q.diseqs().empty()) return false;
  const std::string& rel = q.atoms().front().relation;
  std::map<Term, Term> next;
  std::set<Term> has_pred;
  for (const Atom& a : q.atoms()) {
    if (a.relation != rel || a.arity() != 2) return false;
    const Term &x = a.args[0], &y = a.args[1];
    if (x.is_constant() || y.is_constant() || x == y) return false;
    if (!next.emplace(x, y).second || !has_pred.insert(y).second) return false;
  }
  // A single start vertex from which the path visits every atom.
  std::vector<Term> starts;
  for (const auto& [x, y] : next)
    if (!has_pred.contains(x)) starts.push_back(x);
  if (starts.size() != 1) return false;
  std::size_t steps = 0;
  for (Term t = starts.front(); next.contains(t); t = next.at(t)) ++steps;
  return steps == q.size();
}

std::optional<std::size_t> treewidth_exact(const CQ& q, std::size_t cap, std::size_t var_limit) {
  auto adj = primal_graph(q);
  const std::size_t n = adj.size();
  if (n > var_limit)
    throw ResourceLimit("treewidth limited to " + std::to_string(var_limit) + " variables, query has " +
                        std::to_string(n));
  if (n == 0) return std::size_t{0};
  std::map<Term, std::size_t> index;
  for (const auto& [t, _] : adj) index.emplace(t, index.size());
  std::vector<std::uint32_t> nbr(n, 0);
  for (const auto& [t, ns] : adj)
    for (const Term& u : ns) nbr[index[t]] |= 1U << index[u];

  // q_size(S, v): vertices outside S ∪ {v} reachable from v through S.
  auto q_size = [&](std::uint32_t s, std::size_t v) {
    std::uint32_t visited = 1U << v, frontier = 1U << v, outside = 0;
    while (frontier) {
      std::uint32_t next = 0;
      for (std::size_t u = 0; u < n; ++u)
        if (frontier >> u & 1U) next |= nbr[u];
      next &= ~visited;
      visited |= next;
      outside |= next & ~s;
      frontier = next & s;
    }
    return static_cast<std::size_t>(std::popcount(outside));
  };

  // tw[S]: best width of an elimination ordering that eliminates S first.
  const std::uint32_t full = n == 32 ? ~0U : (1U << n) - 1;
  std::vector<std::size_t> tw(std::size_t{1} << n, 0);
  for (std::uint32_t s = 1; s <= full && s != 0; ++s) {
    std::size_t best = static_cast<std::size_t>(-1);
    for (std::size_t v = 0; v < n; ++v) {
      if (!(s >> v & 1U)) continue;
      std::uint32_t rest = s & ~(1U << v);
      best = std::min(best, std::max(tw[rest], q_size(rest, v)));
    }
    tw[s] = best;
    if (s == full) break;
  }
  std::size_t width = tw[full];
  if (width > cap) return std::nullopt;
  return width;
}

StructureReport classify(const CQ& q, std::size_t var_limit) {
  StructureReport r;
  r.acyclic = is_acyclic(q);
  r.is_chain = is_chain(q);
  std::set<std::string> rels;
  r.self_join_free = true;
  for (const Atom& a : q.atoms()) r.self_join_free = r.self_join_free && rels.insert(a.relation).second;
  try {
    r.treewidth = treewidth_exact(q, static_cast<std::size_t>(-1), var_limit);
  } catch (const ResourceLimit&) {
    r.treewidth = std::nullopt;
  }
  bool binary = q.signature().is_binary();
  for (CQ& c : connected_components(q)) {
    ComponentReport cr{c, std::nullopt, is_chain(c)};
    if (binary && is_acyclic(c)) cr.leaf_count = leaf_count(c);
    r.components.push_back(std::move(cr));
  }
  return r;
}

}  // namespace factrel
