#include "factrel/reductions.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "factrel/error.hpp"
#include "factrel/supports.hpp"
#include "lexer.hpp"

namespace factrel {

// ------------------------------------------------------------------ digraph

Digraph::Digraph(std::set<Edge> es) {
  for (const auto& [u, v] : es) add_edge(u, v);
}

void Digraph::add_edge(const std::string& u, const std::string& v) {
  vertices.insert(u);
  vertices.insert(v);
  edges.emplace(u, v);
}

bool Digraph::has_loop() const {
  return std::any_of(edges.begin(), edges.end(), [](const Edge& e) { return e.first == e.second; });
}

Digraph parse_digraph(std::string_view text) {
  detail::Cursor in(text);
  Digraph g;
  for (;;) {
    in.skip_space();
    if (in.at_end()) break;
    std::string u = in.identifier(false);
    in.skip_space(true);
    in.expect('-');
    in.expect('>');
    in.skip_space(true);
    std::string v = in.identifier(false);
    in.skip_space(true);
    if (!in.at_end() && in.peek() != '\n') in.fail("expected one edge per line");
    g.add_edge(u, v);
  }
  return g;
}

std::string to_string(const Digraph& g) {
  std::string out;
  for (const auto& [u, v] : g.edges) out += u + " -> " + v + "\n";
  return out;
}

// ---------------------------------------------------------------------- CNF

CnfFormula parse_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  CnfFormula phi;
  std::string line;
  std::size_t line_no = 0, declared = 0;
  bool header = false;
  std::vector<int> clause;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream words(line);
    std::string first;
    if (!(words >> first) || first == "c" || first[0] == 'c' || first == "%") continue;
    if (first == "p") {
      std::string kind;
      long n = -1, m = -1;
      if (header || !(words >> kind >> n >> m) || kind != "cnf" || n < 0 || m < 0)
        throw ParseError("malformed 'p cnf' header", line_no, 1);
      phi.num_vars = static_cast<std::size_t>(n);
      declared = static_cast<std::size_t>(m);
      header = true;
      continue;
    }
    if (!header) throw ParseError("clause before the 'p cnf' header", line_no, 1);
    std::istringstream lits(line);
    std::string tok;
    while (lits >> tok) {
      int lit = 0;
      try {
        std::size_t used = 0;
        lit = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("expected an integer literal, found '" + tok + "'", line_no, 1);
      }
      if (lit == 0) {
        phi.clauses.push_back(clause);
        clause.clear();
        continue;
      }
      if (static_cast<std::size_t>(std::abs(lit)) > phi.num_vars)
        throw ParseError("literal " + tok + " exceeds the declared variable count", line_no, 1);
      clause.push_back(lit);
    }
  }
  if (!header) throw ParseError("missing 'p cnf' header", line_no + 1, 1);
  if (!clause.empty()) phi.clauses.push_back(clause);
  if (phi.clauses.size() != declared)
    throw ParseError("header declares " + std::to_string(declared) + " clauses, found " +
                         std::to_string(phi.clauses.size()),
                     line_no, 1);
  return phi;
}

std::string to_dimacs(const CnfFormula& phi) {
  std::string out = "p cnf " + std::to_string(phi.num_vars) + " " + std::to_string(phi.clauses.size()) + "\n";
  for (const auto& c : phi.clauses) {
    for (int lit : c) out += std::to_string(lit) + " ";
    out += "0\n";
  }
  return out;
}

// ------------------------------------------------------------- evaluation

namespace {

std::set<std::string> names_of(const CQ& q, const Database& d) {
  std::set<std::string> out;
  Signature qsig = q.signature();
  for (const auto& [r, _] : qsig.entries()) out.insert(r);
  for (const auto& [r, _] : d.signature().entries()) out.insert(r);
  for (const Term& t : q.terms()) out.insert(std::string(t.bare_name()));
  for (const std::string& c : d.constants()) out.insert(c);
  return out;
}

std::string fresh_in(std::set<std::string>& used, std::string_view base) {
  std::string n = fresh_name(base, [&](const std::string& s) { return used.contains(s); });
  used.insert(n);
  return n;
}

}  // namespace

RelevanceInstance eval_to_relevance(const CQ& q, const Database& d) {
  std::set<std::string> used = names_of(q, d);
  std::string rel = fresh_in(used, "Aux");
  Term x = Term::variable(fresh_in(used, "aux"));
  Term c = Term::constant(fresh_in(used, "aux_c"));
  std::vector<Atom> atoms = q.atoms();
  atoms.push_back(Atom{rel, {x}});
  std::vector<Fact> facts(d.facts().begin(), d.facts().end());
  Fact f{rel, {c}};
  facts.push_back(f);
  return {CQ(std::move(atoms), q.diseqs()), Database(std::move(facts)), f};
}

// --------------------------------------------------------------------- SAT

std::string to_string(const HornRule& r) {
  std::string out;
  for (std::size_t i = 0; i < r.body.size(); ++i) out += (i ? " and " : "") + r.body[i];
  return out + " sub " + r.head;
}

HornAqInstance sat_to_aq_relevance(const CnfFormula& phi) {
  HornAqInstance inst;
  inst.goal = "A";
  inst.individual = "d";
  const Term d = Term::constant("d");
  auto p = [](std::size_t i) { return "P" + std::to_string(i); };
  auto n = [](std::size_t i) { return "N" + std::to_string(i); };
  auto c = [](std::size_t j) { return "C" + std::to_string(j); };
  std::vector<Fact> facts{Fact{"X", {d}}};
  for (std::size_t i = 1; i <= phi.num_vars; ++i) {
    inst.tbox.push_back(HornRule{{p(i), n(i)}, "A"});
    facts.push_back(Fact{p(i), {d}});
    facts.push_back(Fact{n(i), {d}});
  }
  std::vector<std::string> conj{"X"};
  for (std::size_t j = 1; j <= phi.clauses.size(); ++j) {
    for (int lit : phi.clauses[j - 1]) {
      if (lit == 0 || static_cast<std::size_t>(std::abs(lit)) > phi.num_vars)
        throw InvalidArgument("literal " + std::to_string(lit) + " out of range");
      std::size_t v = static_cast<std::size_t>(std::abs(lit));
      inst.tbox.push_back(HornRule{{lit > 0 ? p(v) : n(v)}, c(j)});
    }
    conj.push_back(c(j));
  }
  inst.tbox.push_back(HornRule{conj, "A"});
  inst.abox = Database(std::move(facts));
  inst.fact = Fact{"X", {d}};
  return inst;
}

bool horn_entails(const HornAqInstance& inst, const Database& abox) {
  std::set<std::string> known;
  for (const Fact& f : abox.facts())
    if (f.arity() == 1 && f.args[0].name() == inst.individual) known.insert(f.relation);
  for (bool changed = true; changed;) {
    changed = false;
    for (const HornRule& r : inst.tbox)
      if (!known.contains(r.head) &&
          std::all_of(r.body.begin(), r.body.end(), [&](const std::string& b) { return known.contains(b); })) {
        known.insert(r.head);
        changed = true;
      }
  }
  return known.contains(inst.goal);
}

bool horn_relevance_bruteforce(const HornAqInstance& inst) {
  return relevant_bruteforce(inst.fact, inst.abox, [&](const Database& s) { return horn_entails(inst, s); });
}

// ---------------------------------------------------------------------- EL

ElAqInstance reach_to_el_relevance(const Digraph& g, const std::string& s, const std::string& t, const Edge& e) {
  if (!g.edges.contains(e)) throw InvalidArgument("edge " + e.first + " -> " + e.second + " is not in the graph");
  ElAqInstance inst;
  inst.individual = s;
  std::vector<Fact> facts;
  for (const auto& [u, v] : g.edges) facts.push_back(Fact{inst.role, {Term::constant(u), Term::constant(v)}});
  facts.push_back(Fact{inst.concept_name, {Term::constant(t)}});
  inst.abox = Database(std::move(facts));
  inst.fact = Fact{inst.role, {Term::constant(e.first), Term::constant(e.second)}};
  return inst;
}

bool el_entails(const ElAqInstance& inst, const Database& abox) {
  std::set<std::string> marked;
  for (const Fact& f : abox.facts())
    if (f.relation == inst.concept_name && f.arity() == 1) marked.insert(f.args[0].name());
  for (bool changed = true; changed;) {
    changed = false;
    for (const Fact& f : abox.facts())
      if (f.relation == inst.role && f.arity() == 2 && marked.contains(f.args[1].name()) &&
          marked.insert(f.args[0].name()).second)
        changed = true;
  }
  return marked.contains(inst.individual);
}

bool el_relevance_bruteforce(const ElAqInstance& inst) {
  return relevant_bruteforce(inst.fact, inst.abox, [&](const Database& s) { return el_entails(inst, s); });
}

// ----------------------------------------------------------------- hampath

RelevanceInstance hampath_to_chain_relevance(const Digraph& g, const std::string& s, const std::string& t) {
  if (!g.vertices.contains(s) || !g.vertices.contains(t)) throw InvalidArgument("s and t must be vertices of the graph");
  if (s == t) throw InvalidArgument("s and t must differ");
  std::set<std::string> used = g.vertices;
  used.insert("R");
  Term s0 = Term::constant(fresh_in(used, s + "_src"));
  Term t0 = Term::constant(fresh_in(used, t + "_dst"));
  std::vector<Fact> facts{Fact{"R", {s0, Term::constant(s)}}, Fact{"R", {Term::constant(t), t0}}};
  for (const auto& [u, v] : g.edges) facts.push_back(Fact{"R", {Term::constant(u), Term::constant(v)}});
  std::vector<Atom> chain;
  for (std::size_t i = 0; i <= g.vertices.size(); ++i)
    chain.push_back(Atom{"R", {Term::variable("x" + std::to_string(i)), Term::variable("x" + std::to_string(i + 1))}});
  Fact fact = facts.front();
  return {CQ(std::move(chain)), Database(std::move(facts)), std::move(fact)};
}

// --------------------------------------------------------------- selfjoins

SelfJoinFreeOmq remove_selfjoins(const CQ& q, const Database& d) {
  if (!q.diseqs().empty()) throw InvalidArgument("queries with inequalities are not supported");
  Signature qsig = q.signature();
  for (const Signature* sig : {&d.signature(), static_cast<const Signature*>(&qsig)})
    for (const auto& [r, arity] : sig->entries())
      if (arity == 0 || arity > 2) throw InvalidArgument("relation " + r + " must have arity 1 or 2");
  for (const auto& [r, arity] : qsig.entries())
    if (auto other = d.signature().arity(r); other && *other != arity)
      throw InvalidArgument("relation " + r + " has different arities in query and data");

  std::set<std::string> used = names_of(q, d);
  std::map<std::string, std::size_t> seen;
  std::vector<Atom> atoms;
  std::vector<Axiom> axioms;
  for (const Atom& a : q.atoms()) {
    std::string name = fresh_in(used, a.relation + "_" + std::to_string(++seen[a.relation]));
    atoms.push_back(Atom{name, a.args});
    if (a.arity() == 1)
      axioms.push_back(Axiom::concept_incl(BasicConcept::atomic(a.relation), BasicConcept::atomic(name)));
    else
      axioms.push_back(Axiom::role_incl(Role{a.relation, false}, Role{name, false}));
  }
  return {OMQ{TBox(std::move(axioms)), CQ(std::move(atoms))}, d};
}

// -------------------------------------------------------------------- DMH

namespace {

std::string single_binary_relation(const Signature& sig, const char* what) {
  if (sig.size() > 1) throw InvalidArgument(std::string(what) + " must use a single relation");
  for (const auto& [r, arity] : sig.entries()) {
    if (arity != 2) throw InvalidArgument(std::string(what) + " relation " + r + " must be binary");
    return r;
  }
  return "";
}

}  // namespace

Digraph digraph_of(const CQ& q) {
  single_binary_relation(q.signature(), "query");
  if (!q.diseqs().empty()) throw InvalidArgument("query must not contain inequalities");
  if (!q.constants().empty()) throw InvalidArgument("query must be constant-free");
  Digraph g;
  for (const Atom& a : q.atoms()) g.add_edge(std::string(a.args[0].bare_name()), std::string(a.args[1].bare_name()));
  return g;
}

Digraph digraph_of(const Database& d) {
  single_binary_relation(d.signature(), "database");
  Digraph g;
  for (const Fact& f : d.facts()) g.add_edge(f.args[0].name(), f.args[1].name());
  return g;
}

CQ cq_of(const Digraph& g, const std::string& relation) {
  std::vector<Atom> atoms;
  for (const auto& [u, v] : g.edges) atoms.push_back(Atom{relation, {Term::variable(u), Term::variable(v)}});
  return CQ(std::move(atoms));
}

Database database_of(const Digraph& g, const std::string& relation) {
  std::vector<Fact> facts;
  for (const auto& [u, v] : g.edges) facts.push_back(Fact{relation, {Term::constant(u), Term::constant(v)}});
  return Database(std::move(facts));
}

DmhInstance relevance_to_dmh(const RelevanceInstance& inst) {
  std::string rq = single_binary_relation(inst.query.signature(), "query");
  std::string rd = single_binary_relation(inst.data.signature(), "database");
  if (!rq.empty() && !rd.empty() && rq != rd) throw InvalidArgument("query and database use different relations");
  if (!inst.data.contains(inst.fact)) throw InvalidArgument("fact " + to_string(inst.fact) + " is not in the database");
  return {digraph_of(inst.query), digraph_of(inst.data), {inst.fact.args[0].name(), inst.fact.args[1].name()}};
}

RelevanceInstance dmh_to_relevance(const DmhInstance& inst, const std::string& relation) {
  if (!inst.host.edges.contains(inst.edge)) throw InvalidArgument("edge is not in the host graph");
  return {cq_of(inst.pattern, relation), database_of(inst.host, relation),
          Fact{relation, {Term::constant(inst.edge.first), Term::constant(inst.edge.second)}}};
}

std::vector<std::size_t> first_primes(std::size_t count) {
  std::vector<std::size_t> out;
  for (std::size_t n = 2; out.size() < count; ++n)
    if (std::all_of(out.begin(), out.end(), [&](std::size_t p) { return p * p > n || n % p != 0; })) out.push_back(n);
  return out;
}

namespace {

struct GadgetBuilder {
  std::map<std::string, std::size_t> rel_index;  // R_i -> i (0-based)
  std::vector<std::size_t> primes;               // p_1 .. p_{n+2}
  Digraph g;

  GadgetBuilder(const Signature& a, const Signature& b) {
    std::set<std::string> rels;
    for (const auto* sig : {&a, &b})
      for (const auto& [r, arity] : sig->entries()) {
        if (arity != 2) throw InvalidArgument("relation " + r + " must be binary");
        rels.insert(r);
      }
    for (const std::string& r : rels) rel_index.emplace(r, rel_index.size());
    primes = first_primes(rels.size() + 2);
  }

  std::size_t path_length() const { return primes.back(); }

  static std::string anchor(std::string_view term) { return "u_" + std::string(term); }

  void add_cycle(const std::vector<std::string>& vs) {
    for (std::size_t i = 0; i < vs.size(); ++i) g.add_edge(vs[i], vs[(i + 1) % vs.size()]);
  }

  void add_anchor(std::string_view term) {
    for (std::size_t p : {primes[primes.size() - 2], primes.back()}) {
      std::vector<std::string> cycle{anchor(term)};
      for (std::size_t j = 1; j < p; ++j)
        cycle.push_back("k" + std::to_string(p) + "_" + std::to_string(j) + "_" + std::string(term));
      add_cycle(cycle);
    }
  }

  /// Gadget of the idx-th atom; returns the first edge of its cycle.
  Edge add_atom(std::size_t idx, const Atom& a) {
    const std::string base = "e" + std::to_string(idx) + "_";
    const std::size_t len = path_length();
    std::vector<std::string> cycle;
    for (std::size_t j = 0; j < primes[rel_index.at(a.relation)]; ++j) cycle.push_back(base + "c" + std::to_string(j));
    std::string prev = anchor(a.args[0].bare_name());
    for (std::size_t j = 1; j < len; ++j) {
      std::string v = base + "i" + std::to_string(j);
      g.add_edge(prev, v);
      prev = v;
    }
    g.add_edge(prev, cycle[0]);
    add_cycle(cycle);
    prev = cycle[0];
    for (std::size_t j = 1; j < len; ++j) {
      std::string v = base + "o" + std::to_string(j);
      g.add_edge(prev, v);
      prev = v;
    }
    g.add_edge(prev, anchor(a.args[1].bare_name()));
    return {cycle[0], cycle[1]};
  }
};

Digraph encode(const std::vector<Atom>& atoms, const Signature& a, const Signature& b, const Atom* target,
               Edge* target_edge) {
  GadgetBuilder builder(a, b);
  std::set<std::string> terms;
  for (const Atom& at : atoms)
    for (const Term& t : at.args) terms.insert(std::string(t.bare_name()));
  for (const std::string& t : terms) builder.add_anchor(t);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    Edge e = builder.add_atom(i, atoms[i]);
    if (target && atoms[i] == *target) *target_edge = e;
  }
  return builder.g;
}

}  // namespace

DmhInstance db_to_digraph_gadget(const CQ& q, const Database& d, const Fact& fact) {
  if (!q.constants().empty()) throw InvalidArgument("query must be constant-free");
  if (!q.diseqs().empty()) throw InvalidArgument("query must not contain inequalities");
  if (!d.contains(fact)) throw InvalidArgument("fact " + to_string(fact) + " is not in the database");
  Signature qsig = q.signature();
  DmhInstance out;
  out.pattern = encode(q.atoms(), qsig, d.signature(), nullptr, nullptr);
  std::vector<Atom> facts(d.facts().begin(), d.facts().end());
  out.host = encode(facts, qsig, d.signature(), &fact, &out.edge);
  return out;
}

// -------------------------------------------------------------- DMH oracle

bool dmh_bruteforce(const DmhInstance& inst, std::uint64_t hom_cap) {
  const Digraph &pat = inst.pattern, &host = inst.host;
  if (!host.edges.contains(inst.edge)) throw InvalidArgument("edge is not in the host graph");
  if (pat.edges.empty()) return false;  // the only image is empty

  std::vector<std::string> hv(host.vertices.begin(), host.vertices.end());
  std::map<std::string, std::uint32_t> hid;
  for (std::uint32_t i = 0; i < hv.size(); ++i) hid[hv[i]] = i;
  std::vector<std::vector<std::uint32_t>> out(hv.size()), in(hv.size());
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> edge_id;
  for (const auto& [u, v] : host.edges) {
    out[hid[u]].push_back(hid[v]);
    in[hid[v]].push_back(hid[u]);
    edge_id.emplace(std::pair(hid[u], hid[v]), static_cast<std::uint32_t>(edge_id.size()));
  }
  const std::uint32_t target = edge_id.at({hid[inst.edge.first], hid[inst.edge.second]});

  // Pattern vertices in BFS order so that each one after a component root has
  // an earlier neighbour.
  std::vector<std::string> pv(pat.vertices.begin(), pat.vertices.end());
  std::map<std::string, std::uint32_t> pid;
  for (std::uint32_t i = 0; i < pv.size(); ++i) pid[pv[i]] = i;
  std::vector<std::vector<std::uint32_t>> pout(pv.size()), pin(pv.size());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pedges;
  for (const auto& [u, v] : pat.edges) {
    pout[pid[u]].push_back(pid[v]);
    pin[pid[v]].push_back(pid[u]);
    pedges.emplace_back(pid[u], pid[v]);
  }
  std::vector<std::uint32_t> order;
  std::vector<bool> queued(pv.size(), false);
  for (std::uint32_t root = 0; root < pv.size(); ++root) {
    if (queued[root]) continue;
    queued[root] = true;
    std::size_t head = order.size();
    order.push_back(root);
    while (head < order.size()) {
      std::uint32_t x = order[head++];
      for (const auto* adj : {&pout[x], &pin[x]})
        for (std::uint32_t y : *adj)
          if (!queued[y]) {
            queued[y] = true;
            order.push_back(y);
          }
    }
  }

  constexpr std::uint32_t kFree = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> h(pv.size(), kFree);
  std::set<std::vector<std::uint32_t>> images;
  std::uint64_t homs = 0;

  for (auto& v : out) std::sort(v.begin(), v.end());
  for (auto& v : in) std::sort(v.begin(), v.end());
  auto consistent = [&](std::uint32_t x, std::uint32_t y) {
    auto image = [&](std::uint32_t z) { return z == x ? y : h[z]; };
    for (std::uint32_t z : pout[x])
      if (image(z) != kFree && !std::binary_search(out[y].begin(), out[y].end(), image(z))) return false;
    for (std::uint32_t z : pin[x])
      if (image(z) != kFree && !std::binary_search(in[y].begin(), in[y].end(), image(z))) return false;
    return true;
  };

  std::function<void(std::size_t)> go = [&](std::size_t k) {
    if (k == order.size()) {
      if (++homs > hom_cap) throw ResourceLimit("more than " + std::to_string(hom_cap) + " homomorphisms");
      std::vector<std::uint32_t> img;
      for (const auto& [u, v] : pedges) img.push_back(edge_id.at({h[u], h[v]}));
      std::sort(img.begin(), img.end());
      img.erase(std::unique(img.begin(), img.end()), img.end());
      images.insert(std::move(img));
      return;
    }
    std::uint32_t x = order[k];
    std::vector<std::uint32_t> cands;
    bool anchored = false;
    for (std::uint32_t z : pin[x])
      if (h[z] != kFree) {
        cands = out[h[z]];
        anchored = true;
        break;
      }
    if (!anchored)
      for (std::uint32_t z : pout[x])
        if (h[z] != kFree) {
          cands = in[h[z]];
          anchored = true;
          break;
        }
    if (!anchored) {
      cands.resize(hv.size());
      for (std::uint32_t i = 0; i < hv.size(); ++i) cands[i] = i;
    }
    for (std::uint32_t y : cands) {
      if (!consistent(x, y)) continue;
      h[x] = y;
      go(k + 1);
      h[x] = kFree;
    }
  };
  go(0);

  std::vector<std::vector<std::uint32_t>> sorted(images.begin(), images.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  std::vector<std::vector<std::uint32_t>> minimal;
  for (const auto& img : sorted) {
    bool has_smaller = std::any_of(minimal.begin(), minimal.end(), [&](const auto& m) {
      return std::includes(img.begin(), img.end(), m.begin(), m.end());
    });
    if (!has_smaller) minimal.push_back(img);
  }
  return std::any_of(minimal.begin(), minimal.end(),
                     [&](const auto& m) { return std::binary_search(m.begin(), m.end(), target); });
}

}  // namespace factrel
