#include "factrel/core.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "factrel/error.hpp"
#include "lexer.hpp"

namespace factrel {

namespace {

void check_identifier(std::string_view s, const char* what) {
  if (!is_identifier(s)) throw InvalidArgument(std::string("invalid ") + what + " name '" + std::string(s) + "'");
}

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

bool is_identifier(std::string_view s) {
  if (s.empty() || !detail::Cursor::ident_start(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return detail::Cursor::ident_char(c); });
}

Term Term::variable(std::string_view name) {
  if (!name.empty() && name.front() == '?') name.remove_prefix(1);
  check_identifier(name, "variable");
  return Term("?" + std::string(name));
}

Term Term::constant(std::string_view name) {
  check_identifier(name, "constant");
  return Term(std::string(name));
}

Term Term::parse(std::string_view token) {
  if (!token.empty() && token.front() == '?') return variable(token);
  return constant(token);
}

std::string_view Term::bare_name() const {
  std::string_view v = name_;
  if (is_variable()) v.remove_prefix(1);
  return v;
}

bool Atom::is_ground() const {
  return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_constant(); });
}

void Signature::add(const std::string& relation, std::size_t arity) {
  if (arity == 0) throw InvalidArgument("relation '" + relation + "' has arity 0");
  auto [it, inserted] = arities_.emplace(relation, arity);
  if (!inserted && it->second != arity) {
    throw InvalidArgument("relation '" + relation + "' used with arities " + std::to_string(it->second) + " and " +
                          std::to_string(arity));
  }
}

std::optional<std::size_t> Signature::arity(const std::string& relation) const {
  auto it = arities_.find(relation);
  if (it == arities_.end()) return std::nullopt;
  return it->second;
}

bool Signature::is_binary() const {
  return std::all_of(arities_.begin(), arities_.end(), [](const auto& e) { return e.second <= 2; });
}

Database::Database(std::vector<Fact> facts) : facts_(std::move(facts)) {
  for (const Fact& f : facts_) {
    if (!f.is_ground()) throw InvalidArgument("fact " + to_string(f) + " contains a variable");
    check_identifier(f.relation, "relation");
    signature_.add(f.relation, f.arity());
  }
  sort_unique(facts_);
}

bool Database::contains(const Fact& f) const { return std::binary_search(facts_.begin(), facts_.end(), f); }

std::optional<std::size_t> Database::index_of(const Fact& f) const {
  auto it = std::lower_bound(facts_.begin(), facts_.end(), f);
  if (it == facts_.end() || *it != f) return std::nullopt;
  return static_cast<std::size_t>(it - facts_.begin());
}

std::vector<std::string> Database::constants() const {
  std::set<std::string> out;
  for (const Fact& f : facts_)
    for (const Term& t : f.args) out.insert(t.name());
  return {out.begin(), out.end()};
}

Database Database::subset(std::uint64_t mask) const {
  std::vector<Fact> picked;
  for (std::size_t i = 0; i < facts_.size() && i < 64; ++i)
    if (mask >> i & 1U) picked.push_back(facts_[i]);
  return Database(std::move(picked));
}

CQ::CQ(std::vector<Atom> atoms, std::vector<Diseq> diseqs) : atoms_(std::move(atoms)), diseqs_(std::move(diseqs)) {
  Signature sig;
  std::set<Term> in_atoms;
  for (const Atom& a : atoms_) {
    check_identifier(a.relation, "relation");
    sig.add(a.relation, a.arity());
    in_atoms.insert(a.args.begin(), a.args.end());
  }
  for (auto& [l, r] : diseqs_) {
    if (l == r) throw InvalidArgument("inequality relates " + l.name() + " to itself");
    if (r < l) std::swap(l, r);
    for (const Term* t : {&l, &r})
      if (t->is_variable() && !in_atoms.contains(*t))
        throw InvalidArgument("variable " + t->name() + " occurs in no relational atom");
  }
  sort_unique(atoms_);
  sort_unique(diseqs_);
}

std::vector<Term> CQ::terms() const {
  std::set<Term> out;
  for (const Atom& a : atoms_) out.insert(a.args.begin(), a.args.end());
  for (const auto& [l, r] : diseqs_) {
    out.insert(l);
    out.insert(r);
  }
  return {out.begin(), out.end()};
}

std::vector<Term> CQ::variables() const {
  std::vector<Term> out;
  for (Term& t : terms())
    if (t.is_variable()) out.push_back(std::move(t));
  return out;
}

std::vector<Term> CQ::constants() const {
  std::vector<Term> out;
  for (Term& t : terms())
    if (t.is_constant()) out.push_back(std::move(t));
  return out;
}

Signature CQ::signature() const {
  Signature sig;
  for (const Atom& a : atoms_) sig.add(a.relation, a.arity());
  return sig;
}

CQ substitute(const CQ& q, const std::map<Term, Term>& subst) {
  auto map_term = [&](const Term& t) {
    auto it = subst.find(t);
    return it == subst.end() ? t : it->second;
  };
  std::vector<Atom> atoms;
  atoms.reserve(q.atoms().size());
  for (const Atom& a : q.atoms()) {
    Atom b{a.relation, {}};
    for (const Term& t : a.args) b.args.push_back(map_term(t));
    atoms.push_back(std::move(b));
  }
  std::vector<CQ::Diseq> diseqs;
  for (const auto& [l, r] : q.diseqs()) diseqs.emplace_back(map_term(l), map_term(r));
  return CQ(std::move(atoms), std::move(diseqs));
}

namespace {

Term read_term(detail::Cursor& in) {
  std::size_t line = in.line(), col = in.column();
  std::string tok = in.identifier(true);
  try {
    return Term::parse(tok);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), line, col);
  }
}

std::vector<Term> read_args(detail::Cursor& in, bool stop_at_newline) {
  std::vector<Term> args;
  in.expect('(');
  in.skip_space(stop_at_newline);
  args.push_back(read_term(in));
  in.skip_space(stop_at_newline);
  while (in.accept(',')) {
    in.skip_space(stop_at_newline);
    args.push_back(read_term(in));
    in.skip_space(stop_at_newline);
  }
  in.expect(')');
  return args;
}

void expect_neq(detail::Cursor& in) {
  if (in.peek() != '!' || in.peek_at(1) != '=') in.fail("expected '!='");
  in.get();
  in.get();
}

template <typename Build>
auto rethrow_at(std::size_t line, std::size_t col, Build&& build) {
  try {
    return build();
  } catch (const ParseError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), line, col);
  }
}

}  // namespace

CQ parse_cq(std::string_view text) {
  detail::Cursor in(text);
  std::vector<Atom> atoms;
  std::vector<CQ::Diseq> diseqs;
  in.skip_space();
  while (!in.at_end()) {
    if (in.peek() == '?') {
      Term l = read_term(in);
      in.skip_space();
      expect_neq(in);
      in.skip_space();
      diseqs.emplace_back(std::move(l), read_term(in));
    } else {
      std::size_t line = in.line(), col = in.column();
      std::string name = in.identifier(false);
      in.skip_space();
      if (in.peek() == '(') {
        atoms.push_back(Atom{std::move(name), read_args(in, false)});
      } else {
        expect_neq(in);
        in.skip_space();
        Term l = rethrow_at(line, col, [&] { return Term::constant(name); });
        diseqs.emplace_back(std::move(l), read_term(in));
      }
    }
    in.skip_space();
    if (in.at_end()) break;
    in.expect(',');
    in.skip_space();
    if (in.at_end()) in.fail("expected an atom after ','");
  }
  return rethrow_at(in.line(), in.column(), [&] { return CQ(std::move(atoms), std::move(diseqs)); });
}

Database parse_database(std::string_view text) {
  detail::Cursor in(text);
  std::vector<Fact> facts;
  Signature sig;
  for (;;) {
    in.skip_space();
    if (in.at_end()) break;
    std::size_t line = in.line(), col = in.column();
    std::string name = in.identifier(false);
    in.skip_space(true);
    Fact f{std::move(name), read_args(in, true)};
    if (!f.is_ground()) throw ParseError("fact " + to_string(f) + " contains a variable", line, col);
    rethrow_at(line, col, [&] {
      sig.add(f.relation, f.arity());
      return 0;
    });
    facts.push_back(std::move(f));
    in.skip_space(true);
    if (!in.at_end() && in.peek() != '\n') in.fail("expected one fact per line");
  }
  return Database(std::move(facts));
}

Atom parse_atom(std::string_view text) {
  detail::Cursor in(text);
  in.skip_space();
  std::string name = in.identifier(false);
  in.skip_space();
  Atom a{std::move(name), read_args(in, false)};
  in.skip_space();
  if (!in.at_end()) in.fail("trailing input after atom");
  return a;
}

std::string to_string(const Term& t) { return t.name(); }

std::string to_string(const Atom& a) {
  std::string out = a.relation + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ",";
    out += a.args[i].name();
  }
  return out + ")";
}

std::string to_string(const CQ& q) {
  std::string out;
  auto sep = [&] {
    if (!out.empty()) out += ", ";
  };
  for (const Atom& a : q.atoms()) {
    sep();
    out += to_string(a);
  }
  for (const auto& [l, r] : q.diseqs()) {
    sep();
    out += l.name() + " != " + r.name();
  }
  return out;
}

std::string to_string(const Database& d) {
  std::string out;
  for (const Fact& f : d.facts()) out += to_string(f) + "\n";
  return out;
}

std::ostream& operator<<(std::ostream& os, const Term& t) { return os << t.name(); }
std::ostream& operator<<(std::ostream& os, const Atom& a) { return os << to_string(a); }
std::ostream& operator<<(std::ostream& os, const CQ& q) { return os << to_string(q); }

std::vector<Diagnostic> validate(const CQ& q, const Database& d) {
  std::vector<Diagnostic> out;
  Signature sig = q.signature();
  for (const auto& [rel, arity] : sig.entries()) {
    auto db_arity = d.signature().arity(rel);
    if (!db_arity) {
      out.push_back({Diagnostic::Severity::Warning, rel + " unmatched: relation absent from the database"});
    } else if (*db_arity != arity) {
      out.push_back({Diagnostic::Severity::Error, "arity conflict for " + rel + ": query uses " +
                                                      std::to_string(arity) + ", database uses " +
                                                      std::to_string(*db_arity)});
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string fresh_name(std::string_view base, const std::function<bool(const std::string&)>& taken) {
  std::string name(base);
  for (int i = 1; taken(name); ++i) name = std::string(base) + std::to_string(i);
  return name;
}

}  // namespace factrel
