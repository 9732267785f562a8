#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace factrel {

/// A variable (`?x`) or a constant (`c`). The kind is carried by the name.
class Term {
 public:
  Term() = default;

  /// Accepts `x` or `?x`.
  static Term variable(std::string_view name);
  static Term constant(std::string_view name);
  /// Classifies by the leading `?`.
  static Term parse(std::string_view token);

  bool is_variable() const { return !name_.empty() && name_.front() == '?'; }
  bool is_constant() const { return !name_.empty() && name_.front() != '?'; }
  /// Full name; variables keep their `?`.
  const std::string& name() const { return name_; }
  /// Name without the `?` marker.
  std::string_view bare_name() const;

  auto operator<=>(const Term&) const = default;

 private:
  explicit Term(std::string name) : name_(std::move(name)) {}
  std::string name_;
};

struct Atom {
  std::string relation;
  std::vector<Term> args;

  std::size_t arity() const { return args.size(); }
  bool is_ground() const;

  auto operator<=>(const Atom&) const = default;
};

/// Facts are ground atoms.
using Fact = Atom;

/// Relation name to arity.
class Signature {
 public:
  /// Throws InvalidArgument when `relation` is already known with another arity.
  void add(const std::string& relation, std::size_t arity);
  std::optional<std::size_t> arity(const std::string& relation) const;
  bool contains(const std::string& relation) const { return arities_.contains(relation); }
  /// True iff every arity is at most 2.
  bool is_binary() const;
  std::size_t size() const { return arities_.size(); }
  const std::map<std::string, std::size_t>& entries() const { return arities_; }

  bool operator==(const Signature&) const = default;

 private:
  std::map<std::string, std::size_t> arities_;
};

/// A finite set of facts, kept sorted and duplicate-free.
class Database {
 public:
  Database() = default;
  /// Throws InvalidArgument on non-ground facts, zero arity or arity clashes.
  explicit Database(std::vector<Fact> facts);

  std::span<const Fact> facts() const { return facts_; }
  std::size_t size() const { return facts_.size(); }
  bool empty() const { return facts_.empty(); }
  bool contains(const Fact& f) const;
  std::optional<std::size_t> index_of(const Fact& f) const;
  const Signature& signature() const { return signature_; }
  std::vector<std::string> constants() const;

  /// Facts selected by the set bits of `mask` (bit i = facts()[i]).
  Database subset(std::uint64_t mask) const;

  bool operator==(const Database& o) const { return facts_ == o.facts_; }

 private:
  std::vector<Fact> facts_;
  Signature signature_;
};

/// Boolean conjunctive query with optional inequality atoms.
class CQ {
 public:
  using Diseq = std::pair<Term, Term>;

  CQ() = default;
  /// Normalizes (sorts, dedups) and validates: consistent arities, no
  /// `t != t`, every variable in some relational atom.
  explicit CQ(std::vector<Atom> atoms, std::vector<Diseq> diseqs = {});

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Diseq>& diseqs() const { return diseqs_; }
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }

  std::vector<Term> variables() const;
  std::vector<Term> constants() const;
  std::vector<Term> terms() const;
  Signature signature() const;

  bool operator==(const CQ&) const = default;

 private:
  std::vector<Atom> atoms_;
  std::vector<Diseq> diseqs_;
};

/// Replaces terms according to `subst`; unmapped terms are kept.
CQ substitute(const CQ& q, const std::map<Term, Term>& subst);

CQ parse_cq(std::string_view text);
Database parse_database(std::string_view text);
/// A single atom, e.g. the `--fact` argument of the CLI.
Atom parse_atom(std::string_view text);
bool is_identifier(std::string_view s);

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
/// Canonical form: atoms in sorted order, then inequalities.
std::string to_string(const CQ& q);
/// One fact per line, sorted.
std::string to_string(const Database& d);

std::ostream& operator<<(std::ostream& os, const Term& t);
std::ostream& operator<<(std::ostream& os, const Atom& a);
std::ostream& operator<<(std::ostream& os, const CQ& q);

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity;
  std::string message;
};

/// Relations of `q` absent from `d`, and arity conflicts between the two.
std::vector<Diagnostic> validate(const CQ& q, const Database& d);

/// Whole contents of a text file. Throws InvalidArgument when unreadable.
std::string read_file(const std::string& path);

/// `base`, or `base` with a numeric suffix, whichever is first not `taken`.
std::string fresh_name(std::string_view base, const std::function<bool(const std::string&)>& taken);

}  // namespace factrel
