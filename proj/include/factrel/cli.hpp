#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "factrel/core.hpp"
#include "factrel/dllite.hpp"
#include "factrel/structure.hpp"

namespace factrel::cli {

enum ExitCode : int { kOk = 0, kPrecondition = 1, kParse = 2, kInconsistent = 3, kCapExceeded = 4 };

enum class Engine { Auto, Bruteforce, Sjw, Omq };
std::optional<Engine> parse_engine(const std::string& s);

struct Caps {
  std::size_t subset = 20;       // |D| for subset enumeration
  std::size_t sjw = 6;           // self-join width
  std::size_t interaction = 5;   // interaction width
};

/// Parsed inputs of the query commands. The TBox is absent for plain CQs.
struct Inputs {
  CQ query;
  Database data;
  std::optional<TBox> tbox;
};

/// Reads the files; the TBox is parsed with the query and data signatures as
/// role/concept hint.
Inputs load_inputs(const std::string& query_file, const std::string& data_file,
                   const std::optional<std::string>& tbox_file);

struct RunReport {
  std::string command;
  std::optional<bool> verdict;
  std::string algorithm;  // bruteforce | sjw | omq-type-i | omq-type-ii | none | eval
  std::vector<std::vector<Fact>> witnesses;
  std::optional<StructureReport> structure;
  std::optional<std::size_t> self_join_width;
  std::optional<std::size_t> interaction_width;
  double wall_ms = 0;
};

RunReport run_relevance(const Inputs& in, const Fact& f, Engine engine, bool witness, const Caps& caps = {});
RunReport run_supports(const Inputs& in, const Caps& caps = {});
RunReport run_evaluate(const Inputs& in);
RunReport run_classify(const Inputs& in);

std::string to_json(const RunReport& r);
std::string to_text(const RunReport& r);

/// Full command line front end. Returns the process exit code.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace factrel::cli
