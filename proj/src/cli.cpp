#include "factrel/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "factrel/error.hpp"
#include "factrel/homomorphism.hpp"
#include "factrel/reductions.hpp"
#include "factrel/sjw.hpp"
#include "factrel/supports.hpp"

namespace factrel::cli {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<Fact> facts_at(const Database& d, const FactIndexSet& idx) {
  std::vector<Fact> out;
  for (std::size_t i : idx) out.push_back(d.facts()[i]);
  std::sort(out.begin(), out.end());
  return out;
}

OMQ omq_of(const Inputs& in) { return OMQ{in.tbox.value_or(TBox{}), in.query}; }

EntailmentOracle omq_oracle(const Inputs& in) {
  return [q = omq_of(in)](const Database& s) { return evaluate_omq(s, q); };
}

void require_fact(const Inputs& in, const Fact& f) {
  if (!in.data.contains(f)) throw InvalidArgument("fact " + to_string(f) + " is not in the data");
}

void require_subset_cap(const Database& d, const Caps& caps) {
  if (d.size() > caps.subset)
    throw ResourceLimit("data has " + std::to_string(d.size()) + " facts, brute-force cap is " +
                        std::to_string(caps.subset));
}

/// Throws InconsistentKB when a TBox is present and (A,T) has no model.
void require_consistent(const Inputs& in) {
  if (!in.tbox) return;
  ConsistencyResult c = is_consistent(in.data, *in.tbox);
  if (c.consistent) return;
  std::vector<std::string> conflict;
  for (const Fact& f : c.conflict) conflict.push_back(to_string(f));
  std::string msg = "inconsistent knowledge base, conflict:";
  for (const std::string& s : conflict) msg += " " + s;
  throw InconsistentKB(msg, conflict);
}

bool satisfiable(const CnfFormula& phi) {
  if (phi.num_vars > 24) throw ResourceLimit("exhaustive SAT check is limited to 24 variables");
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << phi.num_vars); ++m) {
    bool all = std::all_of(phi.clauses.begin(), phi.clauses.end(), [&](const std::vector<int>& c) {
      return std::any_of(c.begin(), c.end(), [&](int lit) {
        bool value = m >> (std::abs(lit) - 1) & 1U;
        return lit > 0 ? value : !value;
      });
    });
    if (all) return true;
  }
  return false;
}

bool hamiltonian_path(const Digraph& g, const std::string& s, const std::string& t) {
  if (g.vertices.size() > 10) throw ResourceLimit("exhaustive Hamiltonian path check is limited to 10 vertices");
  std::vector<std::string> vs(g.vertices.begin(), g.vertices.end());
  do {
    if (vs.front() != s || vs.back() != t) continue;
    bool ok = true;
    for (std::size_t i = 0; i + 1 < vs.size() && ok; ++i) ok = g.edges.contains({vs[i], vs[i + 1]});
    if (ok) return true;
  } while (std::next_permutation(vs.begin(), vs.end()));
  return false;
}

}  // namespace

std::optional<Engine> parse_engine(const std::string& s) {
  if (s == "auto") return Engine::Auto;
  if (s == "bruteforce") return Engine::Bruteforce;
  if (s == "sjw") return Engine::Sjw;
  if (s == "omq") return Engine::Omq;
  return std::nullopt;
}

Inputs load_inputs(const std::string& query_file, const std::string& data_file,
                   const std::optional<std::string>& tbox_file) {
  Inputs in{parse_cq(read_file(query_file)), parse_database(read_file(data_file)), std::nullopt};
  if (tbox_file) {
    Signature hint = in.query.signature();
    for (const auto& [r, arity] : in.data.signature().entries()) hint.add(r, arity);
    in.tbox = parse_tbox(read_file(*tbox_file), hint);
  }
  return in;
}

RunReport run_relevance(const Inputs& in, const Fact& f, Engine engine, bool witness, const Caps& caps) {
  auto start = Clock::now();
  RunReport r;
  r.command = "relevance";
  require_fact(in, f);
  require_consistent(in);

  if (engine == Engine::Auto) {
    if (in.tbox) {
      engine = interaction_width(omq_of(in)) <= caps.interaction ? Engine::Omq : Engine::Bruteforce;
    } else {
      engine = self_join_width(in.query) <= caps.sjw ? Engine::Sjw : Engine::Bruteforce;
    }
    if (engine == Engine::Bruteforce) require_subset_cap(in.data, caps);
  }

  switch (engine) {
    case Engine::Sjw: {
      if (in.tbox) throw InvalidArgument("the sjw engine does not support a TBox");
      NiceEquivs nice = nice_equivs(in.query, caps.sjw);
      std::optional<FactIndexSet> w = sjw_witness(f, nice, in.data);
      r.algorithm = "sjw";
      r.verdict = w.has_value();
      if (witness && w) r.witnesses.push_back(facts_at(in.data, *w));
      break;
    }
    case Engine::Omq: {
      OmqRelevance res = relevance_omq(f, omq_of(in), in.data, caps.interaction);
      r.algorithm = to_string(res.algorithm);
      r.verdict = res.relevant;
      if (witness && res.relevant) {
        require_subset_cap(in.data, caps);
        if (auto w = support_containing(f, in.data, omq_oracle(in), caps.subset)) r.witnesses.push_back(*w);
      }
      break;
    }
    case Engine::Bruteforce:
    case Engine::Auto: {
      r.algorithm = "bruteforce";
      if (in.tbox) {
        // Explicit brute force ignores the cap up to the 64-bit subset masks.
        auto w = support_containing(f, in.data, omq_oracle(in), 62);
        r.verdict = w.has_value();
        if (witness && w) r.witnesses.push_back(*w);
      } else {
        r.verdict = relevant_bruteforce(f, in.query, in.data);
        if (witness && *r.verdict)
          if (auto w = support_containing(f, in.query, in.data)) r.witnesses.push_back(*w);
      }
      break;
    }
  }
  r.wall_ms = ms_since(start);
  return r;
}

RunReport run_supports(const Inputs& in, const Caps& caps) {
  auto start = Clock::now();
  RunReport r;
  r.command = "supports";
  require_consistent(in);
  if (in.tbox) {
    require_subset_cap(in.data, caps);
    r.witnesses = minimal_supports(in.data, omq_oracle(in), caps.subset);
    r.algorithm = "bruteforce";
  } else {
    r.witnesses = minimal_supports(in.query, in.data);
    r.algorithm = "images";
  }
  r.verdict = !r.witnesses.empty();
  r.wall_ms = ms_since(start);
  return r;
}

RunReport run_evaluate(const Inputs& in) {
  auto start = Clock::now();
  RunReport r;
  r.command = "evaluate";
  require_consistent(in);
  if (in.tbox) {
    r.verdict = evaluate_omq(in.data, omq_of(in));
    r.algorithm = "canonical-model";
  } else {
    r.verdict = in.query.empty() || find_hom(in.query, in.data).has_value();
    r.algorithm = "homomorphism";
  }
  r.wall_ms = ms_since(start);
  return r;
}

RunReport run_classify(const Inputs& in) {
  auto start = Clock::now();
  RunReport r;
  r.command = "classify";
  r.structure = classify(in.query);
  r.self_join_width = self_join_width(in.query);
  // Interaction width is defined for queries without inequalities over a
  // binary signature.
  if (in.query.diseqs().empty() && in.query.signature().is_binary()) r.interaction_width = interaction_width(omq_of(in));
  r.algorithm = "classify";
  r.wall_ms = ms_since(start);
  return r;
}

namespace {

json facts_json(const std::vector<Fact>& fs) {
  json a = json::array();
  for (const Fact& f : fs) a.push_back(to_string(f));
  return a;
}

json structure_json(const StructureReport& s) {
  json comps = json::array();
  for (const ComponentReport& c : s.components) {
    comps.push_back({{"query", to_string(c.component)},
                     {"leaf_count", c.leaf_count ? json(*c.leaf_count) : json(nullptr)},
                     {"is_chain", c.is_chain}});
  }
  return {{"acyclic", s.acyclic},
          {"is_chain", s.is_chain},
          {"self_join_free", s.self_join_free},
          {"treewidth", s.treewidth ? json(*s.treewidth) : json(nullptr)},
          {"components", comps}};
}

std::string set_text(const std::vector<Fact>& fs) {
  std::string s = "{";
  for (std::size_t i = 0; i < fs.size(); ++i) s += (i ? ", " : "") + to_string(fs[i]);
  return s + "}";
}

}  // namespace

std::string to_json(const RunReport& r) {
  json j;
  j["command"] = r.command;
  j["verdict"] = r.verdict ? json(*r.verdict) : json(nullptr);
  j["algorithm"] = r.algorithm;
  j["witnesses"] = json::array();
  for (const auto& w : r.witnesses) j["witnesses"].push_back(facts_json(w));
  j["structure"] = r.structure ? structure_json(*r.structure) : json(nullptr);
  j["self_join_width"] = r.self_join_width ? json(*r.self_join_width) : json(nullptr);
  j["interaction_width"] = r.interaction_width ? json(*r.interaction_width) : json(nullptr);
  j["timing_ms"] = r.wall_ms;
  return j.dump(2);
}

std::string to_text(const RunReport& r) {
  std::ostringstream out;
  if (r.command == "relevance") {
    out << (*r.verdict ? "relevant" : "irrelevant") << "\n";
    out << "algorithm: " << r.algorithm << "\n";
    for (const auto& w : r.witnesses) out << "witness: " << set_text(w) << "\n";
  } else if (r.command == "supports") {
    out << r.witnesses.size() << " minimal support" << (r.witnesses.size() == 1 ? "" : "s") << "\n";
    for (const auto& w : r.witnesses) out << set_text(w) << "\n";
  } else if (r.command == "evaluate") {
    out << (*r.verdict ? "true" : "false") << "\n";
  } else if (r.command == "classify") {
    const StructureReport& s = *r.structure;
    out << "acyclic: " << (s.acyclic ? "yes" : "no") << "\n";
    out << "chain: " << (s.is_chain ? "yes" : "no") << "\n";
    out << "self-join free: " << (s.self_join_free ? "yes" : "no") << "\n";
    out << "treewidth: " << (s.treewidth ? std::to_string(*s.treewidth) : "unknown") << "\n";
    out << "components: " << s.components.size() << "\n";
    for (const ComponentReport& c : s.components) {
      out << "  " << to_string(c.component);
      if (c.leaf_count) out << "  leaves: " << *c.leaf_count;
      if (c.is_chain) out << "  chain";
      out << "\n";
    }
    out << "self-join width: " << *r.self_join_width << "\n";
    out << "interaction width: " << (r.interaction_width ? std::to_string(*r.interaction_width) : "n/a") << "\n";
  }
  out << "time: " << r.wall_ms << " ms\n";
  return out.str();
}

// ------------------------------------------------------------------ reduce

namespace {

struct ReduceArgs {
  std::string gadget;
  std::string in;
  std::string out_dir;
  std::string data;
  std::string fact;
  std::string source = "s";
  std::string target = "t";
  bool verify = false;
};

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + p.string());
  f << text;
}

std::string with_newline(std::string s) {
  if (!s.empty() && s.back() != '\n') s += '\n';
  return s;
}

void write_relevance(const std::filesystem::path& dir, const RelevanceInstance& r) {
  write_file(dir / "query.cq", with_newline(to_string(r.query)));
  write_file(dir / "data.db", with_newline(to_string(r.data)));
  write_file(dir / "fact.txt", to_string(r.fact) + "\n");
}

std::string agree(bool a, bool b) { return a == b ? "agree" : "DISAGREE"; }

std::string verdict_word(bool relevant) { return relevant ? "relevant" : "irrelevant"; }

int run_reduce(const ReduceArgs& a, std::ostream& out) {
  std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  bool agreed = true;

  if (a.gadget == "sat") {
    CnfFormula phi = parse_dimacs(read_file(a.in));
    HornAqInstance inst = sat_to_aq_relevance(phi);
    std::string rules;
    for (const HornRule& r : inst.tbox) rules += to_string(r) + "\n";
    write_file(dir / "rules.txt", rules);
    write_file(dir / "abox.db", with_newline(to_string(inst.abox)));
    write_file(dir / "query.txt", inst.goal + "(" + inst.individual + ")\n");
    write_file(dir / "fact.txt", to_string(inst.fact) + "\n");
    out << "wrote rules.txt abox.db query.txt fact.txt\n";
    if (a.verify) {
      bool rel = horn_relevance_bruteforce(inst), sat = satisfiable(phi);
      agreed = rel == sat;
      out << "verify: " << verdict_word(rel) << ", sat: " << (sat ? "true" : "false") << ", " << agree(rel, sat) << "\n";
    }
  } else if (a.gadget == "hampath") {
    Digraph g = parse_digraph(read_file(a.in));
    RelevanceInstance r = hampath_to_chain_relevance(g, a.source, a.target);
    write_relevance(dir, r);
    out << "wrote query.cq data.db fact.txt\n";
    if (a.verify) {
      bool rel = relevant_bruteforce(r.fact, r.query, r.data), ham = hamiltonian_path(g, a.source, a.target);
      agreed = rel == ham;
      out << "verify: " << verdict_word(rel) << ", hampath: " << (ham ? "true" : "false") << ", " << agree(rel, ham)
          << "\n";
    }
  } else if (a.gadget == "eval") {
    if (a.data.empty()) throw InvalidArgument("--data is required for the eval gadget");
    CQ q = parse_cq(read_file(a.in));
    Database d = parse_database(read_file(a.data));
    RelevanceInstance r = eval_to_relevance(q, d);
    write_relevance(dir, r);
    out << "wrote query.cq data.db fact.txt\n";
    if (a.verify) {
      bool rel = relevant_bruteforce(r.fact, r.query, r.data);
      bool holds = q.empty() || find_hom(q, d).has_value();
      agreed = rel == holds;
      out << "verify: " << verdict_word(rel) << ", entailed: " << (holds ? "true" : "false") << ", "
          << agree(rel, holds) << "\n";
    }
  } else if (a.gadget == "selfjoin") {
    if (a.data.empty()) throw InvalidArgument("--data is required for the selfjoin gadget");
    CQ q = parse_cq(read_file(a.in));
    Database d = parse_database(read_file(a.data));
    SelfJoinFreeOmq s = remove_selfjoins(q, d);
    write_file(dir / "query.cq", with_newline(to_string(s.omq.query)));
    write_file(dir / "tbox.tbox", with_newline(to_string(s.omq.tbox)));
    write_file(dir / "abox.db", with_newline(to_string(s.abox)));
    out << "wrote query.cq tbox.tbox abox.db\n";
    out << "self-join width: " << self_join_width(s.omq.query) << "\n";
    if (a.verify) {
      std::size_t agreements = 0;
      for (const Fact& f : d.facts()) {
        bool before = relevant_bruteforce(f, q, d);
        bool after = relevance_omq(f, s.omq, s.abox).relevant;
        agreements += before == after;
        if (before != after) out << "mismatch on " << to_string(f) << "\n";
      }
      agreed = agreements == d.size();
      out << "verify: " << agreements << "/" << d.size() << " verdicts preserved, " << (agreed ? "agree" : "DISAGREE")
          << "\n";
    }
  } else if (a.gadget == "digraph") {
    if (a.data.empty() || a.fact.empty()) throw InvalidArgument("--data and --fact are required for the digraph gadget");
    RelevanceInstance r{parse_cq(read_file(a.in)), parse_database(read_file(a.data)), parse_atom(a.fact)};
    if (!r.data.contains(r.fact)) throw InvalidArgument("fact " + to_string(r.fact) + " is not in the data");
    bool single = r.query.signature().size() <= 1 && r.data.signature().size() <= 1 &&
                  (r.query.signature().size() == 0 || r.query.signature().entries() == r.data.signature().entries());
    DmhInstance g;
    if (single) {
      g = relevance_to_dmh(r);
      RelevanceInstance back = dmh_to_relevance(g, r.fact.relation);
      bool same = digraph_of(back.query) == g.pattern && digraph_of(back.data) == g.host;
      out << "encoding: direct\nroundtrip: " << (same ? "identical edge set" : "DIFFERENT edge set") << "\n";
      agreed = same;
    } else {
      g = db_to_digraph_gadget(r.query, r.data, r.fact);
      out << "encoding: prime cycles\n";
    }
    write_file(dir / "pattern.graph", with_newline(to_string(g.pattern)));
    write_file(dir / "host.graph", with_newline(to_string(g.host)));
    write_file(dir / "edge.txt", g.edge.first + " -> " + g.edge.second + "\n");
    out << "wrote pattern.graph host.graph edge.txt\n";
    if (a.verify) {
      bool rel = relevant_bruteforce(r.fact, r.query, r.data), dmh = dmh_bruteforce(g);
      agreed = agreed && rel == dmh;
      out << "verify: " << verdict_word(rel) << ", dmh: " << (dmh ? "true" : "false") << ", " << agree(rel, dmh)
          << "\n";
    }
  } else {
    throw InvalidArgument("unknown gadget " + a.gadget);
  }
  return agreed ? kOk : kPrecondition;
}

}  // namespace

// -------------------------------------------------------------------- main

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fact relevance for conjunctive queries and DL-Lite ontology-mediated queries"};
  app.require_subcommand(1);

  std::string query_file, data_file, tbox_file, fact_text, engine_text = "auto";
  bool witness = false, as_json = false;
  Caps caps;

  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--query", query_file, "CQ file")->required();
    sub->add_option("--data", data_file, "database / ABox file")->required();
    sub->add_option("--tbox", tbox_file, "DL-Lite_R TBox file");
    sub->add_flag("--json", as_json, "machine-readable report");
  };
  auto add_caps = [&](CLI::App* sub) {
    sub->add_option("--max-facts", caps.subset, "brute-force cap on |D|");
    sub->add_option("--max-sjw", caps.sjw, "self-join width cap");
    sub->add_option("--max-iw", caps.interaction, "interaction width cap");
  };

  CLI::App* relevance = app.add_subcommand("relevance", "is the fact relevant for the query in the data?");
  add_inputs(relevance);
  add_caps(relevance);
  relevance->add_option("--fact", fact_text, "fact, e.g. R(a,b)")->required();
  relevance->add_option("--engine", engine_text, "auto | bruteforce | sjw | omq");
  relevance->add_flag("--witness", witness, "print a minimal support containing the fact");

  CLI::App* supports = app.add_subcommand("supports", "list all minimal supports");
  add_inputs(supports);
  add_caps(supports);
  CLI::App* evaluate = app.add_subcommand("evaluate", "does the data entail the query?");
  add_inputs(evaluate);
  CLI::App* classify_cmd = app.add_subcommand("classify", "structural measures of the query");
  add_inputs(classify_cmd);

  ReduceArgs red;
  CLI::App* reduce = app.add_subcommand("reduce", "emit a hardness-reduction instance");
  reduce->add_option("--gadget", red.gadget, "sat | hampath | selfjoin | digraph | eval")
      ->required()
      ->check(CLI::IsMember({"sat", "hampath", "selfjoin", "digraph", "eval"}));
  reduce->add_option("--in", red.in, "input file (DIMACS, digraph or CQ)")->required();
  reduce->add_option("--out", red.out_dir, "output directory")->required();
  reduce->add_option("--data", red.data, "database file (selfjoin, digraph, eval)");
  reduce->add_option("--fact", red.fact, "fact of the database (digraph)");
  reduce->add_option("--source", red.source, "start vertex (hampath)");
  reduce->add_option("--target", red.target, "end vertex (hampath)");
  reduce->add_flag("--verify", red.verify, "run the matching brute-force oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kPrecondition;
  }

  try {
    if (reduce->parsed()) return run_reduce(red, out);

    std::optional<Engine> engine = parse_engine(engine_text);
    if (!engine) throw InvalidArgument("unknown engine " + engine_text);
    Inputs in = load_inputs(query_file, data_file, tbox_file.empty() ? std::nullopt : std::optional(tbox_file));
    RunReport report;
    if (relevance->parsed()) {
      report = run_relevance(in, parse_atom(fact_text), *engine, witness, caps);
    } else if (supports->parsed()) {
      report = run_supports(in, caps);
    } else if (evaluate->parsed()) {
      report = run_evaluate(in);
    } else {
      report = run_classify(in);
    }
    out << (as_json ? to_json(report) + "\n" : to_text(report));
    return kOk;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const InconsistentKB& e) {
    err << "error: " << e.what() << "\n";
    return kInconsistent;
  } catch (const ResourceLimit& e) {
    err << "cap exceeded: " << e.what() << "\n";
    return kCapExceeded;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kPrecondition;
  }
}

}  // namespace factrel::cli
