#ifndef PICALC_PARSER_HPP
#define PICALC_PARSER_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "picalc/process.hpp"
#include "picalc/rewriting.hpp"

namespace picalc {

// Identifier universe of one specification file. The prelude provides pair/2
// and the public constants 0 and 1.
struct Declarations {
  Signature sig;
  SymbolSet names;
  SymbolSet constants;
  SymbolSet variables;     // rule variables, also usable as free process variables
  SymbolSet public_atoms;  // names/constants the environment may use in recipes

  Declarations();
  std::optional<Symbol> resolve(const std::string& id) const;
};

struct SpecQuery {
  enum class Kind { Normalize, Lts, Barbs, Bisim, Static, BarbEq, Probe, Closure, Oracle };
  Kind kind;
  std::vector<std::string> args;  // process names
  int line = 0;
  int col = 0;
  std::string kind_name() const;
};

struct SpecFile {
  Declarations decls;
  std::vector<RewriteRule> rules;
  std::map<std::string, ExtendedProcess> processes;
  std::vector<std::string> process_order;
  std::vector<SpecQuery> queries;

  EquationalTheory theory() const { return EquationalTheory(decls.sig, rules); }
};

// Parses a full specification file: declarations, rewrite rules, named
// processes and queries. Errors carry line and column; process bodies are
// checked for correctness at load and rejected with the violated condition
// named.
SpecFile parse_spec_file(const std::string& text, const std::string& filename = "<input>");

Term parse_term_string(const std::string& text, const Declarations& decls);
ExtendedProcess parse_process_string(const std::string& text, const Declarations& decls);

}  // namespace picalc

#endif
