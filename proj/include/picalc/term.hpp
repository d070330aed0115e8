#ifndef PICALC_TERM_HPP
#define PICALC_TERM_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "picalc/symbols.hpp"

namespace picalc {

class Signature;

// Immutable first-order term: an atom (variable, name or constant) or an
// application f(t1,...,tn). Subterms are shared, copies are cheap.
class Term {
 public:
  Term() : Term(atom(const_sym("0"))) {}

  static Term atom(Symbol s);
  static Term app(std::string fn, std::vector<Term> args);
  static Term pair(Term first, Term second) {
    return app("pair", {std::move(first), std::move(second)});
  }

  bool is_atom() const;
  bool is_app() const;
  const Symbol& symbol() const;           // atoms only
  const std::string& fn() const;          // applications only
  const std::vector<Term>& args() const;  // applications only

  bool operator==(const Term& other) const;
  bool operator!=(const Term& other) const { return !(*this == other); }
  bool operator<(const Term& other) const { return key() < other.key(); }

  std::string print() const;  // concrete syntax, pair(a,b) as (a,b)
  std::string key() const;    // kind-tagged canonical spelling

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

SymbolSet variables_of(const Term& e);
SymbolSet names_of(const Term& e);
SymbolSet symbols_of(const Term& e);

bool is_closed(const Term& e);
// var(e) subseteq allowed, i.e. e is a member of tm(allowed).
bool in_tm(const Term& e, const SymbolSet& allowed);
bool contains_symbol(const Term& e, const Symbol& s);
bool well_formed(const Term& e, const Signature& sig, std::string* why = nullptr);

// Replace every occurrence of atom x by r (terms have no binders).
Term replace_atom(const Term& e, const Symbol& x, const Term& r);

struct Binding {
  Symbol var;
  Term term;
};

// An ordered substitution x1->e1, ..., xl->el with the property that for all
// i <= j, x_i does not occur in e_j. check_acyclic produces these.
class AcyclicSubstitution {
 public:
  AcyclicSubstitution() = default;

  const std::vector<Binding>& bindings() const { return b_; }
  bool empty() const { return b_.empty(); }
  std::size_t size() const { return b_.size(); }
  SymbolSet domain() const;
  std::optional<Term> lookup(const Symbol& var) const;
  bool satisfies_ordering() const;  // direct scan of the ordering condition

  // Trusts (and asserts) that the given order already satisfies the.
  // ordering condition; use check_acyclic to sort arbitrary bindings.
  static AcyclicSubstitution from_ordered(std::vector<Binding> ordered);

 private:
  std::vector<Binding> b_;
};

// Orders the bindings so the acyclicity condition holds, deterministically
// (lexicographic tie-breaking). Throws CyclicSubstitution when the dependency
// graph has a cycle and PreconditionViolated on duplicate domain variables.
AcyclicSubstitution check_acyclic(std::vector<Binding> bindings);

// Sequential application: ((e^{e1/x1})^{e2/x2})...^{el/xl}.
Term apply_substitution(const Term& e, const AcyclicSubstitution& theta);

}  // namespace picalc

#endif
