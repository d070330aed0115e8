#ifndef PICALC_PROCESS_HPP
#define PICALC_PROCESS_HPP

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "picalc/term.hpp"

namespace picalc {

class PlainProcess;
class ExtendedProcess;

namespace pp {
struct Nil {};
struct Par;
struct Repl;
struct NameRes;
struct Cond;
struct Input;
struct Output;
}  // namespace pp

class PlainProcess {
 public:
  using Node = std::variant<pp::Nil, pp::Par, pp::Repl, pp::NameRes, pp::Cond, pp::Input, pp::Output>;

  PlainProcess();  // nil

  static PlainProcess nil();
  static PlainProcess par(PlainProcess left, PlainProcess right);
  static PlainProcess repl(PlainProcess body);
  static PlainProcess name_res(Symbol name, PlainProcess body);
  static PlainProcess cond(Term lhs, Term rhs, PlainProcess then_branch, PlainProcess else_branch);
  // Enforces the side condition that var does not occur in chan.
  static PlainProcess input(Term chan, Symbol var, PlainProcess body);
  static PlainProcess output(Term chan, Term msg, PlainProcess body);

  const Node& node() const;

 private:
  explicit PlainProcess(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

namespace pp {
struct Par { PlainProcess left, right; };
struct Repl { PlainProcess body; };
struct NameRes { Symbol name; PlainProcess body; };
struct Cond { Term lhs, rhs; PlainProcess then_branch, else_branch; };
struct Input { Term chan; Symbol var; PlainProcess body; };
struct Output { Term chan; Term msg; PlainProcess body; };
}  // namespace pp

inline const PlainProcess::Node& PlainProcess::node() const { return *n_; }

namespace ep {
struct Plain;
struct Par;
struct Res;
struct Subst;
}  // namespace ep

class ExtendedProcess {
 public:
  using Node = std::variant<ep::Plain, ep::Par, ep::Res, ep::Subst>;

  ExtendedProcess();  // nil

  static ExtendedProcess plain(PlainProcess p);
  static ExtendedProcess par(ExtendedProcess left, ExtendedProcess right);
  static ExtendedProcess res(Symbol binder, ExtendedProcess body);
  static ExtendedProcess subst(Term term, Symbol var);  // the active substitution {term/var}

  const Node& node() const;

 private:
  explicit ExtendedProcess(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

namespace ep {
struct Plain { PlainProcess p; };
struct Par { ExtendedProcess left, right; };
struct Res { Symbol binder; ExtendedProcess body; };
struct Subst { Term term; Symbol var; };
}  // namespace ep

inline const ExtendedProcess::Node& ExtendedProcess::node() const { return *n_; }

// Free variables / free names / every symbol occurring at all.
SymbolSet free_vars(const PlainProcess& p);
SymbolSet free_vars(const ExtendedProcess& a);
SymbolSet free_names(const PlainProcess& p);
SymbolSet free_names(const ExtendedProcess& a);
SymbolSet all_symbols(const PlainProcess& p);
SymbolSet all_symbols(const ExtendedProcess& a);

// dom(A): free variables with an active substitution in A.
SymbolSet domain(const ExtendedProcess& a);
bool is_closed_ep(const ExtendedProcess& a);

struct Violation {
  std::string rule;    // which correctness condition failed
  std::string path;    // location of the offending subprocess
  std::string detail;
};

struct CorrectnessReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// The four correctness conditions: disjoint parallel domains, at most one
// substitution per variable, variable restrictions enclose exactly one
// substitution for their variable, and the substitution multiset is acyclic.
CorrectnessReport check_correct(const ExtendedProcess& a);

// Collected active substitutions of A, in preorder.
std::vector<Binding> active_substitutions(const ExtendedProcess& a);

// Path steps select children: par left=0 right=1, unary nodes child=0,
// cond then=0 else=1. The path must end on a binder node (restriction or
// input); the binder and the occurrences it binds are renamed as a unit.
ExtendedProcess alpha_rename(const ExtendedProcess& a, const std::vector<int>& binder_path,
                             const Symbol& replacement);

// Renames binders so all bound symbols are pairwise distinct and disjoint
// from avoid; binders that already satisfy this are left untouched.
ExtendedProcess freshen_binders(const ExtendedProcess& a, const SymbolSet& avoid);

// Replace free occurrences of var by a term, renaming binders on the way
// down when they would capture.
PlainProcess substitute_free(const PlainProcess& p, const Symbol& var, const Term& replacement);
ExtendedProcess substitute_free(const ExtendedProcess& a, const Symbol& var, const Term& replacement);

// A^{e/x} for an EP of the shape {e/x} | A; asserts the result is correct.
ExtendedProcess apply_active(const ExtendedProcess& a, const Binding& binding);

// Rewrites every term in the process.
PlainProcess map_terms(const PlainProcess& p, const std::function<Term(const Term&)>& f);
ExtendedProcess map_terms(const ExtendedProcess& a, const std::function<Term(const Term&)>& f);

// Alpha-insensitive structural key: bound symbols are numbered by binding
// structure, free symbols keep their spelling. Two processes have equal keys
// exactly when they differ only in the choice of bound symbols.
std::string canonical_process_key(const PlainProcess& p);
std::string canonical_process_key(const ExtendedProcess& a);
// Same, with chosen spellings for selected free symbols (used to make keys
// insensitive to the spelling of outer restricted names).
std::string canonical_process_key_env(const ExtendedProcess& a,
                                      const std::map<Symbol, std::string>& free_renames);
bool alpha_equal(const ExtendedProcess& a, const ExtendedProcess& b);

std::string print_process(const PlainProcess& p);
std::string print_process(const ExtendedProcess& a);

namespace ctx {
struct Hole;
struct Proc;
struct Par;
struct Res;
}  // namespace ctx

// A process expression with holes; plugging is textual replacement.
class Context {
 public:
  using Node = std::variant<ctx::Hole, ctx::Proc, ctx::Par, ctx::Res>;

  Context();  // hole

  static Context hole();
  static Context proc(ExtendedProcess a);
  static Context par(Context left, Context right);
  static Context res(Symbol binder, Context body);

  const Node& node() const;

 private:
  explicit Context(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

namespace ctx {
struct Hole {};
struct Proc { ExtendedProcess a; };
struct Par { Context left, right; };
struct Res { Symbol binder; Context body; };
}  // namespace ctx

inline const Context::Node& Context::node() const { return *n_; }

ExtendedProcess plug(const Context& e, const ExtendedProcess& a);
bool closes(const Context& e, const ExtendedProcess& a);

}  // namespace picalc

#endif
