#include "picalc/term.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

#include "picalc/errors.hpp"

namespace picalc {

struct Term::Node {
  std::optional<Symbol> atom;
  std::string fn;
  std::vector<Term> args;
};

Term Term::atom(Symbol s) {
  auto n = std::make_shared<Node>();
  n->atom = std::move(s);
  return Term(std::move(n));
}

Term Term::app(std::string fn, std::vector<Term> args) {
  if (args.empty()) throw std::invalid_argument("application needs at least one argument: " + fn);
  auto n = std::make_shared<Node>();
  n->fn = std::move(fn);
  n->args = std::move(args);
  return Term(std::move(n));
}

bool Term::is_atom() const { return n_->atom.has_value(); }
bool Term::is_app() const { return !n_->atom.has_value(); }

const Symbol& Term::symbol() const {
  assert(is_atom());
  return *n_->atom;
}

const std::string& Term::fn() const {
  assert(is_app());
  return n_->fn;
}

const std::vector<Term>& Term::args() const {
  assert(is_app());
  return n_->args;
}

bool Term::operator==(const Term& other) const {
  if (n_ == other.n_) return true;
  if (is_atom() != other.is_atom()) return false;
  if (is_atom()) return symbol() == other.symbol();
  if (fn() != other.fn() || args().size() != other.args().size()) return false;
  for (std::size_t i = 0; i < args().size(); ++i) {
    if (!(args()[i] == other.args()[i])) return false;
  }
  return true;
}

namespace {
void print_rec(const Term& e, std::ostream& os, bool keyed) {
  if (e.is_atom()) {
    os << (keyed ? e.symbol().key() : e.symbol().display());
    return;
  }
  const bool sugar = !keyed && e.fn() == "pair" && e.args().size() == 2;
  if (!sugar) os << e.fn();
  os << '(';
  for (std::size_t i = 0; i < e.args().size(); ++i) {
    if (i) os << (sugar ? ", " : ", ");
    print_rec(e.args()[i], os, keyed);
  }
  os << ')';
}
}  // namespace

std::string Term::print() const {
  std::ostringstream os;
  print_rec(*this, os, false);
  return os.str();
}

std::string Term::key() const {
  std::ostringstream os;
  print_rec(*this, os, true);
  return os.str();
}

namespace {
template <typename Pred>
void collect(const Term& e, SymbolSet& out, Pred keep) {
  if (e.is_atom()) {
    if (keep(e.symbol())) out.insert(e.symbol());
    return;
  }
  for (const auto& a : e.args()) collect(a, out, keep);
}
}  // namespace

SymbolSet variables_of(const Term& e) {
  SymbolSet out;
  collect(e, out, [](const Symbol& s) { return s.kind == SymbolKind::Variable; });
  return out;
}

SymbolSet names_of(const Term& e) {
  SymbolSet out;
  collect(e, out, [](const Symbol& s) { return s.kind == SymbolKind::Name; });
  return out;
}

SymbolSet symbols_of(const Term& e) {
  SymbolSet out;
  collect(e, out, [](const Symbol&) { return true; });
  return out;
}

bool is_closed(const Term& e) { return variables_of(e).empty(); }

bool in_tm(const Term& e, const SymbolSet& allowed) {
  SymbolSet vars = variables_of(e);
  return std::all_of(vars.begin(), vars.end(),
                     [&](const Symbol& v) { return allowed.count(v) != 0; });
}

bool contains_symbol(const Term& e, const Symbol& s) {
  if (e.is_atom()) return e.symbol() == s;
  for (const auto& a : e.args()) {
    if (contains_symbol(a, s)) return true;
  }
  return false;
}

bool well_formed(const Term& e, const Signature& sig, std::string* why) {
  if (e.is_atom()) return true;
  if (!sig.contains(e.fn())) {
    if (why) *why = "unknown function symbol: " + e.fn();
    return false;
  }
  if (sig.arity(e.fn()) != e.args().size()) {
    if (why) {
      *why = "arity mismatch for " + e.fn() + ": expected " +
             std::to_string(sig.arity(e.fn())) + ", got " + std::to_string(e.args().size());
    }
    return false;
  }
  for (const auto& a : e.args()) {
    if (!well_formed(a, sig, why)) return false;
  }
  return true;
}

Term replace_atom(const Term& e, const Symbol& x, const Term& r) {
  if (e.is_atom()) return e.symbol() == x ? r : e;
  bool changed = false;
  std::vector<Term> args;
  args.reserve(e.args().size());
  for (const auto& a : e.args()) {
    Term na = replace_atom(a, x, r);
    if (!(na == a)) changed = true;
    args.push_back(std::move(na));
  }
  return changed ? Term::app(e.fn(), std::move(args)) : e;
}

SymbolSet AcyclicSubstitution::domain() const {
  SymbolSet out;
  for (const auto& b : b_) out.insert(b.var);
  return out;
}

std::optional<Term> AcyclicSubstitution::lookup(const Symbol& var) const {
  for (const auto& b : b_) {
    if (b.var == var) return b.term;
  }
  return std::nullopt;
}

bool AcyclicSubstitution::satisfies_ordering() const {
  for (std::size_t i = 0; i < b_.size(); ++i) {
    for (std::size_t j = i; j < b_.size(); ++j) {
      if (contains_symbol(b_[j].term, b_[i].var)) return false;
    }
  }
  return true;
}

AcyclicSubstitution AcyclicSubstitution::from_ordered(std::vector<Binding> ordered) {
  AcyclicSubstitution s;
  s.b_ = std::move(ordered);
  if (!s.satisfies_ordering()) {
    throw PreconditionViolated("binding list does not satisfy the ordering condition");
  }
  return s;
}

AcyclicSubstitution check_acyclic(std::vector<Binding> bindings) {
  {
    SymbolSet seen;
    for (const auto& b : bindings) {
      if (!seen.insert(b.var).second) {
        throw PreconditionViolated("duplicate domain variable: " + b.var.display());
      }
    }
  }
  // Repeatedly pick the least variable that occurs in no remaining term; a
  // variable placed at position i must not occur in terms at positions >= i.
  std::vector<Binding> ordered;
  std::vector<Binding> remaining = std::move(bindings);
  while (!remaining.empty()) {
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      bool used = false;
      for (const auto& other : remaining) {
        if (contains_symbol(other.term, remaining[i].var)) {
          used = true;
          break;
        }
      }
      if (used) continue;
      if (!pick || remaining[i].var < remaining[*pick].var) pick = i;
    }
    if (!pick) {
      throw CyclicSubstitution("substitution set admits no acyclic ordering");
    }
    ordered.push_back(remaining[*pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(*pick));
  }
  return AcyclicSubstitution::from_ordered(std::move(ordered));
}

Term apply_substitution(const Term& e, const AcyclicSubstitution& theta) {
  Term out = e;
  for (const auto& b : theta.bindings()) out = replace_atom(out, b.var, b.term);
  return out;
}

}  // namespace picalc
