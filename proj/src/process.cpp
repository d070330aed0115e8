#include "picalc/process.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

#include "picalc/detail/visit.hpp"
#include "picalc/errors.hpp"

namespace picalc {

using detail::overloaded;

PlainProcess::PlainProcess() : n_(std::make_shared<Node>(pp::Nil{})) {}

PlainProcess PlainProcess::nil() { return PlainProcess(); }

PlainProcess PlainProcess::par(PlainProcess left, PlainProcess right) {
  return PlainProcess(std::make_shared<Node>(pp::Par{std::move(left), std::move(right)}));
}

PlainProcess PlainProcess::repl(PlainProcess body) {
  return PlainProcess(std::make_shared<Node>(pp::Repl{std::move(body)}));
}

PlainProcess PlainProcess::name_res(Symbol name, PlainProcess body) {
  if (name.kind != SymbolKind::Name) {
    throw std::invalid_argument("plain restriction binds a name, got " + name.key());
  }
  return PlainProcess(std::make_shared<Node>(pp::NameRes{std::move(name), std::move(body)}));
}

PlainProcess PlainProcess::cond(Term lhs, Term rhs, PlainProcess then_branch,
                                PlainProcess else_branch) {
  return PlainProcess(std::make_shared<Node>(
      pp::Cond{std::move(lhs), std::move(rhs), std::move(then_branch), std::move(else_branch)}));
}

PlainProcess PlainProcess::input(Term chan, Symbol var, PlainProcess body) {
  if (var.kind != SymbolKind::Variable) {
    throw std::invalid_argument("input binds a variable, got " + var.key());
  }
  if (contains_symbol(chan, var)) {
    throw std::invalid_argument("input variable " + var.display() + " occurs in its channel");
  }
  return PlainProcess(std::make_shared<Node>(pp::Input{std::move(chan), std::move(var), std::move(body)}));
}

PlainProcess PlainProcess::output(Term chan, Term msg, PlainProcess body) {
  return PlainProcess(std::make_shared<Node>(pp::Output{std::move(chan), std::move(msg), std::move(body)}));
}

ExtendedProcess::ExtendedProcess() : n_(std::make_shared<Node>(ep::Plain{PlainProcess::nil()})) {}

ExtendedProcess ExtendedProcess::plain(PlainProcess p) {
  return ExtendedProcess(std::make_shared<Node>(ep::Plain{std::move(p)}));
}

ExtendedProcess ExtendedProcess::par(ExtendedProcess left, ExtendedProcess right) {
  return ExtendedProcess(std::make_shared<Node>(ep::Par{std::move(left), std::move(right)}));
}

ExtendedProcess ExtendedProcess::res(Symbol binder, ExtendedProcess body) {
  if (binder.kind == SymbolKind::Constant) {
    throw std::invalid_argument("restriction cannot bind a constant");
  }
  return ExtendedProcess(std::make_shared<Node>(ep::Res{std::move(binder), std::move(body)}));
}

ExtendedProcess ExtendedProcess::subst(Term term, Symbol var) {
  if (var.kind != SymbolKind::Variable) {
    throw std::invalid_argument("active substitution domain must be a variable");
  }
  return ExtendedProcess(std::make_shared<Node>(ep::Subst{std::move(term), std::move(var)}));
}

// ---------------------------------------------------------------------------
// Occurrence bookkeeping

namespace {

enum class Occ { Free, All };

void collect_term(const Term& t, SymbolSet bound, Occ mode, SymbolSet& out) {
  for (const Symbol& s : symbols_of(t)) {
    if (mode == Occ::All || !bound.count(s)) out.insert(s);
  }
}

void collect_pp(const PlainProcess& p, SymbolSet bound, Occ mode, SymbolSet& out);

void collect_ep(const ExtendedProcess& a, SymbolSet bound, Occ mode, SymbolSet& out) {
  std::visit(overloaded{
                 [&](const ep::Plain& n) { collect_pp(n.p, bound, mode, out); },
                 [&](const ep::Par& n) {
                   collect_ep(n.left, bound, mode, out);
                   collect_ep(n.right, bound, mode, out);
                 },
                 [&](const ep::Res& n) {
                   if (mode == Occ::All) out.insert(n.binder);
                   SymbolSet b = bound;
                   b.insert(n.binder);
                   collect_ep(n.body, std::move(b), mode, out);
                 },
                 [&](const ep::Subst& n) {
                   collect_term(n.term, bound, mode, out);
                   if (mode == Occ::All || !bound.count(n.var)) out.insert(n.var);
                 },
             },
             a.node());
}

void collect_pp(const PlainProcess& p, SymbolSet bound, Occ mode, SymbolSet& out) {
  std::visit(overloaded{
                 [&](const pp::Nil&) {},
                 [&](const pp::Par& n) {
                   collect_pp(n.left, bound, mode, out);
                   collect_pp(n.right, bound, mode, out);
                 },
                 [&](const pp::Repl& n) { collect_pp(n.body, bound, mode, out); },
                 [&](const pp::NameRes& n) {
                   if (mode == Occ::All) out.insert(n.name);
                   SymbolSet b = bound;
                   b.insert(n.name);
                   collect_pp(n.body, std::move(b), mode, out);
                 },
                 [&](const pp::Cond& n) {
                   collect_term(n.lhs, bound, mode, out);
                   collect_term(n.rhs, bound, mode, out);
                   collect_pp(n.then_branch, bound, mode, out);
                   collect_pp(n.else_branch, bound, mode, out);
                 },
                 [&](const pp::Input& n) {
                   collect_term(n.chan, bound, mode, out);
                   if (mode == Occ::All) out.insert(n.var);
                   SymbolSet b = bound;
                   b.insert(n.var);
                   collect_pp(n.body, std::move(b), mode, out);
                 },
                 [&](const pp::Output& n) {
                   collect_term(n.chan, bound, mode, out);
                   collect_term(n.msg, bound, mode, out);
                   collect_pp(n.body, bound, mode, out);
                 },
             },
             p.node());
}

SymbolSet filter_kind(const SymbolSet& in, SymbolKind k) {
  SymbolSet out;
  for (const Symbol& s : in) {
    if (s.kind == k) out.insert(s);
  }
  return out;
}

}  // namespace

SymbolSet free_vars(const PlainProcess& p) {
  SymbolSet out;
  collect_pp(p, {}, Occ::Free, out);
  return filter_kind(out, SymbolKind::Variable);
}

SymbolSet free_vars(const ExtendedProcess& a) {
  SymbolSet out;
  collect_ep(a, {}, Occ::Free, out);
  return filter_kind(out, SymbolKind::Variable);
}

SymbolSet free_names(const PlainProcess& p) {
  SymbolSet out;
  collect_pp(p, {}, Occ::Free, out);
  return filter_kind(out, SymbolKind::Name);
}

SymbolSet free_names(const ExtendedProcess& a) {
  SymbolSet out;
  collect_ep(a, {}, Occ::Free, out);
  return filter_kind(out, SymbolKind::Name);
}

SymbolSet all_symbols(const PlainProcess& p) {
  SymbolSet out;
  collect_pp(p, {}, Occ::All, out);
  return out;
}

SymbolSet all_symbols(const ExtendedProcess& a) {
  SymbolSet out;
  collect_ep(a, {}, Occ::All, out);
  return out;
}

namespace {
// Every active substitution together with whether it sits under a restriction
// of its own variable (those do not contribute to dom).
void collect_substs(const ExtendedProcess& a, const std::string& path,
                    std::vector<std::pair<Binding, std::string>>& out) {
  std::visit(overloaded{
                 [&](const ep::Plain&) {},
                 [&](const ep::Par& n) {
                   collect_substs(n.left, path + "/par[0]", out);
                   collect_substs(n.right, path + "/par[1]", out);
                 },
                 [&](const ep::Res& n) { collect_substs(n.body, path + "/res", out); },
                 [&](const ep::Subst& n) { out.push_back({Binding{n.var, n.term}, path}); },
             },
             a.node());
}
}  // namespace

std::vector<Binding> active_substitutions(const ExtendedProcess& a) {
  std::vector<std::pair<Binding, std::string>> raw;
  collect_substs(a, "", raw);
  std::vector<Binding> out;
  out.reserve(raw.size());
  for (auto& [b, _] : raw) out.push_back(b);
  return out;
}

SymbolSet domain(const ExtendedProcess& a) {
  SymbolSet fv = free_vars(a);
  SymbolSet out;
  for (const Binding& b : active_substitutions(a)) {
    if (fv.count(b.var)) out.insert(b.var);
  }
  return out;
}

bool is_closed_ep(const ExtendedProcess& a) { return domain(a) == free_vars(a); }

// ---------------------------------------------------------------------------
// Correctness

namespace {
void check_rec(const ExtendedProcess& a, const std::string& path, CorrectnessReport& rep) {
  std::visit(overloaded{
                 [&](const ep::Plain&) {},
                 [&](const ep::Par& n) {
                   SymbolSet dl = domain(n.left);
                   SymbolSet dr = domain(n.right);
                   for (const Symbol& x : dl) {
                     if (dr.count(x)) {
                       rep.violations.push_back(
                           {"parallel components share a domain variable", path,
                            "variable " + x.display() + " is in the domain of both sides"});
                     }
                   }
                   check_rec(n.left, path + "/par[0]", rep);
                   check_rec(n.right, path + "/par[1]", rep);
                 },
                 [&](const ep::Res& n) {
                   if (n.binder.kind == SymbolKind::Variable) {
                     int count = 0;
                     for (const Binding& b : active_substitutions(n.body)) {
                       if (b.var == n.binder) ++count;
                     }
                     if (count != 1) {
                       rep.violations.push_back(
                           {"variable restriction must enclose exactly one substitution", path,
                            "nu " + n.binder.display() + " encloses " + std::to_string(count) +
                                " substitutions for its variable"});
                     }
                   }
                   check_rec(n.body, path + "/res", rep);
                 },
                 [&](const ep::Subst&) {},
             },
             a.node());
}
}  // namespace

CorrectnessReport check_correct(const ExtendedProcess& a) {
  CorrectnessReport rep;

  std::vector<std::pair<Binding, std::string>> substs;
  collect_substs(a, "", substs);

  // At most one substitution per variable, anywhere in the process.
  std::map<Symbol, int> per_var;
  for (const auto& [b, p] : substs) {
    if (++per_var[b.var] == 2) {
      rep.violations.push_back({"duplicate active substitution", p,
                                "more than one substitution for " + b.var.display()});
    }
  }

  check_rec(a, "", rep);

  // The full substitution multiset must admit an acyclic ordering.
  if (std::all_of(per_var.begin(), per_var.end(), [](const auto& kv) { return kv.second == 1; })) {
    std::vector<Binding> all;
    for (const auto& [b, p] : substs) all.push_back(b);
    try {
      check_acyclic(std::move(all));
    } catch (const CyclicSubstitution&) {
      rep.violations.push_back({"substitution set is cyclic", "",
                                "the active substitutions admit no acyclic ordering"});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Substitution over processes

namespace {

Term term_replace(const Term& t, const Symbol& var, const Term& r) {
  return replace_atom(t, var, r);
}

PlainProcess subst_pp(const PlainProcess& p, const Symbol& var, const Term& r);

// Rename a binder on the way down when it would capture symbols of r.
template <typename Rebuild>
auto avoid_capture(const Symbol& binder, const SymbolSet& incoming, Rebuild rebuild) {
  if (incoming.count(binder)) {
    SymbolSet avoid = incoming;
    Symbol fresh = fresh_symbol(binder.kind, binder.id, avoid);
    return rebuild(fresh, true);
  }
  return rebuild(binder, false);
}

PlainProcess subst_pp(const PlainProcess& p, const Symbol& var, const Term& r) {
  const SymbolSet r_syms = symbols_of(r);
  return std::visit(
      overloaded{
          [&](const pp::Nil&) { return p; },
          [&](const pp::Par& n) {
            return PlainProcess::par(subst_pp(n.left, var, r), subst_pp(n.right, var, r));
          },
          [&](const pp::Repl& n) { return PlainProcess::repl(subst_pp(n.body, var, r)); },
          [&](const pp::NameRes& n) {
            if (n.name == var) return p;  // shadowed below this binder
            return avoid_capture(n.name, r_syms, [&](const Symbol& b, bool renamed) {
              PlainProcess body = renamed ? subst_pp(n.body, n.name, Term::atom(b)) : n.body;
              return PlainProcess::name_res(b, subst_pp(body, var, r));
            });
          },
          [&](const pp::Cond& n) {
            return PlainProcess::cond(term_replace(n.lhs, var, r), term_replace(n.rhs, var, r),
                                      subst_pp(n.then_branch, var, r),
                                      subst_pp(n.else_branch, var, r));
          },
          [&](const pp::Input& n) {
            Term chan = term_replace(n.chan, var, r);
            if (n.var == var) return PlainProcess::input(chan, n.var, n.body);
            return avoid_capture(n.var, r_syms, [&](const Symbol& b, bool renamed) {
              PlainProcess body = renamed ? subst_pp(n.body, n.var, Term::atom(b)) : n.body;
              return PlainProcess::input(chan, b, subst_pp(body, var, r));
            });
          },
          [&](const pp::Output& n) {
            return PlainProcess::output(term_replace(n.chan, var, r), term_replace(n.msg, var, r),
                                        subst_pp(n.body, var, r));
          },
      },
      p.node());
}

ExtendedProcess subst_ep(const ExtendedProcess& a, const Symbol& var, const Term& r) {
  const SymbolSet r_syms = symbols_of(r);
  return std::visit(
      overloaded{
          [&](const ep::Plain& n) { return ExtendedProcess::plain(subst_pp(n.p, var, r)); },
          [&](const ep::Par& n) {
            return ExtendedProcess::par(subst_ep(n.left, var, r), subst_ep(n.right, var, r));
          },
          [&](const ep::Res& n) {
            if (n.binder == var) return a;
            return avoid_capture(n.binder, r_syms, [&](const Symbol& b, bool renamed) {
              ExtendedProcess body =
                  renamed ? subst_ep(n.body, n.binder, Term::atom(b)) : n.body;
              return ExtendedProcess::res(b, subst_ep(body, var, r));
            });
          },
          [&](const ep::Subst& n) {
            // The domain variable of an active substitution is a free
            // occurrence, but only terms can replace it; renaming it is only
            // meaningful when r is an atom of variable kind.
            Symbol dom_var = n.var;
            if (n.var == var) {
              if (!(r.is_atom() && r.symbol().kind == SymbolKind::Variable)) {
                throw PreconditionViolated(
                    "cannot replace substitution domain variable by a non-variable term");
              }
              dom_var = r.symbol();
            }
            return ExtendedProcess::subst(term_replace(n.term, var, r), dom_var);
          },
      },
      a.node());
}

}  // namespace

PlainProcess substitute_free(const PlainProcess& p, const Symbol& var, const Term& replacement) {
  return subst_pp(p, var, replacement);
}

ExtendedProcess substitute_free(const ExtendedProcess& a, const Symbol& var,
                                const Term& replacement) {
  return subst_ep(a, var, replacement);
}

ExtendedProcess apply_active(const ExtendedProcess& a, const Binding& binding) {
  ExtendedProcess out = substitute_free(a, binding.var, binding.term);
  if (!check_correct(out).ok()) {
    throw PreconditionViolated("active substitution application produced an incorrect process");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alpha renaming and binder freshening

namespace {

struct RenameEnv {
  std::map<Symbol, Symbol> map;  // active binder renames
  Term apply(const Term& t) const {
    Term out = t;
    for (const auto& [from, to] : map) out = replace_atom(out, from, Term::atom(to));
    return out;
  }
  Symbol apply(const Symbol& s) const {
    auto it = map.find(s);
    return it == map.end() ? s : it->second;
  }
};

PlainProcess freshen_pp(const PlainProcess& p, RenameEnv env, SymbolSet& used);

ExtendedProcess freshen_ep(const ExtendedProcess& a, RenameEnv env, SymbolSet& used) {
  return std::visit(
      overloaded{
          [&](const ep::Plain& n) { return ExtendedProcess::plain(freshen_pp(n.p, env, used)); },
          [&](const ep::Par& n) {
            ExtendedProcess l = freshen_ep(n.left, env, used);
            ExtendedProcess r = freshen_ep(n.right, env, used);
            return ExtendedProcess::par(std::move(l), std::move(r));
          },
          [&](const ep::Res& n) {
            Symbol target = n.binder;
            if (used.count(target)) target = fresh_symbol(target.kind, target.id, used);
            used.insert(target);
            RenameEnv inner = env;
            if (!(target == n.binder)) inner.map[n.binder] = target;
            else inner.map.erase(n.binder);
            return ExtendedProcess::res(target, freshen_ep(n.body, inner, used));
          },
          [&](const ep::Subst& n) {
            return ExtendedProcess::subst(env.apply(n.term), env.apply(n.var));
          },
      },
      a.node());
}

PlainProcess freshen_pp(const PlainProcess& p, RenameEnv env, SymbolSet& used) {
  return std::visit(
      overloaded{
          [&](const pp::Nil&) { return p; },
          [&](const pp::Par& n) {
            PlainProcess l = freshen_pp(n.left, env, used);
            PlainProcess r = freshen_pp(n.right, env, used);
            return PlainProcess::par(std::move(l), std::move(r));
          },
          [&](const pp::Repl& n) { return PlainProcess::repl(freshen_pp(n.body, env, used)); },
          [&](const pp::NameRes& n) {
            Symbol target = n.name;
            if (used.count(target)) target = fresh_symbol(target.kind, target.id, used);
            used.insert(target);
            RenameEnv inner = env;
            if (!(target == n.name)) inner.map[n.name] = target;
            else inner.map.erase(n.name);
            return PlainProcess::name_res(target, freshen_pp(n.body, inner, used));
          },
          [&](const pp::Cond& n) {
            return PlainProcess::cond(env.apply(n.lhs), env.apply(n.rhs),
                                      freshen_pp(n.then_branch, env, used),
                                      freshen_pp(n.else_branch, env, used));
          },
          [&](const pp::Input& n) {
            Term chan = env.apply(n.chan);
            Symbol target = n.var;
            if (used.count(target)) target = fresh_symbol(target.kind, target.id, used);
            used.insert(target);
            RenameEnv inner = env;
            if (!(target == n.var)) inner.map[n.var] = target;
            else inner.map.erase(n.var);
            return PlainProcess::input(std::move(chan), target, freshen_pp(n.body, inner, used));
          },
          [&](const pp::Output& n) {
            return PlainProcess::output(env.apply(n.chan), env.apply(n.msg),
                                        freshen_pp(n.body, env, used));
          },
      },
      p.node());
}

}  // namespace

ExtendedProcess freshen_binders(const ExtendedProcess& a, const SymbolSet& avoid) {
  SymbolSet used = avoid;
  return freshen_ep(a, RenameEnv{}, used);
}

namespace {

// Renames the boundness group at the end of binder_path; steps select
// children as documented in the header.
struct RenameTarget {
  const std::vector<int>& path;
  Symbol replacement;
};

PlainProcess rename_at_pp(const PlainProcess& p, const RenameTarget& t, std::size_t depth);

ExtendedProcess rename_at_ep(const ExtendedProcess& a, const RenameTarget& t, std::size_t depth) {
  const bool here = depth == t.path.size();
  return std::visit(
      overloaded{
          [&](const ep::Plain& n) -> ExtendedProcess {
            // transparent wrapper: the plain node underneath consumes the path
            return ExtendedProcess::plain(rename_at_pp(n.p, t, depth));
          },
          [&](const ep::Par& n) -> ExtendedProcess {
            if (here) throw PreconditionViolated("binder path does not end on a binder");
            int step = t.path[depth];
            if (step == 0) return ExtendedProcess::par(rename_at_ep(n.left, t, depth + 1), n.right);
            if (step == 1) return ExtendedProcess::par(n.left, rename_at_ep(n.right, t, depth + 1));
            throw PreconditionViolated("invalid path step");
          },
          [&](const ep::Res& n) -> ExtendedProcess {
            if (here) {
              ExtendedProcess body =
                  substitute_free(n.body, n.binder, Term::atom(t.replacement));
              return ExtendedProcess::res(t.replacement, std::move(body));
            }
            if (t.path[depth] != 0) throw PreconditionViolated("invalid path step");
            return ExtendedProcess::res(n.binder, rename_at_ep(n.body, t, depth + 1));
          },
          [&](const ep::Subst&) -> ExtendedProcess {
            throw PreconditionViolated("binder path does not end on a binder");
          },
      },
      a.node());
}

PlainProcess rename_at_pp(const PlainProcess& p, const RenameTarget& t, std::size_t depth) {
  const bool here = depth == t.path.size();
  return std::visit(
      overloaded{
          [&](const pp::Nil&) -> PlainProcess {
            throw PreconditionViolated("binder path does not end on a binder");
          },
          [&](const pp::Par& n) -> PlainProcess {
            if (here) throw PreconditionViolated("binder path does not end on a binder");
            int step = t.path[depth];
            if (step == 0) return PlainProcess::par(rename_at_pp(n.left, t, depth + 1), n.right);
            if (step == 1) return PlainProcess::par(n.left, rename_at_pp(n.right, t, depth + 1));
            throw PreconditionViolated("invalid path step");
          },
          [&](const pp::Repl& n) -> PlainProcess {
            if (here) throw PreconditionViolated("binder path does not end on a binder");
            if (t.path[depth] != 0) throw PreconditionViolated("invalid path step");
            return PlainProcess::repl(rename_at_pp(n.body, t, depth + 1));
          },
          [&](const pp::NameRes& n) -> PlainProcess {
            if (here) {
              PlainProcess body = substitute_free(n.body, n.name, Term::atom(t.replacement));
              return PlainProcess::name_res(t.replacement, std::move(body));
            }
            if (t.path[depth] != 0) throw PreconditionViolated("invalid path step");
            return PlainProcess::name_res(n.name, rename_at_pp(n.body, t, depth + 1));
          },
          [&](const pp::Cond& n) -> PlainProcess {
            if (here) throw PreconditionViolated("binder path does not end on a binder");
            int step = t.path[depth];
            if (step == 0) {
              return PlainProcess::cond(n.lhs, n.rhs, rename_at_pp(n.then_branch, t, depth + 1),
                                        n.else_branch);
            }
            if (step == 1) {
              return PlainProcess::cond(n.lhs, n.rhs, n.then_branch,
                                        rename_at_pp(n.else_branch, t, depth + 1));
            }
            throw PreconditionViolated("invalid path step");
          },
          [&](const pp::Input& n) -> PlainProcess {
            if (here) {
              PlainProcess body = substitute_free(n.body, n.var, Term::atom(t.replacement));
              return PlainProcess::input(n.chan, t.replacement, std::move(body));
            }
            if (t.path[depth] != 0) throw PreconditionViolated("invalid path step");
            return PlainProcess::input(n.chan, n.var, rename_at_pp(n.body, t, depth + 1));
          },
          [&](const pp::Output& n) -> PlainProcess {
            if (here) throw PreconditionViolated("binder path does not end on a binder");
            if (t.path[depth] != 0) throw PreconditionViolated("invalid path step");
            return PlainProcess::output(n.chan, n.msg, rename_at_pp(n.body, t, depth + 1));
          },
      },
      p.node());
}

}  // namespace

ExtendedProcess alpha_rename(const ExtendedProcess& a, const std::vector<int>& binder_path,
                             const Symbol& replacement) {
  if (all_symbols(a).count(replacement)) {
    throw NotFresh("replacement symbol " + replacement.display() + " occurs in the process");
  }
  return rename_at_ep(a, RenameTarget{binder_path, replacement}, 0);
}

// ---------------------------------------------------------------------------
// Term mapping

PlainProcess map_terms(const PlainProcess& p, const std::function<Term(const Term&)>& f) {
  return std::visit(
      overloaded{
          [&](const pp::Nil&) { return p; },
          [&](const pp::Par& n) {
            return PlainProcess::par(map_terms(n.left, f), map_terms(n.right, f));
          },
          [&](const pp::Repl& n) { return PlainProcess::repl(map_terms(n.body, f)); },
          [&](const pp::NameRes& n) {
            return PlainProcess::name_res(n.name, map_terms(n.body, f));
          },
          [&](const pp::Cond& n) {
            return PlainProcess::cond(f(n.lhs), f(n.rhs), map_terms(n.then_branch, f),
                                      map_terms(n.else_branch, f));
          },
          [&](const pp::Input& n) {
            return PlainProcess::input(f(n.chan), n.var, map_terms(n.body, f));
          },
          [&](const pp::Output& n) {
            return PlainProcess::output(f(n.chan), f(n.msg), map_terms(n.body, f));
          },
      },
      p.node());
}

ExtendedProcess map_terms(const ExtendedProcess& a, const std::function<Term(const Term&)>& f) {
  return std::visit(
      overloaded{
          [&](const ep::Plain& n) { return ExtendedProcess::plain(map_terms(n.p, f)); },
          [&](const ep::Par& n) {
            return ExtendedProcess::par(map_terms(n.left, f), map_terms(n.right, f));
          },
          [&](const ep::Res& n) { return ExtendedProcess::res(n.binder, map_terms(n.body, f)); },
          [&](const ep::Subst& n) { return ExtendedProcess::subst(f(n.term), n.var); },
      },
      a.node());
}

// ---------------------------------------------------------------------------
// Canonical keys (alpha-insensitive structural identity)

namespace {

struct KeyEnv {
  std::map<Symbol, std::string> names;
  int binders = 0;  // binders crossed on the path from the root

  std::string lookup(const Symbol& s) const {
    auto it = names.find(s);
    return it == names.end() ? s.key() : it->second;
  }

  KeyEnv bind(const Symbol& s) const {
    KeyEnv out = *this;
    out.names[s] = "@" + std::to_string(out.binders);
    out.binders = binders + 1;
    return out;
  }
};

std::string term_ckey(const Term& t, const KeyEnv& env) {
  if (t.is_atom()) return env.lookup(t.symbol());
  std::string out = t.fn() + "(";
  for (std::size_t i = 0; i < t.args().size(); ++i) {
    if (i) out += ",";
    out += term_ckey(t.args()[i], env);
  }
  return out + ")";
}

std::string pkey(const PlainProcess& p, const KeyEnv& env) {
  return std::visit(
      overloaded{
          [&](const pp::Nil&) -> std::string { return "0"; },
          [&](const pp::Par& n) {
            return "(" + pkey(n.left, env) + "|" + pkey(n.right, env) + ")";
          },
          [&](const pp::Repl& n) { return "!" + pkey(n.body, env); },
          [&](const pp::NameRes& n) {
            return "res-n." + pkey(n.body, env.bind(n.name));
          },
          [&](const pp::Cond& n) {
            return "if(" + term_ckey(n.lhs, env) + "," + term_ckey(n.rhs, env) + "){" +
                   pkey(n.then_branch, env) + "}{" + pkey(n.else_branch, env) + "}";
          },
          [&](const pp::Input& n) {
            return "in(" + term_ckey(n.chan, env) + ")." + pkey(n.body, env.bind(n.var));
          },
          [&](const pp::Output& n) {
            return "out(" + term_ckey(n.chan, env) + "," + term_ckey(n.msg, env) + ")." +
                   pkey(n.body, env);
          },
      },
      p.node());
}

std::string ekey(const ExtendedProcess& a, const KeyEnv& env) {
  return std::visit(
      overloaded{
          [&](const ep::Plain& n) { return pkey(n.p, env); },
          [&](const ep::Par& n) {
            return "(" + ekey(n.left, env) + "|" + ekey(n.right, env) + ")";
          },
          [&](const ep::Res& n) {
            // Key by binder kind so the plain and extended spellings of a
            // name restriction compare equal.
            const char* tag = n.binder.kind == SymbolKind::Name ? "res-n." : "res-v.";
            return tag + ekey(n.body, env.bind(n.binder));
          },
          [&](const ep::Subst& n) {
            return "{" + term_ckey(n.term, env) + "/" + env.lookup(n.var) + "}";
          },
      },
      a.node());
}

}  // namespace

std::string canonical_process_key(const PlainProcess& p) { return pkey(p, KeyEnv{}); }

std::string canonical_process_key(const ExtendedProcess& a) { return ekey(a, KeyEnv{}); }

std::string canonical_process_key_env(const ExtendedProcess& a,
                                      const std::map<Symbol, std::string>& free_renames) {
  KeyEnv env;
  env.names = free_renames;
  return ekey(a, env);
}

bool alpha_equal(const ExtendedProcess& a, const ExtendedProcess& b) {
  return canonical_process_key(a) == canonical_process_key(b);
}

// ---------------------------------------------------------------------------
// Printing (parseable concrete syntax)

namespace {

bool is_par(const PlainProcess& p) { return std::holds_alternative<pp::Par>(p.node()); }
bool is_par(const ExtendedProcess& a) {
  if (std::holds_alternative<ep::Par>(a.node())) return true;
  if (const auto* w = std::get_if<ep::Plain>(&a.node())) return is_par(w->p);
  return false;
}
bool is_cond(const PlainProcess& p) { return std::holds_alternative<pp::Cond>(p.node()); }
bool is_nil(const PlainProcess& p) { return std::holds_alternative<pp::Nil>(p.node()); }

std::string print_pp(const PlainProcess& p);

std::string tail(const PlainProcess& p) {
  if (is_par(p)) return "(" + print_pp(p) + ")";
  return print_pp(p);
}

std::string print_pp(const PlainProcess& p) {
  return std::visit(
      overloaded{
          [&](const pp::Nil&) -> std::string { return "0"; },
          [&](const pp::Par& n) {
            std::string l = is_par(n.left) ? "(" + print_pp(n.left) + ")" : print_pp(n.left);
            return l + " | " + print_pp(n.right);
          },
          [&](const pp::Repl& n) { return "!" + tail(n.body); },
          [&](const pp::NameRes& n) { return "new " + n.name.display() + "." + tail(n.body); },
          [&](const pp::Cond& n) {
            std::string thenp = (is_par(n.then_branch) || is_cond(n.then_branch))
                                    ? "(" + print_pp(n.then_branch) + ")"
                                    : print_pp(n.then_branch);
            std::string out = "if " + n.lhs.print() + " = " + n.rhs.print() + " then " + thenp;
            if (!is_nil(n.else_branch)) out += " else " + tail(n.else_branch);
            return out;
          },
          [&](const pp::Input& n) {
            return "in(" + n.chan.print() + ", " + n.var.display() + ")." + tail(n.body);
          },
          [&](const pp::Output& n) {
            return "out(" + n.chan.print() + ", " + n.msg.print() + ")." + tail(n.body);
          },
      },
      p.node());
}

std::string print_ep(const ExtendedProcess& a) {
  return std::visit(
      overloaded{
          [&](const ep::Plain& n) { return print_pp(n.p); },
          [&](const ep::Par& n) {
            std::string l = is_par(n.left) ? "(" + print_ep(n.left) + ")" : print_ep(n.left);
            return l + " | " + print_ep(n.right);
          },
          [&](const ep::Res& n) {
            const char* kw = n.binder.kind == SymbolKind::Name ? "new " : "nu ";
            std::string body = is_par(n.body) ? "(" + print_ep(n.body) + ")" : print_ep(n.body);
            return kw + n.binder.display() + "." + body;
          },
          [&](const ep::Subst& n) {
            return "{" + n.term.print() + "/" + n.var.display() + "}";
          },
      },
      a.node());
}

}  // namespace

std::string print_process(const PlainProcess& p) { return print_pp(p); }
std::string print_process(const ExtendedProcess& a) { return print_ep(a); }

// ---------------------------------------------------------------------------
// Contexts

Context::Context() : n_(std::make_shared<Node>(ctx::Hole{})) {}

Context Context::hole() { return Context(); }

Context Context::proc(ExtendedProcess a) {
  return Context(std::make_shared<Node>(ctx::Proc{std::move(a)}));
}

Context Context::par(Context left, Context right) {
  return Context(std::make_shared<Node>(ctx::Par{std::move(left), std::move(right)}));
}

Context Context::res(Symbol binder, Context body) {
  return Context(std::make_shared<Node>(ctx::Res{std::move(binder), std::move(body)}));
}

ExtendedProcess plug(const Context& e, const ExtendedProcess& a) {
  return std::visit(
      overloaded{
          [&](const ctx::Hole&) { return a; },
          [&](const ctx::Proc& n) { return n.a; },
          [&](const ctx::Par& n) {
            return ExtendedProcess::par(plug(n.left, a), plug(n.right, a));
          },
          [&](const ctx::Res& n) { return ExtendedProcess::res(n.binder, plug(n.body, a)); },
      },
      e.node());
}

bool closes(const Context& e, const ExtendedProcess& a) {
  try {
    return check_correct(plug(e, a)).ok();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace picalc
