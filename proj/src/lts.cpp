#include "picalc/lts.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "picalc/detail/visit.hpp"
#include "picalc/errors.hpp"

namespace picalc {

using detail::overloaded;

std::string Action::pretty() const {
  switch (kind) {
    case ActKind::Input: return lhs.print() + "(" + rhs.print() + ")";
    case ActKind::Output: return lhs.print() + "<" + rhs.print() + ">";
    case ActKind::EqTest: return "[" + lhs.print() + " = " + rhs.print() + "]";
    case ActKind::NeqTest: return "[" + lhs.print() + " != " + rhs.print() + "]";
  }
  return "?";
}

std::string Action::key() const {
  const char* tag = "";
  switch (kind) {
    case ActKind::Input: tag = "in"; break;
    case ActKind::Output: tag = "out"; break;
    case ActKind::EqTest: tag = "eq"; break;
    case ActKind::NeqTest: tag = "neq"; break;
  }
  return std::string(tag) + "|" + lhs.key() + "|" + rhs.key();
}

Action co_action(const Action& alpha) {
  switch (alpha.kind) {
    case ActKind::Input: return Action{ActKind::Output, alpha.lhs, alpha.rhs};
    case ActKind::Output: return Action{ActKind::Input, alpha.lhs, alpha.rhs};
    default: throw InternalAction("co-action is defined for external actions only");
  }
}

SymbolSet action_vars(const Action& alpha) {
  SymbolSet out = variables_of(alpha.lhs);
  for (const Symbol& s : variables_of(alpha.rhs)) out.insert(s);
  return out;
}

SymbolSet action_symbols(const Action& alpha) {
  SymbolSet out = symbols_of(alpha.lhs);
  for (const Symbol& s : symbols_of(alpha.rhs)) out.insert(s);
  return out;
}

bool actions_equal(const Action& a, const Action& b, const EquationalTheory& theory) {
  return a.kind == b.kind && terms_equal(a.lhs, b.lhs, theory) &&
         terms_equal(a.rhs, b.rhs, theory);
}

void ExplorationConfig::validate() const {
  if (max_states < 1) throw std::invalid_argument("max_states must be at least 1");
  if (recipe_depth < 0) throw std::invalid_argument("recipe_depth must be non-negative");
  if (replication_bound < 0) throw std::invalid_argument("replication_bound must be non-negative");
}

std::vector<Term> recipe_terms(const SymbolSet& dom_vars, const ExplorationConfig& cfg,
                               const Signature& sig) {
  if (cfg.explicit_recipes) {
    std::vector<Term> out;
    for (const Term& e : *cfg.explicit_recipes) {
      if (in_tm(e, dom_vars)) out.push_back(e);
    }
    return out;
  }
  std::vector<Term> pool;
  std::set<std::string> seen;
  auto push = [&](const Term& t) {
    if (pool.size() >= cfg.max_recipes) return false;
    if (seen.insert(t.key()).second) pool.push_back(t);
    return true;
  };
  for (const Symbol& v : dom_vars) push(Term::atom(v));
  for (const Symbol& s : cfg.public_atoms) push(Term::atom(s));

  std::size_t stratum_begin = 0;
  for (int d = 0; d < cfg.recipe_depth; ++d) {
    const std::size_t stratum_end = pool.size();
    if (stratum_end == 0) break;  // no atoms, no terms
    if (stratum_begin == stratum_end && d > 0) break;
    for (const auto& [fn, arity] : sig.functions()) {
      std::vector<std::size_t> idx(arity, 0);
      for (;;) {
        // At least one argument from the newest stratum keeps terms distinct
        // across iterations; simpler to allow all combinations over pool so
        // depth grows by one each round.
        std::vector<Term> args;
        args.reserve(arity);
        for (std::size_t i = 0; i < arity; ++i) args.push_back(pool[idx[i]]);
        if (!push(Term::app(fn, std::move(args)))) break;
        std::size_t k = arity;
        while (k > 0) {
          if (++idx[k - 1] < stratum_end) break;
          idx[k - 1] = 0;
          --k;
        }
        if (k == 0) break;
      }
      if (pool.size() >= cfg.max_recipes) break;
    }
    stratum_begin = stratum_end;
    if (pool.size() >= cfg.max_recipes) break;
  }
  return pool;
}

Term frame_value(const Term& recipe, const AcyclicSubstitution& frame,
                 const EquationalTheory& theory) {
  return theory.normalize(apply_substitution(recipe, frame));
}

std::vector<Term> representative_recipes(const std::vector<Term>& recipes,
                                         const AcyclicSubstitution& frame,
                                         const EquationalTheory& theory) {
  std::vector<Term> out;
  std::set<std::string> seen;
  for (const Term& e : recipes) {
    if (seen.insert(frame_value(e, frame, theory).key()).second) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transition derivation

namespace {

struct Deriv {
  Action act;
  ExtendedProcess target;
  std::optional<Symbol> fresh_var;
};

struct DeriveCtx {
  const EquationalTheory& theory;
  const ExplorationConfig& cfg;
  std::vector<Term> recipes;
  SymbolSet dom;
  SymbolSet avoid;  // symbols of the whole process, for session-fresh variables
};

Symbol next_frame_var(const DeriveCtx& c) {
  if (c.cfg.canonical_frame_vars) return canonical_frame_var(c.dom.size() + 1);
  return fresh_symbol(SymbolKind::Variable, "x", c.avoid);
}

bool act_mentions(const Action& a, const Symbol& s) {
  return contains_symbol(a.lhs, s) || contains_symbol(a.rhs, s);
}

PlainProcess freshened_copy(const PlainProcess& p) {
  const ExtendedProcess wrapped = ExtendedProcess::plain(p);
  ExtendedProcess out = freshen_binders(wrapped, all_symbols(wrapped));
  return std::get<ep::Plain>(out.node()).p;
}

// Input capabilities of a subtree: where an input prefix sits, which symbols
// restrictions along the way block, and how the subtree looks after
// receiving a given payload.
struct InputCap {
  Term chan;
  SymbolSet blocked;
  std::function<ExtendedProcess(const Term&)> after;
};

std::vector<InputCap> input_caps_pp(const PlainProcess& p, const DeriveCtx& c, int repl_budget);

std::vector<InputCap> input_caps_ep(const ExtendedProcess& a, const DeriveCtx& c, int repl_budget) {
  return std::visit(
      overloaded{
          [&](const ep::Plain& n) { return input_caps_pp(n.p, c, repl_budget); },
          [&](const ep::Par& n) {
            std::vector<InputCap> out = input_caps_ep(n.left, c, repl_budget);
            for (InputCap& ic : out) {
              auto inner = ic.after;
              ExtendedProcess right = n.right;
              ic.after = [inner, right](const Term& e) {
                return ExtendedProcess::par(inner(e), right);
              };
            }
            for (InputCap ic : input_caps_ep(n.right, c, repl_budget)) {
              auto inner = ic.after;
              ExtendedProcess left = n.left;
              ic.after = [inner, left](const Term& e) {
                return ExtendedProcess::par(left, inner(e));
              };
              out.push_back(std::move(ic));
            }
            return out;
          },
          [&](const ep::Res& n) {
            std::vector<InputCap> out = input_caps_ep(n.body, c, repl_budget);
            for (InputCap& ic : out) {
              ic.blocked.insert(n.binder);
              auto inner = ic.after;
              Symbol binder = n.binder;
              ic.after = [inner, binder](const Term& e) {
                return ExtendedProcess::res(binder, inner(e));
              };
            }
            return out;
          },
          [&](const ep::Subst&) { return std::vector<InputCap>{}; },
      },
      a.node());
}

std::vector<InputCap> input_caps_pp(const PlainProcess& p, const DeriveCtx& c, int repl_budget) {
  return std::visit(
      overloaded{
          [&](const pp::Nil&) { return std::vector<InputCap>{}; },
          [&](const pp::Par& n) {
            return input_caps_ep(ExtendedProcess::par(ExtendedProcess::plain(n.left),
                                                      ExtendedProcess::plain(n.right)),
                                 c, repl_budget);
          },
          [&](const pp::Repl& n) {
            if (repl_budget <= 0) return std::vector<InputCap>{};
            ExtendedProcess unfolded =
                ExtendedProcess::par(ExtendedProcess::plain(freshened_copy(n.body)),
                                     ExtendedProcess::plain(p));
            return input_caps_ep(unfolded, c, repl_budget - 1);
          },
          [&](const pp::NameRes& n) {
            std::vector<InputCap> out = input_caps_pp(n.body, c, repl_budget);
            for (InputCap& ic : out) {
              ic.blocked.insert(n.name);
              auto inner = ic.after;
              Symbol name = n.name;
              ic.after = [inner, name](const Term& e) {
                return ExtendedProcess::res(name, inner(e));
              };
            }
            return out;
          },
          [&](const pp::Cond&) { return std::vector<InputCap>{}; },
          [&](const pp::Input& n) {
            std::vector<InputCap> out;
            PlainProcess body = n.body;
            Symbol var = n.var;
            out.push_back(InputCap{n.chan, {}, [body, var](const Term& e) {
                                     return ExtendedProcess::plain(substitute_free(body, var, e));
                                   }});
            return out;
          },
          [&](const pp::Output&) { return std::vector<InputCap>{}; },
      },
      p.node());
}

std::vector<Deriv> derive_ep(const ExtendedProcess& a, const DeriveCtx& c, int repl_budget);

std::vector<Deriv> derive_pp(const PlainProcess& p, const DeriveCtx& c, int repl_budget) {
  return std::visit(
      overloaded{
          [&](const pp::Nil&) { return std::vector<Deriv>{}; },
          [&](const pp::Par& n) {
            return derive_ep(ExtendedProcess::par(ExtendedProcess::plain(n.left),
                                                  ExtendedProcess::plain(n.right)),
                             c, repl_budget);
          },
          [&](const pp::Repl& n) {
            if (repl_budget <= 0) return std::vector<Deriv>{};
            ExtendedProcess unfolded =
                ExtendedProcess::par(ExtendedProcess::plain(freshened_copy(n.body)),
                                     ExtendedProcess::plain(p));
            return derive_ep(unfolded, c, repl_budget - 1);
          },
          [&](const pp::NameRes& n) {
            std::vector<Deriv> out;
            for (Deriv& d : derive_pp(n.body, c, repl_budget)) {
              if (act_mentions(d.act, n.name)) continue;
              d.target = ExtendedProcess::res(n.name, d.target);
              out.push_back(std::move(d));
            }
            return out;
          },
          [&](const pp::Cond& n) {
            std::vector<Deriv> out;
            out.push_back(Deriv{Action{ActKind::EqTest, n.lhs, n.rhs},
                                ExtendedProcess::plain(n.then_branch), std::nullopt});
            out.push_back(Deriv{Action{ActKind::NeqTest, n.lhs, n.rhs},
                                ExtendedProcess::plain(n.else_branch), std::nullopt});
            return out;
          },
          [&](const pp::Input& n) {
            std::vector<Deriv> out;
            for (const Term& e : c.recipes) {
              out.push_back(Deriv{Action{ActKind::Input, n.chan, e},
                                  ExtendedProcess::plain(substitute_free(n.body, n.var, e)),
                                  std::nullopt});
            }
            return out;
          },
          [&](const pp::Output& n) {
            Symbol w = next_frame_var(c);
            Term label_msg = c.cfg.label_mode == OutputLabelMode::Alias ? Term::atom(w) : n.msg;
            ExtendedProcess target = ExtendedProcess::par(ExtendedProcess::subst(n.msg, w),
                                                          ExtendedProcess::plain(n.body));
            std::vector<Deriv> out;
            out.push_back(
                Deriv{Action{ActKind::Output, n.chan, label_msg}, std::move(target), w});
            return out;
          },
      },
      p.node());
}

std::vector<Deriv> derive_ep(const ExtendedProcess& a, const DeriveCtx& c, int repl_budget) {
  return std::visit(
      overloaded{
          [&](const ep::Plain& n) { return derive_pp(n.p, c, repl_budget); },
          [&](const ep::Par& n) {
            std::vector<Deriv> out;
            std::vector<Deriv> left = derive_ep(n.left, c, repl_budget);
            std::vector<Deriv> right = derive_ep(n.right, c, repl_budget);
            for (const Deriv& d : left) {
              out.push_back(Deriv{d.act, ExtendedProcess::par(d.target, n.right), d.fresh_var});
            }
            for (const Deriv& d : right) {
              out.push_back(Deriv{d.act, ExtendedProcess::par(n.left, d.target), d.fresh_var});
            }
            // Communication: an output on one side synchronizes with an input
            // capability on the other; the input consumes the output's label
            // message and the pair leaves an equality test behind.
            auto communicate = [&](const std::vector<Deriv>& outs,
                                   const std::vector<InputCap>& ins, bool out_left) {
              for (const Deriv& od : outs) {
                if (od.act.kind != ActKind::Output) continue;
                const Term& payload = od.act.rhs;
                for (const InputCap& ic : ins) {
                  bool blocked = false;
                  for (const Symbol& s : ic.blocked) {
                    if (contains_symbol(ic.chan, s) || contains_symbol(payload, s)) {
                      blocked = true;
                      break;
                    }
                  }
                  if (blocked) continue;
                  ExtendedProcess in_side = ic.after(payload);
                  ExtendedProcess tgt = out_left ? ExtendedProcess::par(od.target, in_side)
                                                 : ExtendedProcess::par(in_side, od.target);
                  Action act{ActKind::EqTest, Term::pair(od.act.lhs, od.act.rhs),
                             Term::pair(ic.chan, payload)};
                  out.push_back(Deriv{std::move(act), std::move(tgt), od.fresh_var});
                }
              }
            };
            communicate(left, input_caps_ep(n.right, c, repl_budget), true);
            communicate(right, input_caps_ep(n.left, c, repl_budget), false);
            return out;
          },
          [&](const ep::Res& n) {
            std::vector<Deriv> out;
            for (Deriv& d : derive_ep(n.body, c, repl_budget)) {
              if (act_mentions(d.act, n.binder)) continue;
              d.target = ExtendedProcess::res(n.binder, d.target);
              out.push_back(std::move(d));
            }
            return out;
          },
          [&](const ep::Subst&) { return std::vector<Deriv>{}; },
      },
      a.node());
}

}  // namespace

std::vector<Transition> enumerate_transitions(const ExtendedProcess& a,
                                              const EquationalTheory& theory,
                                              const ExplorationConfig& cfg) {
  cfg.validate();
  if (!check_correct(a).ok() || !is_closed_ep(a)) {
    throw PreconditionViolated("transitions are enumerated for closed correct processes");
  }
  NormalForm nf = normalize_process(a, theory);
  ExtendedProcess base = nf.reassemble();

  DeriveCtx c{theory, cfg, {}, nf.frame.domain(), all_symbols(base)};
  {
    std::vector<Term> recipes = recipe_terms(c.dom, cfg, theory.signature());
    c.recipes = cfg.dedup_recipes ? representative_recipes(recipes, nf.frame, theory) : recipes;
  }

  std::vector<Transition> out;
  std::set<std::string> seen;
  for (const Deriv& d : derive_ep(base, c, cfg.replication_bound)) {
    // Considered transitions: label variables within the source domain, the
    // transition's own extruded variable excepted in alias mode.
    SymbolSet allowed = c.dom;
    if (cfg.label_mode == OutputLabelMode::Alias && d.fresh_var) allowed.insert(*d.fresh_var);
    bool ok = true;
    for (const Symbol& v : action_vars(d.act)) {
      if (!allowed.count(v)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (!check_correct(d.target).ok()) continue;  // inference rules fire on correct EPs only
    if (!seen.insert(d.act.key() + "~" + canonical_process_key(d.target)).second) continue;
    out.push_back(Transition{a, d.act, d.target});
  }
  return out;
}

std::vector<ExtendedProcess> internal_step(const ExtendedProcess& a,
                                           const EquationalTheory& theory,
                                           const ExplorationConfig& cfg) {
  AcyclicSubstitution frame = frame_of(a, theory);
  std::vector<ExtendedProcess> out;
  for (const Transition& t : enumerate_transitions(a, theory, cfg)) {
    if (t.action.external()) continue;
    const bool holds = terms_equal(apply_substitution(t.action.lhs, frame),
                                   apply_substitution(t.action.rhs, frame), theory);
    if ((t.action.kind == ActKind::EqTest) == holds) out.push_back(t.target);
  }
  return out;
}

std::vector<ExtendedProcess> tau_closure(const ExtendedProcess& a, const EquationalTheory& theory,
                                         const ExplorationConfig& cfg) {
  std::vector<ExtendedProcess> reps;
  std::set<std::string> seen;
  std::deque<ExtendedProcess> todo;

  auto add = [&](const ExtendedProcess& p) {
    NormalForm nf = normalize_process(p, theory);
    if (!seen.insert(nf.key()).second) return;
    if (reps.size() >= static_cast<std::size_t>(cfg.max_states)) {
      throw StateBudgetExceeded("tau closure exceeded the state budget");
    }
    ExtendedProcess rep = nf.reassemble();
    reps.push_back(rep);
    todo.push_back(rep);
  };

  add(a);
  while (!todo.empty()) {
    ExtendedProcess cur = todo.front();
    todo.pop_front();
    for (const ExtendedProcess& next : internal_step(cur, theory, cfg)) add(next);
  }
  return reps;
}

std::vector<ExtendedProcess> weak_transition(const ExtendedProcess& a, const Action& alpha,
                                             const EquationalTheory& theory,
                                             const ExplorationConfig& cfg) {
  if (!alpha.external()) {
    throw InternalAction("weak transitions are defined for external actions");
  }
  std::vector<ExtendedProcess> out;
  std::set<std::string> seen;
  for (const ExtendedProcess& b : tau_closure(a, theory, cfg)) {
    for (const Transition& t : enumerate_transitions(b, theory, cfg)) {
      if (!t.action.external() || !actions_equal(t.action, alpha, theory)) continue;
      for (const ExtendedProcess& after : tau_closure(t.target, theory, cfg)) {
        NormalForm nf = normalize_process(after, theory);
        if (seen.insert(nf.key()).second) out.push_back(nf.reassemble());
      }
    }
  }
  return out;
}

SymbolSet barbs(const ExtendedProcess& a, const EquationalTheory& theory,
                const ExplorationConfig& cfg) {
  SymbolSet out;
  for (const ExtendedProcess& b : tau_closure(a, theory, cfg)) {
    for (const Transition& t : enumerate_transitions(b, theory, cfg)) {
      if (t.action.kind != ActKind::Output) continue;
      Term chan = theory.normalize(t.action.lhs);
      if (chan.is_atom() && chan.symbol().kind == SymbolKind::Name) out.insert(chan.symbol());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Materialized graphs

std::vector<int> LtsGraph::tau_reachable(int state) const {
  std::vector<int> out{state};
  std::set<int> seen{state};
  std::deque<int> todo{state};
  while (!todo.empty()) {
    int cur = todo.front();
    todo.pop_front();
    for (const Edge& e : edges) {
      if (e.src != cur || e.action.external() || !e.internal_ok) continue;
      if (seen.insert(e.dst).second) {
        out.push_back(e.dst);
        todo.push_back(e.dst);
      }
    }
  }
  return out;
}

LtsGraph explore(const ExtendedProcess& a, const EquationalTheory& theory,
                 const ExplorationConfig& cfg) {
  cfg.validate();
  LtsGraph g;
  std::map<std::string, int> index;
  std::deque<int> todo;

  auto state_id = [&](const ExtendedProcess& p) -> int {
    NormalForm nf = normalize_process(p, theory);
    auto it = index.find(nf.key());
    if (it != index.end()) return it->second;
    if (g.states.size() >= static_cast<std::size_t>(cfg.max_states)) {
      g.truncated = true;
      return -1;
    }
    int id = static_cast<int>(g.states.size());
    index.emplace(nf.key(), id);
    SymbolSet restricted(nf.names.begin(), nf.names.end());
    g.states.push_back(LtsGraph::State{nf.reassemble(), nf.key(), nf.frame, restricted});
    todo.push_back(id);
    return id;
  };

  g.root = state_id(a);
  if (g.root < 0) throw StateBudgetExceeded("state budget too small for the root state");

  while (!todo.empty()) {
    int src = todo.front();
    todo.pop_front();
    const ExtendedProcess proc = g.states[src].proc;
    const AcyclicSubstitution frame = g.states[src].frame;
    for (const Transition& t : enumerate_transitions(proc, theory, cfg)) {
      int dst = state_id(t.target);
      if (dst < 0) continue;
      bool ok = false;
      if (!t.action.external()) {
        const bool holds = terms_equal(apply_substitution(t.action.lhs, frame),
                                       apply_substitution(t.action.rhs, frame), theory);
        ok = (t.action.kind == ActKind::EqTest) == holds;
      }
      g.edges.push_back(LtsGraph::Edge{src, t.action, dst, ok});
    }
  }
  return g;
}

namespace {
std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}
}  // namespace

std::string to_dot(const LtsGraph& g) {
  std::ostringstream os;
  os << "digraph lts {\n";
  os << "  rankdir=LR;\n";
  os << "  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    os << "  s" << i << " [label=\"" << dot_escape(print_process(g.states[i].proc)) << "\"";
    if (static_cast<int>(i) == g.root) os << ", style=bold";
    os << "];\n";
  }
  for (const auto& e : g.edges) {
    os << "  s" << e.src << " -> s" << e.dst << " [label=\"" << dot_escape(e.action.pretty())
       << "\"";
    if (!e.action.external() && !e.internal_ok) os << ", style=dotted";
    os << "];\n";
  }
  if (g.truncated) os << "  truncated [shape=plaintext, label=\"(state budget reached)\"];\n";
  os << "}\n";
  return os.str();
}

std::string to_lines(const LtsGraph& g) {
  std::ostringstream os;
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    os << "state\t" << i << "\t" << print_process(g.states[i].proc) << "\n";
  }
  for (const auto& e : g.edges) {
    os << "trans\t" << e.src << "\t" << e.action.pretty() << "\t" << e.dst;
    if (!e.action.external()) os << (e.internal_ok ? "\t+" : "\t-");
    os << "\n";
  }
  if (g.truncated) os << "truncated\n";
  return os.str();
}

}  // namespace picalc
