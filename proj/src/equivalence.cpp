#include "picalc/equivalence.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "picalc/detail/visit.hpp"
#include "picalc/errors.hpp"

namespace picalc {

std::string EquivVerdict::kind_name() const {
  switch (kind) {
    case Kind::Equivalent: return "equivalent";
    case Kind::Distinguished: return "distinguished";
    case Kind::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string Evidence::describe() const {
  std::ostringstream os;
  for (const EvidenceStep& s : steps) {
    os << (s.internal ? "tau " : "") << s.action.pretty() << " ; ";
  }
  std::visit(detail::overloaded{
                 [&](const StaticFact& f) {
                   os << "frames disagree on " << f.left.print() << " = " << f.right.print();
                 },
                 [&](const DomFact&) { os << "frame domains differ"; },
                 [&](const MoveFact& f) {
                   os << (f.left_moved ? "left" : "right") << " does "
                      << (f.internal ? "internal step " : "") << f.action.pretty()
                      << " with no weak answer";
                 },
                 [&](const BarbFact& f) {
                   os << "barb " << f.name.display() << " on the "
                      << (f.left_has ? "left" : "right") << " only";
                 },
             },
             fact);
  return os.str();
}

ExplorationConfig equivalence_config(ExplorationConfig cfg) {
  cfg.canonical_frame_vars = true;
  cfg.dedup_recipes = true;
  return cfg;
}

// ---------------------------------------------------------------------------
// Shared static-equivalence core

namespace {

// Partition comparison over the recipes that actually read the frame: two
// closed recipes evaluate identically under any frame, so only recipes with
// domain variables can separate two frames, either against each other
// (grouping by value must coincide) or against a closed term (a value free
// of restricted names is itself something the environment can write down,
// so the other frame must give the recipe the very same value).
std::optional<std::pair<Term, Term>> static_witness_frames(const std::vector<Term>& recipes,
                                                           const AcyclicSubstitution& fa,
                                                           const SymbolSet& restricted_a,
                                                           const AcyclicSubstitution& fb,
                                                           const SymbolSet& restricted_b,
                                                           const EquationalTheory& theory) {
  std::map<std::string, std::pair<Term, std::string>> by_a;  // value_a -> (recipe, value_b)
  std::map<std::string, std::pair<Term, std::string>> by_b;
  for (const Term& e : recipes) {
    if (variables_of(e).empty()) continue;
    const Term va = frame_value(e, fa, theory);
    const Term vb = frame_value(e, fb, theory);
    const std::string ka = va.key();
    const std::string kb = vb.key();
    if (ka != kb) {
      bool va_public = true;
      for (const Symbol& n : names_of(va)) {
        if (restricted_a.count(n)) {
          va_public = false;
          break;
        }
      }
      if (va_public) return std::make_pair(e, va);  // e = value holds under A only
      bool vb_public = true;
      for (const Symbol& n : names_of(vb)) {
        if (restricted_b.count(n)) {
          vb_public = false;
          break;
        }
      }
      if (vb_public) return std::make_pair(e, vb);  // e = value holds under B only
    }
    auto ita = by_a.find(ka);
    if (ita == by_a.end()) {
      by_a.emplace(ka, std::make_pair(e, kb));
    } else if (ita->second.second != kb) {
      return std::make_pair(ita->second.first, e);  // equal under A, not under B
    }
    auto itb = by_b.find(kb);
    if (itb == by_b.end()) {
      by_b.emplace(kb, std::make_pair(e, ka));
    } else if (itb->second.second != ka) {
      return std::make_pair(itb->second.first, e);  // equal under B, not under A
    }
  }
  return std::nullopt;
}

struct StateInfo {
  ExtendedProcess rep;
  AcyclicSubstitution frame;
  SymbolSet dom;
  SymbolSet restricted;
  std::string key;
};

// Memoizing wrapper around normalization, transition enumeration and the
// weak-transition machinery, shared by the checker and its helpers. States
// are interned and addressed by dense integer ids.
class Engine {
 public:
  struct ExternalMove {
    Action action;
    std::string norm_key;  // action with normalized terms, for matching
    int target;
  };

  Engine(const EquationalTheory& theory, const ExplorationConfig& cfg)
      : theory_(theory), cfg_(cfg) {}

  const EquationalTheory& theory() const { return theory_; }
  const ExplorationConfig& cfg() const { return cfg_; }

  int state(const ExtendedProcess& p) {
    NormalForm nf = normalize_process(p, theory_);
    auto it = index_.find(nf.key());
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(states_.size());
    index_.emplace(nf.key(), id);
    states_.push_back(StateInfo{nf.reassemble(), nf.frame, nf.frame.domain(),
                                SymbolSet(nf.names.begin(), nf.names.end()), nf.key()});
    return id;
  }

  const StateInfo& info(int id) const { return states_[static_cast<std::size_t>(id)]; }

  std::string norm_action_key(const Action& a) {
    return Action{a.kind, theory_.normalize(a.lhs), theory_.normalize(a.rhs)}.key();
  }

  // Recipes per frame domain, enumerated once.
  const std::vector<Term>& recipes_for(const SymbolSet& dom, bool* truncated) {
    std::string key;
    for (const Symbol& s : dom) key += s.key() + ";";
    auto it = recipes_.find(key);
    if (it == recipes_.end()) {
      std::vector<Term> r = recipe_terms(dom, cfg_, theory_.signature());
      const bool trunc = r.size() >= cfg_.max_recipes;
      it = recipes_.emplace(key, RecipeMemo{std::move(r), trunc}).first;
    }
    if (truncated) *truncated = it->second.truncated;
    return it->second.recipes;
  }

  const std::vector<ExternalMove>& external_moves(int id) {
    auto it = external_.find(id);
    if (it != external_.end()) return it->second;
    ensure_moves(id);
    return external_.at(id);
  }

  // Successful internal steps as (test action, target id).
  const std::vector<std::pair<Action, int>>& internal_succs(int id) {
    auto it = internal_.find(id);
    if (it != internal_.end()) return it->second;
    ensure_moves(id);
    return internal_.at(id);
  }

  // Reflexive-transitive closure of internal steps.
  const std::vector<int>& tau_set(int id) {
    auto it = tau_.find(id);
    if (it != tau_.end()) return it->second;
    std::vector<int> out{id};
    std::set<int> seen{id};
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out.size() > static_cast<std::size_t>(cfg_.max_states)) {
        throw StateBudgetExceeded("tau closure exceeded the state budget");
      }
      for (const auto& [act, next] : internal_succs(out[i])) {
        if (seen.insert(next).second) out.push_back(next);
      }
    }
    return tau_.emplace(id, std::move(out)).first->second;
  }

  const std::vector<int>& weak_set(int id, const Action& alpha) {
    return weak_set_by_key(id, norm_action_key(alpha));
  }

  const std::vector<int>& weak_set_by_key(int id, const std::string& norm_key) {
    auto it = weak_.find({id, norm_key});
    if (it != weak_.end()) return it->second;
    std::vector<int> out;
    std::set<int> seen;
    for (int b : tau_set(id)) {
      for (const ExternalMove& m : external_moves(b)) {
        if (m.norm_key != norm_key) continue;
        for (int c : tau_set(m.target)) {
          if (seen.insert(c).second) out.push_back(c);
        }
      }
    }
    return weak_.emplace(std::make_pair(id, norm_key), std::move(out)).first->second;
  }

  // nullopt = statically equivalent on the enumerated recipes.
  std::optional<std::pair<Term, Term>> static_witness(int a, int b, bool* truncated) {
    auto it = static_.find({a, b});
    if (it != static_.end()) {
      if (truncated) *truncated = it->second.truncated;
      return it->second.witness;
    }
    bool trunc = false;
    const StateInfo& sa = info(a);
    const StateInfo& sb = info(b);
    const std::vector<Term>& recipes = recipes_for(sa.dom, &trunc);
    auto w =
        static_witness_frames(recipes, sa.frame, sa.restricted, sb.frame, sb.restricted, theory_);
    static_.emplace(std::make_pair(a, b), StaticMemo{w, trunc});
    if (truncated) *truncated = trunc;
    return w;
  }

 private:
  void ensure_moves(int id) {
    std::vector<ExternalMove> ext;
    std::vector<std::pair<Action, int>> internal;
    // copy: enumerate/state() may grow the state vector
    const ExtendedProcess rep = info(id).rep;
    const AcyclicSubstitution frame = info(id).frame;
    for (const Transition& t : enumerate_transitions(rep, theory_, cfg_)) {
      if (t.action.external()) {
        ext.push_back(ExternalMove{t.action, norm_action_key(t.action), state(t.target)});
      } else {
        const bool holds = terms_equal(apply_substitution(t.action.lhs, frame),
                                       apply_substitution(t.action.rhs, frame), theory_);
        if ((t.action.kind == ActKind::EqTest) == holds) {
          internal.emplace_back(t.action, state(t.target));
        }
      }
    }
    external_.emplace(id, std::move(ext));
    internal_.emplace(id, std::move(internal));
  }

  struct StaticMemo {
    std::optional<std::pair<Term, Term>> witness;
    bool truncated = false;
  };
  struct RecipeMemo {
    std::vector<Term> recipes;
    bool truncated = false;
  };

  const EquationalTheory& theory_;
  ExplorationConfig cfg_;
  std::deque<StateInfo> states_;  // stable references as states are interned
  std::map<std::string, int> index_;
  std::map<int, std::vector<ExternalMove>> external_;
  std::map<int, std::vector<std::pair<Action, int>>> internal_;
  std::map<int, std::vector<int>> tau_;
  std::map<std::pair<int, std::string>, std::vector<int>> weak_;
  std::map<std::pair<int, int>, StaticMemo> static_;
  std::map<std::string, RecipeMemo> recipes_;
};

}  // namespace

// ---------------------------------------------------------------------------
// static_equivalent / barb_equivalent

EquivVerdict static_equivalent(const ExtendedProcess& a, const ExtendedProcess& b,
                               const EquationalTheory& theory, const ExplorationConfig& cfg) {
  cfg.validate();
  if (domain(a) != domain(b)) {
    throw DomainMismatch("static equivalence requires equal frame domains");
  }
  NormalForm na = normalize_process(a, theory);
  NormalForm nb = normalize_process(b, theory);
  std::vector<Term> recipes = recipe_terms(na.frame.domain(), cfg, theory.signature());
  const bool truncated = recipes.size() >= cfg.max_recipes;
  auto w = static_witness_frames(recipes, na.frame, SymbolSet(na.names.begin(), na.names.end()),
                                 nb.frame, SymbolSet(nb.names.begin(), nb.names.end()), theory);
  EquivVerdict v;
  if (w) {
    v.kind = EquivVerdict::Kind::Distinguished;
    v.evidence = Evidence{{}, StaticFact{w->first, w->second}};
  } else if (truncated) {
    v.kind = EquivVerdict::Kind::Inconclusive;
    v.note = "recipe enumeration truncated at max_recipes";
  } else {
    v.kind = EquivVerdict::Kind::Equivalent;
    v.witness = {{a, b}, {b, a}};
  }
  return v;
}

EquivVerdict barb_equivalent(const ExtendedProcess& a, const ExtendedProcess& b,
                             const EquationalTheory& theory, const ExplorationConfig& cfg) {
  EquivVerdict v;
  SymbolSet ba, bb;
  try {
    ba = barbs(a, theory, cfg);
    bb = barbs(b, theory, cfg);
  } catch (const StateBudgetExceeded& e) {
    v.kind = EquivVerdict::Kind::Inconclusive;
    v.note = e.what();
    return v;
  }
  for (const Symbol& n : ba) {
    if (!bb.count(n)) {
      v.kind = EquivVerdict::Kind::Distinguished;
      v.evidence = Evidence{{}, BarbFact{n, true}};
      return v;
    }
  }
  for (const Symbol& n : bb) {
    if (!ba.count(n)) {
      v.kind = EquivVerdict::Kind::Distinguished;
      v.evidence = Evidence{{}, BarbFact{n, false}};
      return v;
    }
  }
  v.kind = EquivVerdict::Kind::Equivalent;
  v.witness = {{a, b}, {b, a}};
  return v;
}

// ---------------------------------------------------------------------------
// On-the-fly weak labeled bisimilarity

namespace {

struct FailInfo {
  int discovery = 0;
  enum class Why { Dom, Static, Move } why = Why::Move;
  bool left_moved = true;
  bool internal = false;
  Action action;
  int mover_target = -1;
  Term w_left, w_right;  // Static only
};

class BisimChecker {
 public:
  BisimChecker(const EquationalTheory& theory, const ExplorationConfig& cfg)
      : eng_(theory, equivalence_config(cfg)) {}

  EquivVerdict check(const ExtendedProcess& a, const ExtendedProcess& b) {
    if (!check_correct(a).ok() || !check_correct(b).ok() || !is_closed_ep(a) || !is_closed_ep(b)) {
      throw PreconditionViolated("bisimilarity is checked on closed correct processes");
    }
    const int sa = eng_.state(a);
    const int sb = eng_.state(b);
    if (eng_.info(sa).dom != eng_.info(sb).dom) {
      throw DomainMismatch("bisimilarity requires equal frame domains");
    }

    bool ok = false;
    for (;;) {
      assumed_.clear();
      new_failures_ = 0;
      ok = verify(sa, sb, 0);
      if (new_failures_ == 0) break;
    }

    EquivVerdict v;
    if (ok) {
      if (budget_hit_) {
        v.kind = EquivVerdict::Kind::Inconclusive;
        v.note = "state budget reached before the relation stabilized";
      } else {
        v.kind = EquivVerdict::Kind::Equivalent;
        for (const auto& [l, r] : assumed_) {
          v.witness.emplace_back(eng_.info(l).rep, eng_.info(r).rep);
          v.witness.emplace_back(eng_.info(r).rep, eng_.info(l).rep);
        }
      }
    } else {
      v.kind = EquivVerdict::Kind::Distinguished;
      v.evidence = build_evidence({sa, sb});
    }
    return v;
  }

 private:
  using Pair = std::pair<int, int>;

  bool verify(int l, int r, int depth) {
    const Pair key{l, r};
    if (failed_.count(key)) return false;
    if (assumed_.count(key)) return true;
    if (static_cast<int>(seen_.size()) > eng_.cfg().max_states || depth > 2000) {
      // over budget: optimistically treat unexplored pairs as related
      budget_hit_ = true;
      assumed_.insert(key);
      return true;
    }
    seen_.insert(key);
    assumed_.insert(key);
    FailInfo fi;
    if (conditions(l, r, depth, fi)) return true;
    assumed_.erase(key);
    fi.discovery = ++discovery_counter_;
    failed_.emplace(key, fi);
    ++new_failures_;
    return false;
  }

  // Try the mirror of the mover's target first: for equal or nearly equal
  // processes this closes pairs without search.
  template <typename Verify>
  static bool match_candidates(const std::vector<int>& candidates, int preferred, Verify v) {
    if (std::find(candidates.begin(), candidates.end(), preferred) != candidates.end()) {
      if (v(preferred)) return true;
    }
    for (int cand : candidates) {
      if (cand == preferred) continue;
      if (v(cand)) return true;
    }
    return false;
  }

  bool conditions(int l, int r, int depth, FailInfo& fi) {
    if (eng_.info(l).dom != eng_.info(r).dom) {
      fi.why = FailInfo::Why::Dom;
      return false;
    }
    bool trunc = false;
    if (auto w = eng_.static_witness(l, r, &trunc)) {
      fi.why = FailInfo::Why::Static;
      fi.w_left = w->first;
      fi.w_right = w->second;
      return false;
    }
    if (trunc) budget_hit_ = true;

    for (int side = 0; side < 2; ++side) {
      const bool left_moves = side == 0;
      const int mover = left_moves ? l : r;
      const int resp = left_moves ? r : l;

      // Internal steps answered by internal sequences.
      const std::vector<int>* resp_tau = nullptr;
      try {
        resp_tau = &eng_.tau_set(resp);
      } catch (const StateBudgetExceeded&) {
        budget_hit_ = true;
      }
      for (const auto& [act, target] : eng_.internal_succs(mover)) {
        if (!resp_tau) break;  // cannot enumerate answers; stay optimistic
        const bool matched = match_candidates(*resp_tau, target, [&](int cand) {
          return left_moves ? verify(target, cand, depth + 1) : verify(cand, target, depth + 1);
        });
        if (!matched) {
          fi.why = FailInfo::Why::Move;
          fi.left_moved = left_moves;
          fi.internal = true;
          fi.action = act;
          fi.mover_target = target;
          return false;
        }
      }

      // External actions answered weakly.
      for (const Engine::ExternalMove& m : eng_.external_moves(mover)) {
        const std::vector<int>* answers = nullptr;
        try {
          answers = &eng_.weak_set_by_key(resp, m.norm_key);
        } catch (const StateBudgetExceeded&) {
          budget_hit_ = true;
        }
        if (!answers) continue;
        const bool matched = match_candidates(*answers, m.target, [&](int cand) {
          return left_moves ? verify(m.target, cand, depth + 1)
                            : verify(cand, m.target, depth + 1);
        });
        if (!matched) {
          fi.why = FailInfo::Why::Move;
          fi.left_moved = left_moves;
          fi.internal = false;
          fi.action = m.action;
          fi.mover_target = m.target;
          return false;
        }
      }
    }
    return true;
  }

  Evidence build_evidence(Pair root) {
    Evidence ev;
    Pair cur = root;
    for (;;) {
      const FailInfo& fi = failed_.at(cur);
      if (fi.why == FailInfo::Why::Dom) {
        ev.fact = DomFact{};
        return ev;
      }
      if (fi.why == FailInfo::Why::Static) {
        ev.fact = StaticFact{fi.w_left, fi.w_right};
        return ev;
      }
      const int resp = fi.left_moved ? cur.second : cur.first;
      std::vector<int> answers;
      try {
        answers = fi.internal ? eng_.tau_set(resp) : eng_.weak_set(resp, fi.action);
      } catch (const StateBudgetExceeded&) {
        answers.clear();
      }
      std::optional<Pair> best;
      int best_disc = 0;
      for (int cand : answers) {
        const Pair k = fi.left_moved ? Pair{fi.mover_target, cand} : Pair{cand, fi.mover_target};
        auto it = failed_.find(k);
        if (it == failed_.end()) continue;
        if (!best || it->second.discovery < best_disc) {
          best = k;
          best_disc = it->second.discovery;
        }
      }
      if (!best) {
        // The move has no weak answer at all: the trace ends here.
        ev.fact = MoveFact{fi.left_moved, fi.internal, fi.action};
        return ev;
      }
      ev.steps.push_back(EvidenceStep{fi.internal, fi.action, eng_.info(best->first).rep,
                                      eng_.info(best->second).rep});
      cur = *best;
    }
  }

  Engine eng_;
  std::map<Pair, FailInfo> failed_;
  std::set<Pair> assumed_;
  std::set<Pair> seen_;
  bool budget_hit_ = false;
  int discovery_counter_ = 0;
  int new_failures_ = 0;
};

}  // namespace

EquivVerdict weak_labeled_bisim(const ExtendedProcess& a, const ExtendedProcess& b,
                                const EquationalTheory& theory, const ExplorationConfig& cfg) {
  cfg.validate();
  BisimChecker checker(theory, cfg);
  return checker.check(a, b);
}

// ---------------------------------------------------------------------------
// Probes and contexts

ProbeSpec ProbeSpec::test(Term e1, Term e2, Symbol a) {
  return ProbeSpec{Kind::Test, std::move(e1), std::move(e2), std::move(a)};
}
ProbeSpec ProbeSpec::input(Term chan, Term msg, Symbol a) {
  return ProbeSpec{Kind::Input, std::move(chan), std::move(msg), std::move(a)};
}
ProbeSpec ProbeSpec::output(Term chan, Term msg, Symbol a) {
  return ProbeSpec{Kind::Output, std::move(chan), std::move(msg), std::move(a)};
}

ExtendedProcess build_probe(const ProbeSpec& spec, const ExtendedProcess& target) {
  if (spec.signal.kind != SymbolKind::Name) {
    throw std::invalid_argument("probe signal must be a name");
  }
  if (all_symbols(target).count(spec.signal)) {
    throw NotFresh("probe signal " + spec.signal.display() + " occurs in the probed process");
  }
  const Term zero = Term::atom(const_sym("0"));
  const Term sig = Term::atom(spec.signal);
  SymbolSet avoid = all_symbols(target);
  for (const Symbol& s : symbols_of(spec.first)) avoid.insert(s);
  for (const Symbol& s : symbols_of(spec.second)) avoid.insert(s);
  avoid.insert(spec.signal);

  switch (spec.kind) {
    case ProbeSpec::Kind::Test: {
      PlainProcess probe =
          PlainProcess::cond(spec.first, spec.second,
                             PlainProcess::output(sig, zero, PlainProcess::nil()),
                             PlainProcess::nil());
      return ExtendedProcess::par(target, ExtendedProcess::plain(probe));
    }
    case ProbeSpec::Kind::Input: {
      Symbol x = fresh_symbol(SymbolKind::Variable, "x", avoid);
      PlainProcess p1 = PlainProcess::output(
          spec.first, spec.second, PlainProcess::input(sig, x, PlainProcess::nil()));
      PlainProcess p2 = PlainProcess::output(sig, zero, PlainProcess::nil());
      return ExtendedProcess::par(
          target, ExtendedProcess::par(ExtendedProcess::plain(p1), ExtendedProcess::plain(p2)));
    }
    case ProbeSpec::Kind::Output: {
      Symbol x = fresh_symbol(SymbolKind::Variable, "x", avoid);
      avoid.insert(x);
      Symbol y = fresh_symbol(SymbolKind::Variable, "y", avoid);
      PlainProcess inner =
          PlainProcess::cond(Term::atom(x), spec.second,
                             PlainProcess::input(sig, y, PlainProcess::nil()),
                             PlainProcess::nil());
      PlainProcess p1 = PlainProcess::input(spec.first, x, inner);
      PlainProcess p2 = PlainProcess::output(sig, zero, PlainProcess::nil());
      return ExtendedProcess::par(
          target, ExtendedProcess::par(ExtendedProcess::plain(p1), ExtendedProcess::plain(p2)));
    }
  }
  throw std::logic_error("unreachable");
}

ExtendedProcess ContextInstance::apply(const ExtendedProcess& a) const {
  ExtendedProcess out = ExtendedProcess::par(a, par_with);
  for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
    out = ExtendedProcess::res(*it, out);
  }
  return out;
}

EquivVerdict context_closure_check(const ExtendedProcess& a, const ExtendedProcess& b,
                                   const std::vector<ContextInstance>& contexts,
                                   const EquationalTheory& theory, const ExplorationConfig& cfg) {
  bool any_inconclusive = false;
  std::string note;
  EquivVerdict out;
  for (const ContextInstance& c : contexts) {
    ExtendedProcess ea = c.apply(a);
    ExtendedProcess eb = c.apply(b);
    if (!check_correct(ea).ok() || !check_correct(eb).ok() || !is_closed_ep(ea) ||
        !is_closed_ep(eb)) {
      throw PreconditionViolated("context does not close the processes: " + c.label);
    }
    EquivVerdict v = weak_labeled_bisim(ea, eb, theory, cfg);
    if (v.distinguished()) {
      v.note = "distinguished under context " + c.label;
      return v;
    }
    if (v.inconclusive()) {
      any_inconclusive = true;
      note = "inconclusive under context " + c.label;
    }
    out.witness.emplace_back(ea, eb);
  }
  if (any_inconclusive) {
    out.kind = EquivVerdict::Kind::Inconclusive;
    out.note = note;
    out.witness.clear();
  } else {
    out.kind = EquivVerdict::Kind::Equivalent;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Naive oracle over materialized graphs

namespace {

struct DeletionInfo {
  int ts = 0;
  FailInfo::Why why = FailInfo::Why::Move;
  bool left_moved = true;
  bool internal = false;
  Action action;
  int mover_target = -1;
  Term w_left, w_right;
};

Action normalize_action(const Action& a, const EquationalTheory& theory) {
  return Action{a.kind, theory.normalize(a.lhs), theory.normalize(a.rhs)};
}

struct GraphView {
  const LtsGraph& g;
  std::vector<std::vector<int>> tau;                     // per state
  std::vector<std::vector<std::pair<Action, int>>> internal;  // successful tests
  std::vector<std::vector<std::pair<Action, int>>> external;  // normalized labels

  explicit GraphView(const LtsGraph& graph, const EquationalTheory& theory) : g(graph) {
    tau.resize(g.states.size());
    internal.resize(g.states.size());
    external.resize(g.states.size());
    for (std::size_t i = 0; i < g.states.size(); ++i) {
      tau[i] = g.tau_reachable(static_cast<int>(i));
    }
    for (const auto& e : g.edges) {
      if (e.action.external()) {
        external[e.src].emplace_back(normalize_action(e.action, theory), e.dst);
      } else if (e.internal_ok) {
        internal[e.src].emplace_back(e.action, e.dst);
      }
    }
  }

  std::vector<int> weak(int s, const Action& norm_alpha) const {
    std::vector<int> out;
    std::set<int> seen;
    for (int b : tau[s]) {
      for (const auto& [act, dst] : external[b]) {
        if (act.key() != norm_alpha.key()) continue;
        for (int c : tau[dst]) {
          if (seen.insert(c).second) out.push_back(c);
        }
      }
    }
    return out;
  }
};

}  // namespace

EquivVerdict naive_bisim_oracle(const LtsGraph& lts_a, const LtsGraph& lts_b,
                                const EquationalTheory& theory, const ExplorationConfig& cfg) {
  EquivVerdict v;
  if (lts_a.truncated || lts_b.truncated) {
    v.kind = EquivVerdict::Kind::Inconclusive;
    v.note = "state space was truncated before the oracle ran";
    return v;
  }
  if (lts_a.states[lts_a.root].frame.domain() != lts_b.states[lts_b.root].frame.domain()) {
    throw DomainMismatch("bisimilarity requires equal frame domains");
  }

  GraphView va(lts_a, theory);
  GraphView vb(lts_b, theory);
  const int na = static_cast<int>(lts_a.states.size());
  const int nb = static_cast<int>(lts_b.states.size());

  std::vector<std::vector<char>> alive(na, std::vector<char>(nb, 0));
  std::map<std::pair<int, int>, DeletionInfo> dead;
  bool recipes_truncated = false;

  std::map<std::string, std::vector<Term>> recipe_cache;
  auto recipes_for = [&](const SymbolSet& dom) -> const std::vector<Term>& {
    std::string key;
    for (const Symbol& s : dom) key += s.key() + ";";
    auto it = recipe_cache.find(key);
    if (it == recipe_cache.end()) {
      std::vector<Term> r = recipe_terms(dom, cfg, theory.signature());
      recipes_truncated = recipes_truncated || r.size() >= cfg.max_recipes;
      it = recipe_cache.emplace(key, std::move(r)).first;
    }
    return it->second;
  };

  // Start from all domain-compatible, statically equivalent pairs.
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      const auto& sa = lts_a.states[i];
      const auto& sb = lts_b.states[j];
      if (sa.frame.domain() != sb.frame.domain()) {
        dead[{i, j}] = DeletionInfo{0, FailInfo::Why::Dom, true, false, Action{}, -1, {}, {}};
        continue;
      }
      auto w = static_witness_frames(recipes_for(sa.frame.domain()), sa.frame, sa.restricted,
                                     sb.frame, sb.restricted, theory);
      if (w) {
        dead[{i, j}] = DeletionInfo{0, FailInfo::Why::Static, true, false, Action{}, -1,
                                    w->first, w->second};
      } else {
        alive[i][j] = 1;
      }
    }
  }

  // Delete pairs violating the matching conditions until stable.
  int ts = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < na; ++i) {
      for (int j = 0; j < nb; ++j) {
        if (!alive[i][j]) continue;
        std::optional<DeletionInfo> kill;

        auto check_side = [&](bool left_moves) {
          const GraphView& mv = left_moves ? va : vb;
          const GraphView& rv = left_moves ? vb : va;
          const int m = left_moves ? i : j;
          const int r = left_moves ? j : i;
          for (const auto& [act, mt] : mv.internal[m]) {
            bool matched = false;
            for (int cand : rv.tau[r]) {
              const bool ok = left_moves ? alive[mt][cand] : alive[cand][mt];
              if (ok) {
                matched = true;
                break;
              }
            }
            if (!matched) {
              kill = DeletionInfo{++ts, FailInfo::Why::Move, left_moves, true, act, mt, {}, {}};
              return;
            }
          }
          for (const auto& [act, mt] : mv.external[m]) {
            bool matched = false;
            for (int cand : rv.weak(r, act)) {
              const bool ok = left_moves ? alive[mt][cand] : alive[cand][mt];
              if (ok) {
                matched = true;
                break;
              }
            }
            if (!matched) {
              kill = DeletionInfo{++ts, FailInfo::Why::Move, left_moves, false, act, mt, {}, {}};
              return;
            }
          }
        };

        check_side(true);
        if (!kill) check_side(false);
        if (kill) {
          alive[i][j] = 0;
          dead[{i, j}] = *kill;
          changed = true;
        }
      }
    }
  }

  if (alive[lts_a.root][lts_b.root]) {
    if (recipes_truncated) {
      v.kind = EquivVerdict::Kind::Inconclusive;
      v.note = "recipe enumeration truncated at max_recipes";
      return v;
    }
    v.kind = EquivVerdict::Kind::Equivalent;
    for (int i = 0; i < na; ++i) {
      for (int j = 0; j < nb; ++j) {
        if (alive[i][j]) {
          v.witness.emplace_back(lts_a.states[i].proc, lts_b.states[j].proc);
          v.witness.emplace_back(lts_b.states[j].proc, lts_a.states[i].proc);
        }
      }
    }
    return v;
  }

  // Rebuild a distinguishing trace from the deletion reasons.
  Evidence ev;
  std::pair<int, int> cur{lts_a.root, lts_b.root};
  for (;;) {
    const DeletionInfo& info = dead.at(cur);
    if (info.why == FailInfo::Why::Dom) {
      ev.fact = DomFact{};
      break;
    }
    if (info.why == FailInfo::Why::Static) {
      ev.fact = StaticFact{info.w_left, info.w_right};
      break;
    }
    const GraphView& rv = info.left_moved ? vb : va;
    const int r = info.left_moved ? cur.second : cur.first;
    std::vector<int> answers = info.internal ? rv.tau[r] : rv.weak(r, info.action);
    std::optional<std::pair<int, int>> best;
    int best_ts = 0;
    for (int cand : answers) {
      std::pair<int, int> k = info.left_moved ? std::make_pair(info.mover_target, cand)
                                              : std::make_pair(cand, info.mover_target);
      auto it = dead.find(k);
      if (it == dead.end()) continue;
      if (!best || it->second.ts < best_ts) {
        best = k;
        best_ts = it->second.ts;
      }
    }
    if (!best) {
      ev.fact = MoveFact{info.left_moved, info.internal, info.action};
      break;
    }
    ev.steps.push_back(EvidenceStep{info.internal, info.action,
                                    lts_a.states[best->first].proc,
                                    lts_b.states[best->second].proc});
    cur = *best;
  }
  v.kind = EquivVerdict::Kind::Distinguished;
  v.evidence = std::move(ev);
  return v;
}

// ---------------------------------------------------------------------------
// Probe families and trace-derived contexts

std::vector<ContextInstance> probe_context_family(const ExtendedProcess& a,
                                                  const ExtendedProcess& b,
                                                  const EquationalTheory& theory,
                                                  const ExplorationConfig& cfg,
                                                  std::size_t per_schema) {
  SymbolSet avoid = all_symbols(a);
  for (const Symbol& s : all_symbols(b)) avoid.insert(s);

  ExplorationConfig shallow = cfg;
  shallow.recipe_depth = std::min(cfg.recipe_depth, 1);
  std::vector<Term> recipes = recipe_terms(domain(a), shallow, theory.signature());

  std::vector<Symbol> channels;
  for (const Symbol& s : cfg.public_atoms) {
    if (s.kind == SymbolKind::Name) channels.push_back(s);
  }

  const Term zero = Term::atom(const_sym("0"));
  std::vector<ContextInstance> out;

  // Equality-test probes over recipe pairs.
  std::size_t count = 0;
  for (std::size_t i = 0; i < recipes.size() && count < per_schema; ++i) {
    for (std::size_t j = i + 1; j < recipes.size() && count < per_schema; ++j) {
      Symbol sig = fresh_symbol(SymbolKind::Name, "a", avoid);
      avoid.insert(sig);
      PlainProcess probe = PlainProcess::cond(
          recipes[i], recipes[j], PlainProcess::output(Term::atom(sig), zero, PlainProcess::nil()),
          PlainProcess::nil());
      out.push_back(ContextInstance{{}, ExtendedProcess::plain(probe),
                                    "test-probe(" + recipes[i].print() + "," +
                                        recipes[j].print() + ")"});
      ++count;
    }
  }

  // Input and output probes over public channels and shallow recipes.
  for (const Symbol& chan : channels) {
    for (std::size_t i = 0; i < recipes.size() && i < per_schema; ++i) {
      {
        Symbol sig = fresh_symbol(SymbolKind::Name, "a", avoid);
        avoid.insert(sig);
        Symbol x = fresh_symbol(SymbolKind::Variable, "x", avoid);
        avoid.insert(x);
        PlainProcess p1 = PlainProcess::output(
            Term::atom(chan), recipes[i],
            PlainProcess::input(Term::atom(sig), x, PlainProcess::nil()));
        PlainProcess p2 = PlainProcess::output(Term::atom(sig), zero, PlainProcess::nil());
        out.push_back(ContextInstance{
            {},
            ExtendedProcess::par(ExtendedProcess::plain(p1), ExtendedProcess::plain(p2)),
            "input-probe(" + chan.display() + "," + recipes[i].print() + ")"});
      }
      {
        Symbol sig = fresh_symbol(SymbolKind::Name, "a", avoid);
        avoid.insert(sig);
        Symbol x = fresh_symbol(SymbolKind::Variable, "x", avoid);
        avoid.insert(x);
        Symbol y = fresh_symbol(SymbolKind::Variable, "y", avoid);
        avoid.insert(y);
        PlainProcess inner = PlainProcess::cond(
            Term::atom(x), recipes[i],
            PlainProcess::input(Term::atom(sig), y, PlainProcess::nil()), PlainProcess::nil());
        PlainProcess p1 = PlainProcess::input(Term::atom(chan), x, inner);
        PlainProcess p2 = PlainProcess::output(Term::atom(sig), zero, PlainProcess::nil());
        out.push_back(ContextInstance{
            {},
            ExtendedProcess::par(ExtendedProcess::plain(p1), ExtendedProcess::plain(p2)),
            "output-probe(" + chan.display() + "," + recipes[i].print() + ")"});
      }
    }
  }
  return out;
}

std::optional<ContextInstance> evidence_context(const ExtendedProcess& a,
                                                const ExtendedProcess& b, const Evidence& ev,
                                                const EquationalTheory& /*theory*/,
                                                const ExplorationConfig& cfg) {
  SymbolSet avoid = all_symbols(a);
  for (const Symbol& s : all_symbols(b)) avoid.insert(s);
  for (const EvidenceStep& st : ev.steps) {
    for (const Symbol& s : all_symbols(st.left_after)) avoid.insert(s);
    for (const Symbol& s : all_symbols(st.right_after)) avoid.insert(s);
  }
  Symbol sig = fresh_symbol(SymbolKind::Name, "a", avoid);
  avoid.insert(sig);
  const Term zero = Term::atom(const_sym("0"));

  const SymbolSet dom0 = domain(a);
  std::map<Symbol, Symbol> seen_payloads;  // frame variable -> context input variable

  auto translate = [&](const Term& t) -> std::optional<Term> {
    Term out = t;
    for (const auto& [w, x] : seen_payloads) out = replace_atom(out, w, Term::atom(x));
    for (const Symbol& v : variables_of(out)) {
      if (!dom0.count(v) && !std::any_of(seen_payloads.begin(), seen_payloads.end(),
                                         [&](const auto& kv) { return kv.second == v; })) {
        return std::nullopt;
      }
    }
    return out;
  };

  // Build the step chain backwards: start from the closing signal.
  struct StepPlan {
    enum class Kind { SendTo, ReceiveFrom } kind;
    Term chan;
    std::optional<Term> payload;  // SendTo: what to send; ReceiveFrom: expected value
    Symbol bind;                  // ReceiveFrom: context variable
  };
  std::vector<StepPlan> plan;
  SymbolSet prev_dom = dom0;

  for (const EvidenceStep& st : ev.steps) {
    if (st.internal) {
      prev_dom = domain(st.left_after);
      continue;  // the composition reduces on its own; the context waits
    }
    if (st.action.kind == ActKind::Input) {
      auto chan = translate(st.action.lhs);
      auto payload = translate(st.action.rhs);
      if (!chan || !payload) return std::nullopt;
      plan.push_back(StepPlan{StepPlan::Kind::SendTo, *chan, payload, Symbol{}});
      prev_dom = domain(st.left_after);
      continue;
    }
    // Output step: the context receives the payload and remembers it under
    // the variable the frame bound it to.
    auto chan = translate(st.action.lhs);
    if (!chan) return std::nullopt;
    SymbolSet new_dom = domain(st.left_after);
    std::optional<Symbol> introduced;
    for (const Symbol& v : new_dom) {
      if (!prev_dom.count(v)) {
        introduced = v;
        break;
      }
    }
    Symbol x = fresh_symbol(SymbolKind::Variable, "x", avoid);
    avoid.insert(x);
    std::optional<Term> expect;
    if (cfg.label_mode == OutputLabelMode::Literal) {
      expect = translate(st.action.rhs);
      if (!expect) return std::nullopt;
    }
    plan.push_back(StepPlan{StepPlan::Kind::ReceiveFrom, *chan, expect, x});
    if (introduced) seen_payloads[*introduced] = x;
    prev_dom = std::move(new_dom);
  }

  // The closing observation.
  PlainProcess closing = PlainProcess::nil();
  if (const auto* sf = std::get_if<StaticFact>(&ev.fact)) {
    auto l = translate(sf->left);
    auto r = translate(sf->right);
    if (!l || !r) return std::nullopt;
    closing = PlainProcess::cond(*l, *r,
                                 PlainProcess::output(Term::atom(sig), zero, PlainProcess::nil()),
                                 PlainProcess::nil());
  } else if (const auto* mf = std::get_if<MoveFact>(&ev.fact)) {
    if (mf->internal) return std::nullopt;
    auto chan = translate(mf->action.lhs);
    if (!chan) return std::nullopt;
    if (mf->action.kind == ActKind::Output) {
      Symbol x = fresh_symbol(SymbolKind::Variable, "x", avoid);
      avoid.insert(x);
      PlainProcess after = PlainProcess::output(Term::atom(sig), zero, PlainProcess::nil());
      if (cfg.label_mode == OutputLabelMode::Literal) {
        auto expect = translate(mf->action.rhs);
        if (!expect) return std::nullopt;
        after = PlainProcess::cond(Term::atom(x), *expect, after, PlainProcess::nil());
      }
      closing = PlainProcess::input(*chan, x, after);
    } else {
      auto payload = translate(mf->action.rhs);
      if (!payload) return std::nullopt;
      closing = PlainProcess::output(
          *chan, *payload, PlainProcess::output(Term::atom(sig), zero, PlainProcess::nil()));
    }
  } else {
    return std::nullopt;  // domain and barb facts have no replaying context
  }

  // Wrap the plan around the closing observation, last step innermost.
  PlainProcess ctx = closing;
  for (auto it = plan.rbegin(); it != plan.rend(); ++it) {
    if (it->kind == StepPlan::Kind::SendTo) {
      ctx = PlainProcess::output(it->chan, *it->payload, ctx);
    } else if (it->payload) {
      ctx = PlainProcess::input(it->chan, it->bind,
                                PlainProcess::cond(Term::atom(it->bind), *it->payload, ctx,
                                                   PlainProcess::nil()));
    } else {
      ctx = PlainProcess::input(it->chan, it->bind, ctx);
    }
  }
  return ContextInstance{{}, ExtendedProcess::plain(ctx), "trace-derived probe"};
}

// ---------------------------------------------------------------------------
// Validation utilities

bool validate_witness(const std::vector<std::pair<ExtendedProcess, ExtendedProcess>>& witness,
                      const EquationalTheory& theory, const ExplorationConfig& cfg,
                      std::string* why) {
  Engine eng(theory, equivalence_config(cfg));
  std::set<std::pair<int, int>> member;
  std::vector<std::pair<int, int>> pairs;
  for (const auto& [l, r] : witness) {
    pairs.emplace_back(eng.state(l), eng.state(r));
    member.insert(pairs.back());
  }
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  for (const auto& [l, r] : pairs) {
    if (member.count({r, l}) == 0) return fail("witness is not symmetric");
    if (eng.info(l).dom != eng.info(r).dom) return fail("witness pair with different domains");
    if (eng.static_witness(l, r, nullptr)) return fail("witness pair fails static equivalence");
    for (const auto& [act, target] : eng.internal_succs(l)) {
      bool matched = false;
      for (int cand : eng.tau_set(r)) {
        if (member.count({target, cand})) {
          matched = true;
          break;
        }
      }
      if (!matched) return fail("internal step " + act.pretty() + " unanswered in witness");
    }
    for (const Engine::ExternalMove& m : eng.external_moves(l)) {
      bool matched = false;
      for (int cand : eng.weak_set_by_key(r, m.norm_key)) {
        if (member.count({m.target, cand})) {
          matched = true;
          break;
        }
      }
      if (!matched) return fail("action " + m.action.pretty() + " unanswered in witness");
    }
  }
  return true;
}

bool replay_evidence(const ExtendedProcess& a, const ExtendedProcess& b, const Evidence& ev,
                     const EquationalTheory& theory, const ExplorationConfig& cfg,
                     std::string* why) {
  Engine eng(theory, equivalence_config(cfg));
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };

  int l = eng.state(a);
  int r = eng.state(b);
  for (const EvidenceStep& st : ev.steps) {
    const int nl = eng.state(st.left_after);
    const int nr = eng.state(st.right_after);
    const std::vector<int>& lset = st.internal ? eng.tau_set(l) : eng.weak_set(l, st.action);
    if (std::find(lset.begin(), lset.end(), nl) == lset.end()) {
      return fail("left process cannot replay step " + st.action.pretty());
    }
    const std::vector<int>& rset = st.internal ? eng.tau_set(r) : eng.weak_set(r, st.action);
    if (std::find(rset.begin(), rset.end(), nr) == rset.end()) {
      return fail("right process cannot replay step " + st.action.pretty());
    }
    l = nl;
    r = nr;
  }

  return std::visit(
      detail::overloaded{
          [&](const StaticFact& f) {
            const AcyclicSubstitution& fl = eng.info(l).frame;
            const AcyclicSubstitution& fr = eng.info(r).frame;
            const bool ea = terms_equal(apply_substitution(f.left, fl),
                                        apply_substitution(f.right, fl), theory);
            const bool eb = terms_equal(apply_substitution(f.left, fr),
                                        apply_substitution(f.right, fr), theory);
            return ea != eb ? true : fail("static witness does not separate the frames");
          },
          [&](const DomFact&) {
            return eng.info(l).dom != eng.info(r).dom ? true : fail("domains do not differ");
          },
          [&](const MoveFact& f) {
            const int mover = f.left_moved ? l : r;
            const int resp = f.left_moved ? r : l;
            if (f.internal) {
              return fail("internal moves cannot close a trace");
            }
            bool mover_can = false;
            for (const Engine::ExternalMove& m : eng.external_moves(mover)) {
              if (actions_equal(m.action, f.action, theory)) {
                mover_can = true;
                break;
              }
            }
            if (!mover_can) return fail("claimed move is not available");
            if (!eng.weak_set(resp, f.action).empty()) {
              return fail("responder does have a weak answer");
            }
            return true;
          },
          [&](const BarbFact& f) {
            SymbolSet ba = barbs(a, theory, cfg);
            SymbolSet bb = barbs(b, theory, cfg);
            const bool la = ba.count(f.name) != 0;
            const bool rb = bb.count(f.name) != 0;
            if (la == rb) return fail("barb does not separate the processes");
            if (la != f.left_has) return fail("barb side recorded wrongly");
            return true;
          },
      },
      ev.fact);
}

}  // namespace picalc
