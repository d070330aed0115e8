#ifndef PICALC_TESTS_SUPPORT_GEN_HPP
#define PICALC_TESTS_SUPPORT_GEN_HPP

// Shared fixture and random generators for the test suites: a standard
// declaration set with the pair-projection and symmetric-encryption rules,
// random terms, random correct closed extended processes, and single-rule
// structural rewrites used by the rule-level equivalence checks.

#include <algorithm>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "picalc/detail/visit.hpp"
#include "picalc/equivalence.hpp"
#include "picalc/parser.hpp"

namespace picalc::testgen {

inline const char* fixture_text() {
  return R"(
var x. var y. var z.
fun fst/1.
fun snd/1.
fun h/1.
fun enc/2.
fun dec/2.
rewrite fst((x, y)) -> x.
rewrite snd((x, y)) -> y.
rewrite dec(enc(x, y), y) -> x.
public name c.
public name d.
name m.
name k.
)";
}

struct Fixture {
  SpecFile spec;
  EquationalTheory theory;
  ExplorationConfig cfg;

  Fixture() : spec(parse_spec_file(fixture_text(), "<fixture>")), theory(spec.theory()) {
    cfg.recipe_depth = 1;
    cfg.replication_bound = 2;
    cfg.max_states = 3000;
    for (const Symbol& s : spec.decls.public_atoms) cfg.public_atoms.push_back(s);
  }

  ExtendedProcess parse(const std::string& text) const {
    return parse_process_string(text, spec.decls);
  }
  Term term(const std::string& text) const { return parse_term_string(text, spec.decls); }
};

inline std::size_t node_count(const PlainProcess& p);

inline std::size_t node_count(const ExtendedProcess& a) {
  return std::visit(detail::overloaded{
                        [](const ep::Plain& n) { return node_count(n.p); },
                        [](const ep::Par& n) { return 1 + node_count(n.left) + node_count(n.right); },
                        [](const ep::Res& n) { return 1 + node_count(n.body); },
                        [](const ep::Subst&) { return std::size_t{1}; },
                    },
                    a.node());
}

inline std::size_t node_count(const PlainProcess& p) {
  return std::visit(
      detail::overloaded{
          [](const pp::Nil&) { return std::size_t{1}; },
          [](const pp::Par& n) { return 1 + node_count(n.left) + node_count(n.right); },
          [](const pp::Repl& n) { return 1 + node_count(n.body); },
          [](const pp::NameRes& n) { return 1 + node_count(n.body); },
          [](const pp::Cond& n) {
            return 1 + node_count(n.then_branch) + node_count(n.else_branch);
          },
          [](const pp::Input& n) { return 1 + node_count(n.body); },
          [](const pp::Output& n) { return 1 + node_count(n.body); },
      },
      p.node());
}

class Gen {
 public:
  Gen(Fixture& fx, unsigned seed) : fx_(fx), rng_(seed) {}

  std::mt19937& rng() { return rng_; }

  int pick(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  bool coin() { return pick(0, 1) == 1; }

  Symbol pub_name() { return coin() ? name_sym("c") : name_sym("d"); }
  Symbol any_name() {
    switch (pick(0, 3)) {
      case 0: return name_sym("c");
      case 1: return name_sym("d");
      case 2: return name_sym("m");
      default: return name_sym("k");
    }
  }

  Term constant() { return Term::atom(const_sym(coin() ? "0" : "1")); }

  // Random term over the fixture names/constants plus the given variables.
  Term term(int depth, const std::vector<Symbol>& vars) {
    if (depth <= 0 || pick(0, 2) == 0) {
      if (!vars.empty() && pick(0, 2) == 0) {
        return Term::atom(vars[static_cast<std::size_t>(pick(0, static_cast<int>(vars.size()) - 1))]);
      }
      return coin() ? constant() : Term::atom(any_name());
    }
    switch (pick(0, 4)) {
      case 0: return Term::app("h", {term(depth - 1, vars)});
      case 1: return Term::pair(term(depth - 1, vars), term(depth - 1, vars));
      case 2: return Term::app("enc", {term(depth - 1, vars), term(depth - 1, vars)});
      case 3: return Term::app("fst", {Term::pair(term(depth - 1, vars), term(depth - 1, vars))});
      default: return Term::app("snd", {Term::pair(term(depth - 1, vars), term(depth - 1, vars))});
    }
  }

  Term closed_term(int depth) { return term(depth, {}); }

  // Random plain process whose free variables are within scope_vars.
  // Replication appears only when allow_repl is set, and only at the top
  // level of the produced process.
  PlainProcess plain(int budget, const std::vector<Symbol>& scope_vars) {
    if (budget <= 0) return PlainProcess::nil();
    switch (pick(0, 9)) {
      case 0: return PlainProcess::nil();
      case 1:
      case 2:
        return PlainProcess::output(Term::atom(pub_name()), term(1, scope_vars),
                                    plain(budget - 2, scope_vars));
      case 3: {
        Symbol v = var_sym("b" + std::to_string(binder_counter_++));
        std::vector<Symbol> inner = scope_vars;
        inner.push_back(v);
        return PlainProcess::input(Term::atom(pub_name()), v, plain(budget - 2, inner));
      }
      case 4:
        return PlainProcess::cond(term(1, scope_vars), term(1, scope_vars),
                                  plain(budget - 2, scope_vars), plain(budget - 3, scope_vars));
      case 5:
        return PlainProcess::par(plain(budget / 2, scope_vars), plain(budget / 2, scope_vars));
      case 6: {
        Symbol n = any_name();
        return PlainProcess::name_res(n, plain(budget - 1, scope_vars));
      }
      case 7:
        return PlainProcess::output(Term::atom(pub_name()), term(1, scope_vars),
                                    PlainProcess::nil());
      default: {
        // channel drawn from the scope occasionally, payload simple
        Term chan = (!scope_vars.empty() && coin())
                        ? Term::atom(scope_vars[static_cast<std::size_t>(
                              pick(0, static_cast<int>(scope_vars.size()) - 1))])
                        : Term::atom(pub_name());
        return PlainProcess::output(chan, term(1, scope_vars), plain(budget - 2, scope_vars));
      }
    }
  }

  // Random correct closed extended process, replication-free unless
  // with_repl is set (a replicated leaf may then appear at skeleton level).
  ExtendedProcess correct_cep(int budget, bool with_repl = false) {
    // Frame variables and their terms, acyclic by construction: the term for
    // x_i may use only later frame variables. Drawn from the declared
    // variables so printed processes re-parse.
    std::vector<Symbol> pool{var_sym("x"), var_sym("y"), var_sym("z")};
    std::shuffle(pool.begin(), pool.end(), rng_);
    const int nframe = pick(0, 3);
    std::vector<Symbol> frame_vars(pool.begin(), pool.begin() + nframe);
    std::vector<Binding> frame;
    for (int i = 0; i < nframe; ++i) {
      std::vector<Symbol> later(frame_vars.begin() + i + 1, frame_vars.end());
      frame.push_back(Binding{frame_vars[static_cast<std::size_t>(i)], term(pick(0, 2), later)});
    }

    // A hidden frame entry wrapped in its own variable restriction.
    std::optional<Binding> hidden;
    if (pick(0, 2) == 0) {
      Symbol hv = var_sym("hv" + std::to_string(frame_counter_++));
      hidden = Binding{hv, term(1, frame_vars)};
    }

    std::vector<ExtendedProcess> comps;
    for (const Binding& b : frame) comps.push_back(ExtendedProcess::subst(b.term, b.var));
    const int nleaves = pick(with_repl ? 1 : 0, 2);
    for (int i = 0; i < nleaves; ++i) {
      comps.push_back(ExtendedProcess::plain(plain(budget / std::max(1, nleaves), frame_vars)));
    }
    if (with_repl) {
      comps.push_back(ExtendedProcess::plain(PlainProcess::repl(plain(3, frame_vars))));
    }
    if (hidden) {
      std::vector<Symbol> scope = frame_vars;
      scope.push_back(hidden->var);
      ExtendedProcess inner = ExtendedProcess::par(
          ExtendedProcess::subst(hidden->term, hidden->var),
          ExtendedProcess::plain(plain(3, scope)));
      comps.push_back(ExtendedProcess::res(hidden->var, inner));
    }
    if (comps.empty()) comps.push_back(ExtendedProcess::plain(PlainProcess::nil()));

    std::shuffle(comps.begin(), comps.end(), rng_);
    ExtendedProcess out = comps.back();
    for (auto it = std::next(comps.rbegin()); it != comps.rend(); ++it) {
      out = coin() ? ExtendedProcess::par(*it, out) : ExtendedProcess::par(out, *it);
    }
    // A couple of name restrictions around random spots.
    for (int i = 0; i < pick(0, 2); ++i) {
      out = ExtendedProcess::res(any_name(), out);
    }
    return out;
  }

 private:
  Fixture& fx_;
  std::mt19937 rng_;
  int binder_counter_ = 0;
  int frame_counter_ = 0;
};

// ---------------------------------------------------------------------------
// Single-rule structural rewrites. Each returns a process obtained from one
// application of the rule at a random applicable position, or nothing when
// the rule does not apply. Rewrites stay at skeleton positions (parallel and
// restriction contexts); prefixed subterms are never touched.

namespace rules {

using Edit = std::function<std::optional<ExtendedProcess>(const ExtendedProcess&)>;
using PlainEdit = std::function<std::optional<PlainProcess>(const PlainProcess&)>;

// All results of applying the edit at one skeleton position.
inline void variants_pp(const PlainProcess& p, const PlainEdit& ed,
                        const std::function<ExtendedProcess(const PlainProcess&)>& rebuild,
                        std::vector<ExtendedProcess>& out) {
  if (auto x = ed(p)) out.push_back(rebuild(*x));
  std::visit(detail::overloaded{
                 [&](const pp::Par& n) {
                   variants_pp(n.left, ed,
                               [&](const PlainProcess& x) {
                                 return rebuild(PlainProcess::par(x, n.right));
                               },
                               out);
                   variants_pp(n.right, ed,
                               [&](const PlainProcess& x) {
                                 return rebuild(PlainProcess::par(n.left, x));
                               },
                               out);
                 },
                 [&](const pp::NameRes& n) {
                   variants_pp(n.body, ed,
                               [&](const PlainProcess& x) {
                                 return rebuild(PlainProcess::name_res(n.name, x));
                               },
                               out);
                 },
                 [&](const auto&) {},
             },
             p.node());
}

inline void variants_ep(const ExtendedProcess& a, const Edit& ed, const PlainEdit& ped,
                        const std::function<ExtendedProcess(const ExtendedProcess&)>& rebuild,
                        std::vector<ExtendedProcess>& out) {
  if (auto x = ed(a)) out.push_back(rebuild(*x));
  std::visit(detail::overloaded{
                 [&](const ep::Plain& n) {
                   variants_pp(n.p, ped,
                               [&](const PlainProcess& x) {
                                 return rebuild(ExtendedProcess::plain(x));
                               },
                               out);
                 },
                 [&](const ep::Par& n) {
                   variants_ep(n.left, ed, ped,
                               [&](const ExtendedProcess& x) {
                                 return rebuild(ExtendedProcess::par(x, n.right));
                               },
                               out);
                   variants_ep(n.right, ed, ped,
                               [&](const ExtendedProcess& x) {
                                 return rebuild(ExtendedProcess::par(n.left, x));
                               },
                               out);
                 },
                 [&](const ep::Res& n) {
                   variants_ep(n.body, ed, ped,
                               [&](const ExtendedProcess& x) {
                                 return rebuild(ExtendedProcess::res(n.binder, x));
                               },
                               out);
                 },
                 [&](const ep::Subst&) {},
             },
             a.node());
}

inline std::vector<ExtendedProcess> all_variants(const ExtendedProcess& a, const Edit& ed,
                                                 const PlainEdit& ped) {
  std::vector<ExtendedProcess> out;
  variants_ep(a, ed, ped, [](const ExtendedProcess& x) { return x; }, out);
  return out;
}

inline std::optional<ExtendedProcess> pick_variant(Gen& g, std::vector<ExtendedProcess> vs) {
  if (vs.empty()) return std::nullopt;
  return vs[static_cast<std::size_t>(g.pick(0, static_cast<int>(vs.size()) - 1))];
}

// Parallel laws: neutral element and AC rearrangement.
inline std::optional<ExtendedProcess> apply_2a(Gen& g, const ExtendedProcess& a) {
  const bool add_nil = g.coin();
  Edit ed = [&](const ExtendedProcess& node) -> std::optional<ExtendedProcess> {
    if (add_nil) {
      return g.coin() ? ExtendedProcess::par(node, ExtendedProcess::plain(PlainProcess::nil()))
                      : ExtendedProcess::par(ExtendedProcess::plain(PlainProcess::nil()), node);
    }
    if (!std::holds_alternative<ep::Par>(node.node())) return std::nullopt;
    const auto& n = std::get<ep::Par>(node.node());
    return ExtendedProcess::par(n.right, n.left);
  };
  PlainEdit ped = [&](const PlainProcess& node) -> std::optional<PlainProcess> {
    if (!std::holds_alternative<pp::Par>(node.node())) return std::nullopt;
    const auto& n = std::get<pp::Par>(node.node());
    if (add_nil) return PlainProcess::par(node, PlainProcess::nil());
    return PlainProcess::par(n.right, n.left);
  };
  return pick_variant(g, all_variants(a, ed, ped));
}

// Replication unfolding.
inline std::optional<ExtendedProcess> apply_2b(Gen& g, const ExtendedProcess& a) {
  Edit ed = [](const ExtendedProcess&) { return std::nullopt; };
  PlainEdit ped = [](const PlainProcess& node) -> std::optional<PlainProcess> {
    if (!std::holds_alternative<pp::Repl>(node.node())) return std::nullopt;
    const auto& n = std::get<pp::Repl>(node.node());
    return PlainProcess::par(n.body, node);
  };
  return pick_variant(g, all_variants(a, ed, ped));
}

// Unused restrictions and restriction reordering.
inline std::optional<ExtendedProcess> apply_2c(Gen& g, const ExtendedProcess& a) {
  switch (g.pick(0, 2)) {
    case 0: {  // wrap some position in a restriction on an unused fresh name
      SymbolSet avoid = all_symbols(a);
      Symbol n = fresh_symbol(SymbolKind::Name, "g", avoid);
      Edit ed = [&](const ExtendedProcess& node) -> std::optional<ExtendedProcess> {
        return ExtendedProcess::res(n, node);
      };
      PlainEdit ped = [](const PlainProcess&) { return std::nullopt; };
      return pick_variant(g, all_variants(a, ed, ped));
    }
    case 1: {  // drop a restriction whose name does not occur
      Edit ed = [](const ExtendedProcess& node) -> std::optional<ExtendedProcess> {
        if (!std::holds_alternative<ep::Res>(node.node())) return std::nullopt;
        const auto& n = std::get<ep::Res>(node.node());
        if (n.binder.kind != SymbolKind::Name) return std::nullopt;
        if (all_symbols(n.body).count(n.binder)) return std::nullopt;
        return n.body;
      };
      PlainEdit ped = [](const PlainProcess& node) -> std::optional<PlainProcess> {
        if (!std::holds_alternative<pp::NameRes>(node.node())) return std::nullopt;
        const auto& n = std::get<pp::NameRes>(node.node());
        if (all_symbols(n.body).count(n.name)) return std::nullopt;
        return n.body;
      };
      return pick_variant(g, all_variants(a, ed, ped));
    }
    default: {  // swap two adjacent restrictions
      Edit ed = [](const ExtendedProcess& node) -> std::optional<ExtendedProcess> {
        if (!std::holds_alternative<ep::Res>(node.node())) return std::nullopt;
        const auto& n1 = std::get<ep::Res>(node.node());
        if (!std::holds_alternative<ep::Res>(n1.body.node())) return std::nullopt;
        const auto& n2 = std::get<ep::Res>(n1.body.node());
        if (n1.binder == n2.binder) return std::nullopt;
        return ExtendedProcess::res(n2.binder, ExtendedProcess::res(n1.binder, n2.body));
      };
      PlainEdit ped = [](const PlainProcess&) { return std::nullopt; };
      return pick_variant(g, all_variants(a, ed, ped));
    }
  }
}

// Scope extrusion, both directions.
inline std::optional<ExtendedProcess> apply_2d(Gen& g, const ExtendedProcess& a) {
  Edit ed = [&](const ExtendedProcess& node) -> std::optional<ExtendedProcess> {
    if (!std::holds_alternative<ep::Par>(node.node())) return std::nullopt;
    const auto& n = std::get<ep::Par>(node.node());
    if (std::holds_alternative<ep::Res>(n.left.node())) {
      const auto& r = std::get<ep::Res>(n.left.node());
      if (!all_symbols(n.right).count(r.binder)) {
        return ExtendedProcess::res(r.binder, ExtendedProcess::par(r.body, n.right));
      }
    }
    return std::nullopt;
  };
  Edit ed_in = [&](const ExtendedProcess& node) -> std::optional<ExtendedProcess> {
    if (!std::holds_alternative<ep::Res>(node.node())) return std::nullopt;
    const auto& r = std::get<ep::Res>(node.node());
    if (!std::holds_alternative<ep::Par>(r.body.node())) return std::nullopt;
    const auto& n = std::get<ep::Par>(r.body.node());
    if (all_symbols(n.right).count(r.binder)) return std::nullopt;
    return ExtendedProcess::par(ExtendedProcess::res(r.binder, n.left), n.right);
  };
  PlainEdit ped = [](const PlainProcess&) { return std::nullopt; };
  return pick_variant(g, all_variants(a, g.coin() ? ed : ed_in, ped));
}

// Variable restriction eliminated by applying its substitution.
inline std::optional<ExtendedProcess> apply_2e(Gen& g, const ExtendedProcess& a) {
  Edit ed = [](const ExtendedProcess& node) -> std::optional<ExtendedProcess> {
    if (!std::holds_alternative<ep::Res>(node.node())) return std::nullopt;
    const auto& r = std::get<ep::Res>(node.node());
    if (r.binder.kind != SymbolKind::Variable) return std::nullopt;
    // flatten the body parallel into components
    std::vector<ExtendedProcess> comps;
    std::function<void(const ExtendedProcess&)> flat = [&](const ExtendedProcess& e) {
      if (std::holds_alternative<ep::Par>(e.node())) {
        const auto& n = std::get<ep::Par>(e.node());
        flat(n.left);
        flat(n.right);
      } else {
        comps.push_back(e);
      }
    };
    flat(r.body);
    std::optional<Binding> b;
    std::vector<ExtendedProcess> rest;
    for (const ExtendedProcess& c : comps) {
      if (!b && std::holds_alternative<ep::Subst>(c.node()) &&
          std::get<ep::Subst>(c.node()).var == r.binder) {
        const auto& s = std::get<ep::Subst>(c.node());
        b = Binding{s.var, s.term};
      } else {
        rest.push_back(c);
      }
    }
    if (!b) return std::nullopt;
    ExtendedProcess out = ExtendedProcess::plain(PlainProcess::nil());
    if (!rest.empty()) {
      out = rest.back();
      for (auto it = std::next(rest.rbegin()); it != rest.rend(); ++it) {
        out = ExtendedProcess::par(*it, out);
      }
    }
    return substitute_free(out, b->var, b->term);
  };
  PlainEdit ped = [](const PlainProcess&) { return std::nullopt; };
  return pick_variant(g, all_variants(a, ed, ped));
}

// Saturation: a substitution applied to a parallel sibling.
inline std::optional<ExtendedProcess> apply_2f(Gen& g, const ExtendedProcess& a) {
  Edit ed = [](const ExtendedProcess& node) -> std::optional<ExtendedProcess> {
    if (!std::holds_alternative<ep::Par>(node.node())) return std::nullopt;
    const auto& n = std::get<ep::Par>(node.node());
    if (std::holds_alternative<ep::Subst>(n.left.node())) {
      const auto& s = std::get<ep::Subst>(n.left.node());
      ExtendedProcess rewritten = substitute_free(n.right, s.var, s.term);
      if (alpha_equal(rewritten, n.right)) return std::nullopt;
      return ExtendedProcess::par(n.left, rewritten);
    }
    if (std::holds_alternative<ep::Subst>(n.right.node())) {
      const auto& s = std::get<ep::Subst>(n.right.node());
      ExtendedProcess rewritten = substitute_free(n.left, s.var, s.term);
      if (alpha_equal(rewritten, n.left)) return std::nullopt;
      return ExtendedProcess::par(rewritten, n.right);
    }
    return std::nullopt;
  };
  PlainEdit ped = [](const PlainProcess&) { return std::nullopt; };
  return pick_variant(g, all_variants(a, ed, ped));
}

// Frame terms replaced by provably equal ones, in both directions.
inline std::optional<ExtendedProcess> apply_2g(Gen& g, const ExtendedProcess& a,
                                               const EquationalTheory& theory) {
  const bool to_normal = g.coin();
  Term padding = g.closed_term(1);
  Edit ed = [&](const ExtendedProcess& node) -> std::optional<ExtendedProcess> {
    if (!std::holds_alternative<ep::Subst>(node.node())) return std::nullopt;
    const auto& s = std::get<ep::Subst>(node.node());
    if (to_normal) {
      Term n = theory.normalize(s.term);
      if (n == s.term) return std::nullopt;
      return ExtendedProcess::subst(n, s.var);
    }
    return ExtendedProcess::subst(Term::app("fst", {Term::pair(s.term, padding)}), s.var);
  };
  PlainEdit ped = [](const PlainProcess&) { return std::nullopt; };
  return pick_variant(g, all_variants(a, ed, ped));
}

}  // namespace rules

}  // namespace picalc::testgen

#endif
