#include "picalc/normal_form.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "picalc/detail/visit.hpp"
#include "picalc/errors.hpp"

namespace picalc {

using detail::overloaded;

ExtendedProcess NormalForm::reassemble() const {
  ExtendedProcess out = ExtendedProcess::plain(body);
  for (auto it = frame.bindings().rbegin(); it != frame.bindings().rend(); ++it) {
    out = ExtendedProcess::par(ExtendedProcess::subst(it->term, it->var), out);
  }
  for (auto it = names.rbegin(); it != names.rend(); ++it) {
    out = ExtendedProcess::res(*it, out);
  }
  return out;
}

std::string NormalForm::pretty() const { return print_process(reassemble()); }

std::string NormalForm::key() const { return canonical_process_key(reassemble()); }

namespace {

struct Collected {
  std::vector<Symbol> restricted;  // preorder
  std::vector<Binding> substs;
  std::vector<PlainProcess> leaves;
};

void collect_pp(const PlainProcess& p, Collected& out);

void collect_ep(const ExtendedProcess& a, Collected& out) {
  std::visit(overloaded{
                 [&](const ep::Plain& n) { collect_pp(n.p, out); },
                 [&](const ep::Par& n) {
                   collect_ep(n.left, out);
                   collect_ep(n.right, out);
                 },
                 [&](const ep::Res& n) {
                   out.restricted.push_back(n.binder);
                   collect_ep(n.body, out);
                 },
                 [&](const ep::Subst& n) { out.substs.push_back(Binding{n.var, n.term}); },
             },
             a.node());
}

void collect_pp(const PlainProcess& p, Collected& out) {
  std::visit(overloaded{
                 [&](const pp::Nil&) {},
                 [&](const pp::Par& n) {
                   collect_pp(n.left, out);
                   collect_pp(n.right, out);
                 },
                 [&](const pp::NameRes& n) {
                   out.restricted.push_back(n.name);
                   collect_pp(n.body, out);
                 },
                 [&](const auto&) { out.leaves.push_back(p); },
             },
             p.node());
}

bool leaf_mentions(const PlainProcess& leaf, const Symbol& s) {
  return all_symbols(leaf).count(s) != 0;
}

// Position of the first occurrence of s in a fixed traversal of the leaves;
// used as a spelling-independent tie break when ordering name pushes.
void occurrences_pp(const PlainProcess& p, std::vector<Symbol>& out);

void occurrences_term(const Term& t, std::vector<Symbol>& out) {
  if (t.is_atom()) {
    out.push_back(t.symbol());
    return;
  }
  for (const auto& a : t.args()) occurrences_term(a, out);
}

void occurrences_pp(const PlainProcess& p, std::vector<Symbol>& out) {
  std::visit(overloaded{
                 [&](const pp::Nil&) {},
                 [&](const pp::Par& n) {
                   occurrences_pp(n.left, out);
                   occurrences_pp(n.right, out);
                 },
                 [&](const pp::Repl& n) { occurrences_pp(n.body, out); },
                 [&](const pp::NameRes& n) {
                   out.push_back(n.name);
                   occurrences_pp(n.body, out);
                 },
                 [&](const pp::Cond& n) {
                   occurrences_term(n.lhs, out);
                   occurrences_term(n.rhs, out);
                   occurrences_pp(n.then_branch, out);
                   occurrences_pp(n.else_branch, out);
                 },
                 [&](const pp::Input& n) {
                   occurrences_term(n.chan, out);
                   out.push_back(n.var);
                   occurrences_pp(n.body, out);
                 },
                 [&](const pp::Output& n) {
                   occurrences_term(n.chan, out);
                   occurrences_term(n.msg, out);
                   occurrences_pp(n.body, out);
                 },
             },
             p.node());
}

PlainProcess fold_par(const std::vector<PlainProcess>& leaves) {
  if (leaves.empty()) return PlainProcess::nil();
  PlainProcess out = leaves.back();
  for (auto it = std::next(leaves.rbegin()); it != leaves.rend(); ++it) {
    out = PlainProcess::par(*it, out);
  }
  return out;
}

}  // namespace

NormalForm normalize_process(const ExtendedProcess& a, const EquationalTheory& theory) {
  if (!check_correct(a).ok()) {
    throw PreconditionViolated("normalize_process requires a correct process");
  }
  if (!is_closed_ep(a)) {
    throw PreconditionViolated("normalize_process requires a closed process");
  }
  const SymbolSet original_dom = domain(a);

  // Scope-extrude every skeleton restriction outward; freshening against the
  // free symbols first makes the extrusion capture-free.
  SymbolSet avoid = free_vars(a);
  for (const Symbol& s : free_names(a)) avoid.insert(s);
  ExtendedProcess fresh = freshen_binders(a, avoid);
  Collected c;
  collect_ep(fresh, c);

  // Eliminate each restricted variable by applying its unique substitution
  // to every other component.
  for (const Symbol& u : c.restricted) {
    if (u.kind != SymbolKind::Variable) continue;
    auto it = std::find_if(c.substs.begin(), c.substs.end(),
                           [&](const Binding& b) { return b.var == u; });
    if (it == c.substs.end()) {
      throw PreconditionViolated("restricted variable without substitution: " + u.display());
    }
    const Binding elim = *it;
    c.substs.erase(it);
    for (Binding& b : c.substs) b.term = replace_atom(b.term, elim.var, elim.term);
    for (PlainProcess& leaf : c.leaves) leaf = substitute_free(leaf, elim.var, elim.term);
  }

  // Order the remaining substitutions and use them to rid the body and the
  // frame itself of domain variables, then rewrite every term to normal form.
  AcyclicSubstitution theta = check_acyclic(c.substs);
  auto normalize_all = [&](const Term& t) { return theory.normalize(apply_substitution(t, theta)); };

  std::vector<PlainProcess> leaves;
  for (const PlainProcess& leaf : c.leaves) {
    PlainProcess saturated = leaf;
    for (const Binding& b : theta.bindings()) {
      saturated = substitute_free(saturated, b.var, b.term);
    }
    leaves.push_back(map_terms(saturated, [&](const Term& t) { return theory.normalize(t); }));
  }

  std::vector<Binding> frame_bindings;
  for (const Binding& b : theta.bindings()) {
    frame_bindings.push_back(Binding{b.var, normalize_all(b.term)});
  }
  AcyclicSubstitution frame = check_acyclic(std::move(frame_bindings));

  // Split restricted names: those the frame mentions stay outside, the rest
  // are pushed onto the smallest group of body parts using them or dropped.
  SymbolSet frame_names;
  for (const Binding& b : frame.bindings()) {
    for (const Symbol& s : names_of(b.term)) frame_names.insert(s);
  }

  std::vector<Symbol> kept;
  std::vector<Symbol> pushable;
  for (const Symbol& u : c.restricted) {
    if (u.kind != SymbolKind::Name) continue;
    if (frame_names.count(u)) {
      kept.push_back(u);
    } else {
      pushable.push_back(u);
    }
  }

  // Keep the frame-name binding order aligned with first use in the frame.
  {
    std::vector<Symbol> order;
    for (const Binding& b : frame.bindings()) {
      std::vector<Symbol> occ;
      occurrences_term(b.term, occ);
      for (const Symbol& s : occ) {
        if (std::find(kept.begin(), kept.end(), s) != kept.end() &&
            std::find(order.begin(), order.end(), s) == order.end()) {
          order.push_back(s);
        }
      }
    }
    kept = std::move(order);
  }

  // Deterministic, spelling-independent push order.
  {
    std::map<Symbol, std::string> anon;
    for (std::size_t i = 0; i < kept.size(); ++i) anon[kept[i]] = "#" + std::to_string(i);
    for (const Symbol& n : pushable) anon[n] = "?";
    auto leaf_key = [&](const PlainProcess& l) {
      return canonical_process_key_env(ExtendedProcess::plain(l), anon);
    };
    std::vector<std::size_t> traversal_order(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) traversal_order[i] = i;
    std::stable_sort(traversal_order.begin(), traversal_order.end(),
                     [&](std::size_t x, std::size_t y) {
                       return leaf_key(leaves[x]) < leaf_key(leaves[y]);
                     });
    std::vector<Symbol> occ;
    for (std::size_t i : traversal_order) occurrences_pp(leaves[i], occ);
    auto first_pos = [&](const Symbol& s) {
      auto it = std::find(occ.begin(), occ.end(), s);
      return std::distance(occ.begin(), it);
    };
    auto cover_fingerprint = [&](const Symbol& s) {
      std::vector<std::string> keys;
      for (const PlainProcess& l : leaves) {
        if (leaf_mentions(l, s)) keys.push_back(leaf_key(l));
      }
      std::sort(keys.begin(), keys.end());
      std::string out;
      for (const auto& k : keys) out += k + ";";
      return out;
    };
    std::stable_sort(pushable.begin(), pushable.end(), [&](const Symbol& x, const Symbol& y) {
      std::size_t cx = 0, cy = 0;
      for (const PlainProcess& l : leaves) {
        cx += leaf_mentions(l, x);
        cy += leaf_mentions(l, y);
      }
      if (cx != cy) return cx < cy;
      std::string fx = cover_fingerprint(x), fy = cover_fingerprint(y);
      if (fx != fy) return fx < fy;
      return first_pos(x) < first_pos(y);
    });
  }

  for (const Symbol& n : pushable) {
    std::vector<PlainProcess> cover, rest;
    for (const PlainProcess& l : leaves) {
      (leaf_mentions(l, n) ? cover : rest).push_back(l);
    }
    if (cover.empty()) continue;  // unused restriction, dropped
    std::map<Symbol, std::string> anon;
    for (std::size_t i = 0; i < kept.size(); ++i) anon[kept[i]] = "#" + std::to_string(i);
    anon[n] = "?";
    std::sort(cover.begin(), cover.end(), [&](const PlainProcess& x, const PlainProcess& y) {
      return canonical_process_key_env(ExtendedProcess::plain(x), anon) <
             canonical_process_key_env(ExtendedProcess::plain(y), anon);
    });
    rest.push_back(PlainProcess::name_res(n, fold_par(cover)));
    leaves = std::move(rest);
  }

  // Canonical arrangement of the body.
  {
    std::map<Symbol, std::string> env;
    for (std::size_t i = 0; i < kept.size(); ++i) env[kept[i]] = "#" + std::to_string(i);
    std::sort(leaves.begin(), leaves.end(), [&](const PlainProcess& x, const PlainProcess& y) {
      return canonical_process_key_env(ExtendedProcess::plain(x), env) <
             canonical_process_key_env(ExtendedProcess::plain(y), env);
    });
  }
  PlainProcess body = fold_par(leaves);

  NormalForm nf{std::move(kept), std::move(frame), std::move(body)};

  assert(free_vars(nf.body).empty());
  for (const Binding& b : nf.frame.bindings()) {
    assert(variables_of(b.term).empty());
    (void)b;
  }
  assert(nf.frame.domain() == original_dom);
  (void)original_dom;
  return nf;
}

AcyclicSubstitution frame_of(const ExtendedProcess& a, const EquationalTheory& theory) {
  return normalize_process(a, theory).frame;
}

namespace {

bool has_repl_pp(const PlainProcess& p) {
  return std::visit(overloaded{
                        [&](const pp::Nil&) { return false; },
                        [&](const pp::Par& n) { return has_repl_pp(n.left) || has_repl_pp(n.right); },
                        [&](const pp::Repl&) { return true; },
                        [&](const pp::NameRes& n) { return has_repl_pp(n.body); },
                        [&](const pp::Cond& n) {
                          return has_repl_pp(n.then_branch) || has_repl_pp(n.else_branch);
                        },
                        [&](const pp::Input& n) { return has_repl_pp(n.body); },
                        [&](const pp::Output& n) { return has_repl_pp(n.body); },
                    },
                    p.node());
}

bool has_repl(const ExtendedProcess& a) {
  return std::visit(overloaded{
                        [&](const ep::Plain& n) { return has_repl_pp(n.p); },
                        [&](const ep::Par& n) { return has_repl(n.left) || has_repl(n.right); },
                        [&](const ep::Res& n) { return has_repl(n.body); },
                        [&](const ep::Subst&) { return false; },
                    },
                    a.node());
}

PlainProcess unfold_pp(const PlainProcess& p, int copies);

PlainProcess unfold_repl(const PlainProcess& body, int copies) {
  PlainProcess out = PlainProcess::repl(unfold_pp(body, copies));
  for (int i = 0; i < copies; ++i) out = PlainProcess::par(unfold_pp(body, copies), out);
  return out;
}

PlainProcess unfold_pp(const PlainProcess& p, int copies) {
  return std::visit(
      overloaded{
          [&](const pp::Nil&) { return p; },
          [&](const pp::Par& n) {
            return PlainProcess::par(unfold_pp(n.left, copies), unfold_pp(n.right, copies));
          },
          [&](const pp::Repl& n) { return unfold_repl(n.body, copies); },
          [&](const pp::NameRes& n) {
            return PlainProcess::name_res(n.name, unfold_pp(n.body, copies));
          },
          [&](const pp::Cond& n) {
            return PlainProcess::cond(n.lhs, n.rhs, unfold_pp(n.then_branch, copies),
                                      unfold_pp(n.else_branch, copies));
          },
          [&](const pp::Input& n) {
            return PlainProcess::input(n.chan, n.var, unfold_pp(n.body, copies));
          },
          [&](const pp::Output& n) {
            return PlainProcess::output(n.chan, n.msg, unfold_pp(n.body, copies));
          },
      },
      p.node());
}

ExtendedProcess unfold_ep(const ExtendedProcess& a, int copies) {
  return std::visit(
      overloaded{
          [&](const ep::Plain& n) { return ExtendedProcess::plain(unfold_pp(n.p, copies)); },
          [&](const ep::Par& n) {
            return ExtendedProcess::par(unfold_ep(n.left, copies), unfold_ep(n.right, copies));
          },
          [&](const ep::Res& n) { return ExtendedProcess::res(n.binder, unfold_ep(n.body, copies)); },
          [&](const ep::Subst&) { return a; },
      },
      a.node());
}

}  // namespace

bool struct_equiv(const ExtendedProcess& a, const ExtendedProcess& b,
                  const EquationalTheory& theory, int unfold_bound) {
  std::string ka = normalize_process(a, theory).key();
  std::string kb = normalize_process(b, theory).key();
  if (ka == kb) return true;
  if (!has_repl(a) && !has_repl(b)) return false;

  std::vector<std::string> keys_a{ka}, keys_b{kb};
  for (int j = 1; j <= unfold_bound; ++j) {
    keys_a.push_back(normalize_process(unfold_ep(a, j), theory).key());
    keys_b.push_back(normalize_process(unfold_ep(b, j), theory).key());
  }
  for (const auto& x : keys_a) {
    for (const auto& y : keys_b) {
      if (x == y) return true;
    }
  }
  return false;
}

}  // namespace picalc
