#include "picalc/rewriting.hpp"

#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "picalc/errors.hpp"

namespace picalc {

RewriteRule make_rule(Term lhs, Term rhs) {
  if (lhs.is_atom() && lhs.symbol().kind == SymbolKind::Variable) {
    throw std::invalid_argument("rewrite rule lhs must not be a bare variable");
  }
  SymbolSet lv = variables_of(lhs);
  for (const Symbol& v : variables_of(rhs)) {
    if (!lv.count(v)) {
      throw std::invalid_argument("rewrite rule rhs introduces variable " + v.display());
    }
  }
  return RewriteRule{std::move(lhs), std::move(rhs)};
}

struct EquationalTheory::Cache {
  std::mutex mu;
  std::unordered_map<std::string, Term> normal;
};

EquationalTheory::EquationalTheory(Signature sig, std::vector<RewriteRule> rules,
                                   std::size_t step_budget)
    : sig_(std::move(sig)), rules_(std::move(rules)), budget_(step_budget),
      cache_(std::make_shared<Cache>()) {
  for (const auto& r : rules_) {
    std::string why;
    if (!well_formed(r.lhs, sig_, &why) || !well_formed(r.rhs, sig_, &why)) {
      throw std::invalid_argument("ill-formed rewrite rule: " + why);
    }
  }
}

bool match_pattern(const Term& pattern, const Term& subject, std::map<Symbol, Term>& bindings) {
  if (pattern.is_atom()) {
    const Symbol& s = pattern.symbol();
    if (s.kind == SymbolKind::Variable) {
      auto it = bindings.find(s);
      if (it != bindings.end()) return it->second == subject;
      bindings.emplace(s, subject);
      return true;
    }
    return subject.is_atom() && subject.symbol() == s;
  }
  if (!subject.is_app() || subject.fn() != pattern.fn() ||
      subject.args().size() != pattern.args().size()) {
    return false;
  }
  for (std::size_t i = 0; i < pattern.args().size(); ++i) {
    if (!match_pattern(pattern.args()[i], subject.args()[i], bindings)) return false;
  }
  return true;
}

Term instantiate_pattern(const Term& pattern, const std::map<Symbol, Term>& bindings) {
  if (pattern.is_atom()) {
    auto it = bindings.find(pattern.symbol());
    return it == bindings.end() ? pattern : it->second;
  }
  std::vector<Term> args;
  args.reserve(pattern.args().size());
  for (const auto& a : pattern.args()) args.push_back(instantiate_pattern(a, bindings));
  return Term::app(pattern.fn(), std::move(args));
}

namespace {
Term normalize_rec(const Term& e, const std::vector<RewriteRule>& rules, std::size_t& budget) {
  Term cur = e;
  if (cur.is_app()) {
    std::vector<Term> args;
    args.reserve(cur.args().size());
    bool changed = false;
    for (const auto& a : cur.args()) {
      Term na = normalize_rec(a, rules, budget);
      if (!(na == a)) changed = true;
      args.push_back(std::move(na));
    }
    if (changed) cur = Term::app(cur.fn(), std::move(args));
  }
  for (;;) {
    bool stepped = false;
    for (const auto& r : rules) {
      std::map<Symbol, Term> binds;
      if (match_pattern(r.lhs, cur, binds)) {
        if (budget == 0) throw StepBudgetExceeded("rewrite step budget exhausted");
        --budget;
        cur = normalize_rec(instantiate_pattern(r.rhs, binds), rules, budget);
        stepped = true;
        break;
      }
    }
    if (!stepped) return cur;
  }
}
}  // namespace

Term EquationalTheory::normalize(const Term& e) const {
  const std::string k = e.key();
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->normal.find(k);
    if (it != cache_->normal.end()) return it->second;
  }
  std::size_t budget = budget_;
  Term out = normalize_rec(e, rules_, budget);
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    cache_->normal.emplace(k, out);
  }
  return out;
}

bool EquationalTheory::equal(const Term& a, const Term& b) const {
  return normalize(a) == normalize(b);
}

Term normalize_term(const Term& e, const EquationalTheory& theory) { return theory.normalize(e); }

bool terms_equal(const Term& a, const Term& b, const EquationalTheory& theory) {
  return theory.equal(a, b);
}

}  // namespace picalc
