#ifndef PICALC_REWRITING_HPP
#define PICALC_REWRITING_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "picalc/term.hpp"

namespace picalc {

// An oriented equation lhs -> rhs. Variables of the lhs are the pattern
// variables; rhs may not introduce new ones and lhs may not be a bare
// variable.
struct RewriteRule {
  Term lhs;
  Term rhs;
};

RewriteRule make_rule(Term lhs, Term rhs);

// The equational theory presented as a rewrite system. Termination and
// confluence of user-supplied rules are assumed, not checked; the step budget
// turns a non-terminating theory into a loud error instead of a hang.
class EquationalTheory {
 public:
  explicit EquationalTheory(Signature sig, std::vector<RewriteRule> rules = {},
                            std::size_t step_budget = 10'000);

  const Signature& signature() const { return sig_; }
  const std::vector<RewriteRule>& rules() const { return rules_; }
  std::size_t step_budget() const { return budget_; }

  Term normalize(const Term& e) const;
  bool equal(const Term& a, const Term& b) const;

 private:
  Signature sig_;
  std::vector<RewriteRule> rules_;
  std::size_t budget_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

// Innermost leftmost rewriting to a fixpoint, first matching rule wins.
// Deterministic given the rule order; throws StepBudgetExceeded.
Term normalize_term(const Term& e, const EquationalTheory& theory);

// Realizes provable equality: both sides normalize to the same term.
bool terms_equal(const Term& a, const Term& b, const EquationalTheory& theory);

// Syntactic matching of a rule pattern against a subject term.
bool match_pattern(const Term& pattern, const Term& subject, std::map<Symbol, Term>& bindings);
Term instantiate_pattern(const Term& pattern, const std::map<Symbol, Term>& bindings);

}  // namespace picalc

#endif
