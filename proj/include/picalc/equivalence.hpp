#ifndef PICALC_EQUIVALENCE_HPP
#define PICALC_EQUIVALENCE_HPP

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "picalc/lts.hpp"

namespace picalc {

// Discriminating facts a distinguishing trace can end in.
struct StaticFact {
  Term left, right;  // recipes equal under one frame, different under the other
};
struct DomFact {};  // the frames expose different domains
struct MoveFact {
  bool left_moved = true;
  bool internal = false;
  Action action;  // the move the other side cannot answer weakly
};
struct BarbFact {
  Symbol name;
  bool left_has = true;
};

using DistinguishingFact = std::variant<StaticFact, DomFact, MoveFact, BarbFact>;

// One step of a distinguishing trace; both processes advance (the mover
// strongly, the responder weakly) and the stored results replay the step.
struct EvidenceStep {
  bool internal = false;
  Action action;
  ExtendedProcess left_after;
  ExtendedProcess right_after;
};

struct Evidence {
  std::vector<EvidenceStep> steps;
  DistinguishingFact fact;
  std::string describe() const;
};

struct EquivVerdict {
  enum class Kind { Equivalent, Distinguished, Inconclusive };
  Kind kind = Kind::Inconclusive;
  std::vector<std::pair<ExtendedProcess, ExtendedProcess>> witness;  // Equivalent
  std::optional<Evidence> evidence;                                  // Distinguished
  std::string note;

  bool equivalent() const { return kind == Kind::Equivalent; }
  bool distinguished() const { return kind == Kind::Distinguished; }
  bool inconclusive() const { return kind == Kind::Inconclusive; }
  std::string kind_name() const;
};

// The exploration configuration the equivalence engine actually runs with:
// canonical frame variables (matched outputs bind the same variable on both
// sides) and frame-value recipe deduplication.
ExplorationConfig equivalence_config(ExplorationConfig cfg);

// Frame indistinguishability: every pair of recipes over dom(A) and the
// public atoms, up to the configured depth, is equal under A's frame exactly
// when it is equal under B's. Throws DomainMismatch when dom(A) != dom(B).
EquivVerdict static_equivalent(const ExtendedProcess& a, const ExtendedProcess& b,
                               const EquationalTheory& theory, const ExplorationConfig& cfg);

// On-the-fly weak labeled bisimilarity over the bounded state spaces:
// static equivalence at every visited pair, internal steps answered by
// internal sequences, external actions answered weakly. Budget exhaustion
// downgrades an equivalent answer to inconclusive, never to distinguished.
EquivVerdict weak_labeled_bisim(const ExtendedProcess& a, const ExtendedProcess& b,
                                const EquationalTheory& theory, const ExplorationConfig& cfg);

// Barb-set comparison over the bounded exploration.
EquivVerdict barb_equivalent(const ExtendedProcess& a, const ExtendedProcess& b,
                             const EquationalTheory& theory, const ExplorationConfig& cfg);

// Probe constructions: small contexts that turn an equivalence failure into
// a barb difference on a fresh signal name.
struct ProbeSpec {
  enum class Kind { Test, Input, Output };
  Kind kind = Kind::Test;
  Term first;     // tested term (Test) or channel (Input/Output)
  Term second;    // tested term (Test) or message (Input/Output)
  Symbol signal;  // fresh name; must not occur in the probed process

  static ProbeSpec test(Term e1, Term e2, Symbol a);
  static ProbeSpec input(Term chan, Term msg, Symbol a);
  static ProbeSpec output(Term chan, Term msg, Symbol a);
};

ExtendedProcess build_probe(const ProbeSpec& spec, const ExtendedProcess& target);

// A closing context nu u1...uk.(hole | c).
struct ContextInstance {
  std::vector<Symbol> binders;
  ExtendedProcess par_with;
  std::string label;  // how the instance was produced, for reports

  ExtendedProcess apply(const ExtendedProcess& a) const;
};

// Checks bisimilarity of nu u.(A|C) against nu u.(B|C) for every supplied
// context; any distinguished composition decides the verdict.
EquivVerdict context_closure_check(const ExtendedProcess& a, const ExtendedProcess& b,
                                   const std::vector<ContextInstance>& contexts,
                                   const EquationalTheory& theory, const ExplorationConfig& cfg);

// Independent oracle: greatest-fixpoint refinement over two fully
// materialized state spaces, starting from all domain-compatible statically
// equivalent state pairs and deleting violators of the matching conditions.
EquivVerdict naive_bisim_oracle(const LtsGraph& lts_a, const LtsGraph& lts_b,
                                const EquationalTheory& theory, const ExplorationConfig& cfg);

// The three probe schemas instantiated over frame-domain recipes, for
// context-closure batteries.
std::vector<ContextInstance> probe_context_family(const ExtendedProcess& a,
                                                  const ExtendedProcess& b,
                                                  const EquationalTheory& theory,
                                                  const ExplorationConfig& cfg,
                                                  std::size_t per_schema);

// Builds a context replaying a distinguishing trace and signalling the final
// fact on a fresh name; payloads the trace received are referenced through
// the context's own input variables. Returns nothing when the trace uses
// information no context can observe.
std::optional<ContextInstance> evidence_context(const ExtendedProcess& a,
                                                const ExtendedProcess& b, const Evidence& ev,
                                                const EquationalTheory& theory,
                                                const ExplorationConfig& cfg);

// Re-checks a claimed witness relation pointwise. Used by tests and selftest.
bool validate_witness(const std::vector<std::pair<ExtendedProcess, ExtendedProcess>>& witness,
                      const EquationalTheory& theory, const ExplorationConfig& cfg,
                      std::string* why = nullptr);

// Replays a distinguishing trace on both processes and verifies the final
// fact. Used by tests and selftest.
bool replay_evidence(const ExtendedProcess& a, const ExtendedProcess& b, const Evidence& ev,
                     const EquationalTheory& theory, const ExplorationConfig& cfg,
                     std::string* why = nullptr);

}  // namespace picalc

#endif
