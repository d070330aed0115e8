#ifndef PICALC_LTS_HPP
#define PICALC_LTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "picalc/normal_form.hpp"
#include "picalc/process.hpp"
#include "picalc/rewriting.hpp"

namespace picalc {

enum class ActKind { Input, Output, EqTest, NeqTest };

// Labels of the transition relation. For input/output, lhs is the channel
// and rhs the message; for tests, the two compared terms.
struct Action {
  ActKind kind{ActKind::EqTest};
  Term lhs;
  Term rhs;

  bool external() const { return kind == ActKind::Input || kind == ActKind::Output; }
  std::string pretty() const;
  std::string key() const;
};

// Swaps input and output on the same channel/message; tests have no co-action.
Action co_action(const Action& alpha);

SymbolSet action_vars(const Action& alpha);
SymbolSet action_symbols(const Action& alpha);
bool actions_equal(const Action& a, const Action& b, const EquationalTheory& theory);

struct Transition {
  ExtendedProcess source;
  Action action;
  ExtendedProcess target;
};

enum class OutputLabelMode {
  Literal,  // output labels carry the payload term
  Alias,    // output labels carry the fresh frame variable instead
};

// Finitization knobs for the otherwise infinite input branching.
struct ExplorationConfig {
  std::optional<std::vector<Term>> explicit_recipes;
  int recipe_depth = 2;
  std::vector<Symbol> public_atoms;  // names/constants the environment may use
  int replication_bound = 2;
  int max_states = 10'000;
  std::size_t max_recipes = 200'000;
  OutputLabelMode label_mode = OutputLabelMode::Literal;
  // Name extruded frame variables w1, w2, ... by frame size instead of
  // drawing from the session counter; equivalence checking relies on this so
  // both processes bind the same variable for matched outputs.
  bool canonical_frame_vars = false;
  // Collapse input recipes that the current frame evaluates identically,
  // keeping the enumeration-first representative.
  bool dedup_recipes = false;

  void validate() const;
};

// All recipe terms over dom_vars plus the public atoms up to recipe_depth,
// enumerated depth-first by stratum in deterministic order, capped at
// max_recipes.
std::vector<Term> recipe_terms(const SymbolSet& dom_vars, const ExplorationConfig& cfg,
                               const Signature& sig);

// The value a frame assigns to a recipe.
Term frame_value(const Term& recipe, const AcyclicSubstitution& frame,
                 const EquationalTheory& theory);

// One representative per frame-value class, in enumeration order.
std::vector<Term> representative_recipes(const std::vector<Term>& recipes,
                                         const AcyclicSubstitution& frame,
                                         const EquationalTheory& theory);

// Every transition of the closed correct process A derivable from the
// explicit rules and the parallel/communication/restriction rules, closed
// under structural rearrangement by normalizing first. Produced transitions
// satisfy var(action) within dom(A); in alias mode the transition's own
// fresh frame variable is exempt.
std::vector<Transition> enumerate_transitions(const ExtendedProcess& a,
                                              const EquationalTheory& theory,
                                              const ExplorationConfig& cfg);

// Targets of test transitions whose test holds under the source frame.
std::vector<ExtendedProcess> internal_step(const ExtendedProcess& a,
                                           const EquationalTheory& theory,
                                           const ExplorationConfig& cfg);

// Everything reachable by internal steps, the process itself included;
// canonical representatives, deduplicated. Throws StateBudgetExceeded.
std::vector<ExtendedProcess> tau_closure(const ExtendedProcess& a, const EquationalTheory& theory,
                                         const ExplorationConfig& cfg);

// Weak transition: internal steps, one alpha transition, internal steps.
std::vector<ExtendedProcess> weak_transition(const ExtendedProcess& a, const Action& alpha,
                                             const EquationalTheory& theory,
                                             const ExplorationConfig& cfg);

// Names on which the process can eventually output.
SymbolSet barbs(const ExtendedProcess& a, const EquationalTheory& theory,
                const ExplorationConfig& cfg);

// Materialized bounded state space.
struct LtsGraph {
  struct State {
    ExtendedProcess proc;  // canonical representative
    std::string key;
    AcyclicSubstitution frame;
    SymbolSet restricted;  // names bound outside the frame
  };
  struct Edge {
    int src;
    Action action;
    int dst;
    bool internal_ok;  // test holds under the source frame
  };

  std::vector<State> states;
  std::vector<Edge> edges;
  int root = 0;
  bool truncated = false;

  std::vector<int> tau_reachable(int state) const;  // via successful tests
};

LtsGraph explore(const ExtendedProcess& a, const EquationalTheory& theory,
                 const ExplorationConfig& cfg);

std::string to_dot(const LtsGraph& g);
std::string to_lines(const LtsGraph& g);

}  // namespace picalc

#endif
