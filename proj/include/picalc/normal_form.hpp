#ifndef PICALC_NORMAL_FORM_HPP
#define PICALC_NORMAL_FORM_HPP

#include <string>
#include <vector>

#include "picalc/process.hpp"
#include "picalc/rewriting.hpp"

namespace picalc {

// The canonical shape new n1...nk.({e1/x1} | ... | {el/xl} | P): restricted
// names that the frame mentions, a frame of closed normalized terms ordered
// by domain variable, and a closed plain body.
struct NormalForm {
  std::vector<Symbol> names;
  AcyclicSubstitution frame;
  PlainProcess body;

  ExtendedProcess reassemble() const;
  std::string pretty() const;
  // Canonical state key: insensitive to the spelling of the restricted
  // names and of bound symbols inside the body.
  std::string key() const;
};

// Directed normalization of a closed correct process: scope-extrudes
// restrictions, eliminates variable restrictions by applying their
// substitution, saturates the body and the frame until neither mentions a
// domain variable, rewrites every term to normal form, and pushes
// restricted names the frame does not mention onto the smallest body part
// that uses them. Throws PreconditionViolated when the process is not a
// closed correct EP.
NormalForm normalize_process(const ExtendedProcess& a, const EquationalTheory& theory);

// The frame component of the normal form.
AcyclicSubstitution frame_of(const ExtendedProcess& a, const EquationalTheory& theory);

// Sound structural-equivalence check: canonical normal forms compared up to
// restricted-name renaming, parallel rearrangement and bounded replication
// unfolding. A true answer is definitive; false may be a false negative for
// replication-heavy processes.
bool struct_equiv(const ExtendedProcess& a, const ExtendedProcess& b,
                  const EquationalTheory& theory, int unfold_bound = 2);

}  // namespace picalc

#endif
