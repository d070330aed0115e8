#ifndef PICALC_SYMBOLS_HPP
#define PICALC_SYMBOLS_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace picalc {

// Variables, names and constants live in disjoint universes; the kind tag is
// part of a symbol's identity, never inferred from spelling.
enum class SymbolKind { Variable, Name, Constant };

struct Symbol {
  SymbolKind kind{SymbolKind::Variable};
  std::string id;
  std::uint64_t index{0};  // 0 for source-level symbols, >0 for generated ones

  std::string display() const;  // what the printer emits
  std::string key() const;      // kind-tagged, collision-free

  auto operator<=>(const Symbol&) const = default;
};

using SymbolSet = std::set<Symbol>;

Symbol var_sym(std::string id);
Symbol name_sym(std::string id);
Symbol const_sym(std::string id);

// Session-wide fresh symbol source backed by an atomic counter; every issued
// symbol is distinct from all previously issued ones and from `avoid`.
// Generated indices start at 1'000'000 so the canonical frame variables below
// (small indices) can never be re-issued.
Symbol fresh_symbol(SymbolKind kind, const std::string& base, const SymbolSet& avoid = {});

// Deterministic frame variable for the k-th output extrusion (w1, w2, ...).
// Used when two processes must agree on the variable a matched output binds.
Symbol canonical_frame_var(std::size_t position);

// Function symbols and their arities. Constants are not nullary functions;
// they are atoms of their own kind, so every arity here is >= 1.
class Signature {
 public:
  Signature();  // always contains pair/2

  void declare(const std::string& fn, unsigned arity);
  bool contains(const std::string& fn) const;
  unsigned arity(const std::string& fn) const;
  const std::map<std::string, unsigned>& functions() const { return fns_; }

 private:
  std::map<std::string, unsigned> fns_;
};

}  // namespace picalc

#endif
