#include "picalc/symbols.hpp"

#include <atomic>
#include <stdexcept>

namespace picalc {

std::string Symbol::display() const {
  if (index == 0) return id;
  return id + std::to_string(index);
}

std::string Symbol::key() const {
  // display() can coincide for distinct symbols (id "n" index 5 vs id "n5");
  // the key never does.
  std::string tagged = id + (index ? "#" + std::to_string(index) : "");
  switch (kind) {
    case SymbolKind::Variable: return "v:" + tagged;
    case SymbolKind::Name: return "n:" + tagged;
    case SymbolKind::Constant: return "c:" + tagged;
  }
  return tagged;
}

Symbol var_sym(std::string id) { return Symbol{SymbolKind::Variable, std::move(id), 0}; }
Symbol name_sym(std::string id) { return Symbol{SymbolKind::Name, std::move(id), 0}; }
Symbol const_sym(std::string id) { return Symbol{SymbolKind::Constant, std::move(id), 0}; }

namespace {
std::atomic<std::uint64_t> g_fresh_counter{1'000'000};

bool display_collides(const std::string& candidate, const SymbolSet& avoid) {
  for (const auto& s : avoid) {
    if (s.display() == candidate) return true;
  }
  return false;
}
}  // namespace

Symbol fresh_symbol(SymbolKind kind, const std::string& base, const SymbolSet& avoid) {
  for (;;) {
    std::uint64_t ix = g_fresh_counter.fetch_add(1);
    Symbol candidate{kind, base, ix};
    if (avoid.count(candidate)) continue;
    if (display_collides(candidate.display(), avoid)) continue;
    return candidate;
  }
}

Symbol canonical_frame_var(std::size_t position) {
  if (position == 0 || position >= 1'000'000) {
    throw std::invalid_argument("canonical frame variable position out of range");
  }
  return Symbol{SymbolKind::Variable, "w", position};
}

Signature::Signature() { fns_["pair"] = 2; }

void Signature::declare(const std::string& fn, unsigned arity) {
  if (arity == 0) throw std::invalid_argument("function arity must be positive: " + fn);
  auto it = fns_.find(fn);
  if (it != fns_.end() && it->second != arity) {
    throw std::invalid_argument("conflicting arity for " + fn);
  }
  fns_[fn] = arity;
}

bool Signature::contains(const std::string& fn) const { return fns_.count(fn) != 0; }

unsigned Signature::arity(const std::string& fn) const {
  auto it = fns_.find(fn);
  if (it == fns_.end()) throw std::out_of_range("unknown function symbol: " + fn);
  return it->second;
}

}  // namespace picalc
