#pragma once

// Simple types for the calculus: value types (base or stack-transformer
// arrow), stack-type vectors, and memory types (a vector per location).
//
// Conventions fixed once here and relied on everywhere else:
//  - StackType stores bottom of the stack first.
//  - MemoryType never maps a location to an empty vector (canonical form);
//    an absent key means the empty vector.  The "types modulo permutation
//    of locations" identification is inherent in the map representation.
//  - The printed form of a computation type reverses the input side: the
//    leftmost printed input entry is the first one popped (top of stack),
//    and named locations appear in reverse order; the output side prints
//    bottom-to-top with named locations in order and the main location last.

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmc {

inline const std::string kMainLoc = "lam";

struct ValueType;
using StackType = std::vector<ValueType>;
using MemoryType = std::map<std::string, StackType>;

struct CompType {
  MemoryType dom;
  MemoryType cod;
};

struct ValueType {
  // Base type iff arrow is null; then base holds the symbol.
  std::string base;
  std::shared_ptr<const CompType> arrow;

  bool is_base() const { return arrow == nullptr; }
  const CompType& comp() const { return *arrow; }
};

ValueType base_type(std::string name);
ValueType arrow_type(MemoryType dom, MemoryType cod);
ValueType arrow_type(CompType t);

bool operator==(const ValueType& a, const ValueType& b);
inline bool operator!=(const ValueType& a, const ValueType& b) { return !(a == b); }
bool operator==(const CompType& a, const CompType& b);
inline bool operator!=(const CompType& a, const CompType& b) { return !(a == b); }

// ---- memory-type helpers ----

// Drop empty vectors so map equality is canonical.
void mt_canon(MemoryType& m);
bool mt_empty(const MemoryType& m);
std::size_t mt_size(const MemoryType& m);  // total number of entries

// Stack of a location (empty if absent).
const StackType& mt_stack(const MemoryType& m, const std::string& loc);

// Push vt on top of the stack at loc.
void mt_push(MemoryType& m, const std::string& loc, const ValueType& vt);
// Pop the top of the stack at loc; nullopt when empty.
std::optional<ValueType> mt_pop(MemoryType& m, const std::string& loc);

// Place addition at the bottom of each stack of m (the expansion direction).
MemoryType mt_under(const MemoryType& addition, const MemoryType& m);
// Place addition on top of each stack of m.
MemoryType mt_over(const MemoryType& m, const MemoryType& addition);

// True iff top ends the stacks of m (per location, topmost |top| entries).
bool mt_has_top(const MemoryType& m, const MemoryType& top);
// Remove top from m (precondition: mt_has_top).
MemoryType mt_strip_top(const MemoryType& m, const MemoryType& top);

// ---- printing ----

std::string show(const ValueType& t);
std::string show(const CompType& t);
// One side of a computation type.  Inputs print fully reversed.
std::string show_memory(const MemoryType& m, bool input_side);

// ---- parsing ----

// Parses the printed form, e.g. "s t > t s", "Z c(Z) > c(Z)", "(t > t) t > t".
// Locations may appear in any order and repeatedly; segments concatenate.
CompType parse_comp_type(const std::string& text);
ValueType parse_value_type(const std::string& text);

// ---- signatures ----

struct Signature {
  // Declaration order matters for canonical input enumeration.
  std::vector<std::string> bases;
  std::vector<std::pair<std::string, ValueType>> vals;
  std::vector<std::pair<std::string, CompType>> comps;

  bool has_base(const std::string& name) const;
  const ValueType* val_type(const std::string& sym) const;
  const CompType* comp_type(const std::string& sym) const;
  // All value constants of a base type, in declaration order.
  std::vector<std::string> vals_of_base(const std::string& base) const;

  void declare_base(const std::string& name);
  void declare_val(const std::string& sym, ValueType t);
  void declare_comp(const std::string& sym, CompType t);
};

struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fmc
