#pragma once

// Seeded generators for closed typed terms, values and input memories.
// Generated computations stay in the constant-free fragment (pops, pushes of
// variables and thunks, forces of variables), so they typecheck and fall
// inside the quantitative interpretation.  Value enumeration provides the
// canonical input bases used by the bounded equivalence oracle: the canonical
// inhabitant of a type first, then small systematic variants.

#include <cstddef>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmc/term.hpp"
#include "fmc/types.hpp"

namespace fmc {

struct GenError : std::runtime_error {
  explicit GenError(const std::string& m) : std::runtime_error(m) {}
};

struct GenConfig {
  int max_size = 25;      // term-size budget, final star included
  int max_locations = 3;  // including the main location
  int type_depth = 2;     // nesting depth of generated arrow types
};

struct GenTerm {
  Comp term;
  CompType type;
};

// Arrow types over no base types: ( > ) at depth zero, small memory sides of
// shallower arrows below that.
ValueType generate_arrow_type(std::mt19937_64& rng, int depth, const GenConfig& cfg = {});
MemoryType generate_memory_type(std::mt19937_64& rng, const GenConfig& cfg = {});

// A closed computation together with its type.  Every pop carries its
// annotation, so thunks infer their minimal types without help.
GenTerm generate_term(const Signature& sig, std::mt19937_64& rng, const GenConfig& cfg = {});

// The canonical closed inhabitant: a base type is inhabited by its first
// declared constant, an arrow by popping the whole domain and pushing
// canonical inhabitants of the codomain.
Val canonical_inhabitant(const Signature& sig, const ValueType& t);

// Closed values of a type, deduplicated and ordered by size then print, at
// most budget many.  Arrow inhabitants pop the domain and push either popped
// variables of fitting type or smaller enumerated values.
std::vector<Val> values_of(const Signature& sig, const ValueType& t, int budget);

// Every memory over the value bases, in enumeration order, capped at
// max_inputs; truncation is reported so callers can keep verdicts honest.
struct MemoryEnum {
  std::vector<std::map<std::string, std::vector<Val>>> inputs;
  bool truncated = false;
};
MemoryEnum enumerate_memories(const Signature& sig, const MemoryType& m,
                              int value_budget, std::size_t max_inputs);

// One random memory fitting the type, drawn from the value bases.
std::map<std::string, std::vector<Val>> generate_inputs(const Signature& sig,
                                                        const MemoryType& dom,
                                                        std::mt19937_64& rng,
                                                        int value_budget = 4);

}  // namespace fmc
