#pragma once

// Quantitative interpretation of the constant-free classic fragment: every
// computation denotes a function from input memories to (step count, output
// memory) pairs, and every value denotes such a function for its thunk body.
// The strong variant charges a pushed value its own collapsed cost up front,
// so it bounds the machine's work across any reduction order; the weak
// variant charges pushes one step and counts exactly the machine transitions
// of a run, including the force-thunk transition.
//
// Collapsing a functional applies it to the least (all-zero) input of its
// domain and keeps the count.  Base types, value constants and computation
// constants have no functional meaning here and are rejected.

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fmc/check.hpp"
#include "fmc/term.hpp"
#include "fmc/types.hpp"

namespace fmc {

struct SemFun;
using SemStack = std::vector<SemFun>;     // bottom of stack first
using SemMem = std::map<std::string, SemStack>;

struct SemCount {
  long long count = 0;
  SemMem mem;
};

// A functional tagged with the arrow type it inhabits; apply expects a memory
// shaped like type.dom and yields one shaped like type.cod.
struct SemFun {
  CompType type;
  std::function<SemCount(const SemMem&)> apply;
};

using Valuation = std::map<VarName, SemFun>;

enum class MeasureKind { Strong, Weak };

enum class MeasureErr {
  OutOfFragment,        // base type, value constant or computation constant
  DerivationMismatch,   // input memory or valuation does not fit the type
};

struct MeasureError : std::runtime_error {
  MeasureErr kind;
  MeasureError(MeasureErr k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
};

// Least inhabitant: an arrow type maps every input to (0, least output).
SemFun zero_element(const ValueType& t);
SemMem zero_memory(const MemoryType& m);

// Least valuation for a context: every variable denotes the zero element.
Valuation least_valuation(const Context& ctx);

// Interpret a computation typed as ctx |- term : type.  The valuation must
// cover the free variables of the term.
SemFun interpret(const Signature& sig, const Context& ctx, const Comp& term,
                 const CompType& type, const Valuation& v, MeasureKind kind);

// Interpret a closed value at the given arrow type.
SemFun interpret_value(const Signature& sig, const Val& value,
                       const ValueType& type, MeasureKind kind);

// Interpret a machine memory of closed values fitting the given memory type.
SemMem interpret_memory(const Signature& sig,
                        const std::map<std::string, std::vector<Val>>& stacks,
                        const MemoryType& type, MeasureKind kind);

// pi_1 of the functional applied to the least input of its domain.
long long collapse_measure(const SemFun& f);

}  // namespace fmc
