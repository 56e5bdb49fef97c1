#pragma once

// The stack machine.  A memory is a family of stacks indexed by location
// (top of stack at the back of the vector).  The focused computation is
// rewritten by substitution: pop binds the popped value, force unfolds a
// thunk into the continuation.  Every transition counts one step; reaching
// star is success, not a step.
//
// Locations can carry a policy:
//   Plain        ordinary stack.
//   ReadStream   pop only.  Either scripted (finite contents, next item at
//                the back; exhaustion is an ordinary empty-pop stuck state)
//                or generated (each pop calls generate()).
//   WriteStream  push only; contents accumulate in order of writing.
//   Cell         depth at most one.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmc/term.hpp"

namespace fmc {

enum class PolicyKind { Plain, ReadStream, WriteStream, Cell };

struct Policy {
  PolicyKind kind = PolicyKind::Plain;
  std::function<Val()> generate;  // ReadStream only; null means scripted
};

struct Memory {
  std::map<std::string, std::vector<Val>> stacks;
  std::map<std::string, Policy> policies;

  PolicyKind policy(const std::string& loc) const {
    auto it = policies.find(loc);
    return it == policies.end() ? PolicyKind::Plain : it->second.kind;
  }
};

struct StuckInfo {
  enum class Reason { EmptyPop, UnhandledConst, PolicyViolation };
  Reason reason;
  std::string loc;     // EmptyPop, PolicyViolation
  std::string detail;  // constant symbol or violation description
  std::string describe() const;
};

// Optional interpretation of computation constants: pops arity values at loc
// (passed bottom first) and pushes the results back (bottom first).
struct DeltaRule {
  std::string loc;
  std::size_t arity;
  std::function<std::vector<Val>(const std::vector<Val>&)> apply;
};
using DeltaTable = std::map<std::string, DeltaRule>;

struct MachineState {
  Memory memory;
  Comp focus;
  std::uint64_t steps = 0;
};

enum class StepStatus { Stepped, Success, Stuck };

struct StepOutcome {
  StepStatus status;
  std::string rule;  // push | pop | force | delta
  std::string loc;   // push / pop / delta
  std::optional<StuckInfo> stuck;
};

StepOutcome step(MachineState& st, const DeltaTable* delta = nullptr);

struct RunResult {
  enum class Status { Success, Stuck, FuelExhausted };
  Status status;
  Memory memory;
  std::uint64_t steps = 0;
  std::optional<StuckInfo> stuck;
  Comp focus;  // remaining computation (star on success)

  bool success() const { return status == Status::Success; }
};

// Runs to success, stuck state, or fuel exhaustion.  When trace is given,
// one JSON line is written after every transition.
RunResult run(Memory memory, Comp term, std::uint64_t fuel,
              std::ostream* trace = nullptr, const DeltaTable* delta = nullptr);

// ---- standard values and memories ----

Val church_true();   // pops two, forces the first popped
Val church_false();  // pops two, forces the second popped

// Seeded fair stream of church booleans.
std::function<Val()> boolean_stream(std::uint64_t seed);

// rnd: generated read stream (seeded); in: scripted read stream (empty);
// out: write stream.
Memory default_memory(std::uint64_t seed);

// Loads scripted items into a read stream so the first item is read first.
void script_stream(Memory& mem, const std::string& loc, std::vector<Val> items);

// Bottom-first printed stacks, for reporting.
std::map<std::string, std::vector<std::string>> memory_strings(const Memory& mem);

}  // namespace fmc
