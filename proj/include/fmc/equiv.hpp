#pragma once

// The ten-law equational theory as an instance engine, and bounded machine
// equivalence as the semantic oracle that validates it.  Equivalence of two
// closed computations at a type is tested by enumerating closed input
// memories of the input type (base entries range over declared constants,
// arrow entries over an enumerated basis seeded by the canonical inhabitant),
// running both sides, and comparing outputs: base values by identity, thunks
// recursively at decremented depth.  Distinguished verdicts carry a concrete
// separating input and are always correct; Equivalent is bounded by the
// enumeration, and any truncation or depth exhaustion downgrades the verdict
// to Inconclusive rather than ever faking a separation.

#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmc/gen.hpp"
#include "fmc/term.hpp"
#include "fmc/types.hpp"

namespace fmc {

enum class Axiom {
  Id,
  LocalBeta,
  Force,
  Thunk,
  Eta,
  Diagonal,
  Terminal,
  Interchange,
  Relocation,
  Permutation,
};
const char* axiom_name(Axiom tag);
const std::vector<Axiom>& all_axioms();

enum class EquivErr { SideConditionViolated, IllTyped };
struct EquivError : std::runtime_error {
  EquivErr kind;
  EquivError(EquivErr k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Parameters for instantiating an axiom; each law reads the fields it needs.
struct AxiomParams {
  MemoryType s;              // id: the memory type popped and pushed back
  Val value;                 // local-beta, thunk, relocation, permutation: V
  Comp m;                    // force: M; permutation: the continuation
  Comp producer;             // eta, diagonal, terminal, interchange: S (closed, : > s)
  Comp n;                    // eta: N, domain must carry S's output on top
  Comp p;                    // interchange: P
  ValueType pop_type;        // permutation: type popped at loc_a
  VarName binder{"x", 0};    // permutation: the popped binder
  std::string loc_a = kMainLoc;
  std::string loc_b = "c";
};

struct AxiomInstance {
  Axiom tag;
  Comp lhs, rhs;
  CompType type;
};

// Builds both sides, infers the instance type from the left and checks the
// right against it; throws on side-condition or typing failures.
AxiomInstance instantiate_axiom(const Signature& sig, Axiom tag, const AxiomParams& params);

// Equations derivable in the theory, used to exercise the oracle.
struct EquationInstance {
  std::string name;
  Comp lhs, rhs;
  CompType type;
};
EquationInstance derived_global_beta(const Signature& sig, const Val& v,
                                     const std::string& loc, const VarName& x,
                                     const Comp& m);
EquationInstance derived_push_permutation(const Signature& sig, const Val& v,
                                          const std::string& a, const Val& w,
                                          const std::string& b);
EquationInstance derived_pop_permutation(const Signature& sig, const std::string& a,
                                         const VarName& x, const ValueType& tx,
                                         const std::string& b, const VarName& y,
                                         const ValueType& ty, const Comp& m);

enum class Verdict { Equivalent, Distinguished, Inconclusive };
const char* verdict_name(Verdict v);

struct EquivBudget {
  int value_budget = 5;          // basis size per value type
  std::size_t max_inputs = 64;   // memories enumerated per comparison
  long long fuel = 100000;       // machine fuel per run
};

struct EquivResult {
  Verdict verdict = Verdict::Inconclusive;
  std::map<std::string, std::vector<Val>> witness;  // set when Distinguished
  long long inputs_tested = 0;
};

EquivResult machine_equiv(const Signature& sig, const Comp& m, const Comp& n,
                          const CompType& type, int depth,
                          const EquivBudget& budget = {});

struct TheoryReport {
  long long total = 0;
  long long equivalent = 0;
  long long inconclusive = 0;
  std::vector<std::pair<std::size_t, EquivResult>> distinguished;  // hard failures
  bool ok() const { return distinguished.empty(); }
};
TheoryReport validate_theory(const Signature& sig,
                             const std::vector<AxiomInstance>& instances, int depth,
                             const EquivBudget& budget = {});

// Seeded instance corpus cycling through all ten axioms.
std::vector<AxiomInstance> generate_axiom_instances(const Signature& sig,
                                                    std::mt19937_64& rng,
                                                    std::size_t count,
                                                    const GenConfig& cfg = {});

}  // namespace fmc
