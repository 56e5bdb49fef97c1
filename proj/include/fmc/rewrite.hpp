#pragma once

// Reduction on computations:
//   beta  [V]a.a<x>.M   to  {V/x}M
//   pi    [V]a.b<x>.M   to  b<x>.[V]a.M   (a and b distinct)
//   phi   ?!{N}.M       to  N;M
//   tau   !{?V.*}       to  V             (in value position)
//
// Redexes are enumerated in every sequential context, including inside
// thunks and pushed values.  Terms are treated as alpha-classes: applying pi
// freshens the binder when it occurs free in the pushed value, so binder
// names never block a step.  Within one node the enumeration order is
// beta/pi, phi, tau; this is a determinism tie-break for the strategies,
// not a priority between rules.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fmc/term.hpp"

namespace fmc {

enum class Rule { Beta, Pi, Phi, Tau };
const char* rule_name(Rule r);

struct Redex {
  Rule rule;
  // Context address: 0 steps to the continuation, 1 descends into the
  // value's thunk body.  The rule applies at the addressed node.
  std::vector<int> path;
};

struct RewriteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Complete enumeration in leftmost-outermost order (node, value, continuation).
std::vector<Redex> find_redexes(const Comp& term);

// Contracts the redex; throws RewriteError if path and rule do not match.
Comp apply_redex(const Comp& term, const Redex& r);

enum class Strategy { LeftmostOutermost, RightmostInnermost };

struct ReductionStep {
  Rule rule;
  Comp before;
  Comp after;
};

struct NormalizeResult {
  Comp term;
  std::size_t steps = 0;
  bool completed = false;             // no redexes remain
  std::vector<ReductionStep> trail;   // filled when record is set
};

NormalizeResult normalize(const Comp& term, Strategy strategy, std::size_t fuel,
                          bool record = false);

struct AllPathsResult {
  std::vector<Comp> normal_forms;  // one representative per alpha class
  bool exhausted = false;          // state bound hit before closure
  std::size_t visited = 0;
};

// Explores every reduction sequence, memoized on alpha-canonical forms.
AllPathsResult all_normal_forms(const Comp& term, std::size_t max_states);

// Sum over pops of the number of spine pushes at other locations before
// them.  Strictly decreases by one under every pi step.
std::size_t pi_measure(const Comp& term);

}  // namespace fmc
