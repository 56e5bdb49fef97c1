#pragma once

// The simple-type checker.  Checking walks the input memory type through the
// computation like the machine walks a memory: pops consume from the top of
// the tracked type, pushes add to it, force and constant prefixes splice an
// arrow's effect, and at the trailing star the tracked type must equal the
// output side.  Inference runs the same walk with an empty tracked type and
// borrows from a growing input side; a borrowed pop needs its annotation.
// The expansion rule is absorbed by the walk: any expansion of a derivable
// type is accepted directly.
//
// Thunks synthesize their minimal type from their body; a use site that
// requires a bottom-expanded thunk type must annotate.  The lenient mode
// replaces required annotations by metavariables resolved by first-order
// unification and fails on genuinely polymorphic terms.

#include <memory>

#include "fmc/term.hpp"
#include "fmc/types.hpp"

namespace fmc {

struct Context {
  std::vector<std::pair<VarName, ValueType>> entries;

  const ValueType* lookup(const VarName& x) const {
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
      if (it->first == x) return &it->second;
    return nullptr;
  }
  void bind(VarName x, ValueType t) { entries.emplace_back(std::move(x), std::move(t)); }
};

enum class CheckErr {
  UnboundVariable,
  LocationArityMismatch,
  ConstantUnknown,
  AnnotationMismatch,
  AnnotationNeeded,
  NotAnArrow,
  OutputMismatch,
  Unresolved,
};

struct CheckError : std::runtime_error {
  CheckErr kind;
  CheckError(CheckErr k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Derivation tree mirroring the computation; the quantitative interpretation
// consumes the recorded binder and value types.
struct CompDeriv;
struct ValDeriv {
  ValueType type;
  std::shared_ptr<const CompDeriv> body;  // set for thunks
};
struct CompDeriv {
  CompType type;  // type of this suffix of the computation
  std::optional<ValDeriv> value;    // push / force
  std::optional<ValueType> binder;  // pop
  std::shared_ptr<const CompDeriv> next;
};

using Deriv = std::shared_ptr<const CompDeriv>;

struct Checked {
  CompType type;
  Deriv deriv;
};

// Accept iff ctx |- term : against is derivable.
Checked check(const Signature& sig, const Context& ctx, const Comp& term,
              const CompType& against);

// Minimal type; pops not fed by earlier pushes require annotations.
Checked infer(const Signature& sig, const Context& ctx, const Comp& term);

ValDeriv infer_value(const Signature& sig, const Context& ctx, const Val& v);
void check_value(const Signature& sig, const Context& ctx, const Val& v,
                 const ValueType& against);

// Unification-based inference for unannotated terms; throws Unresolved on
// polymorphic terms.
CompType infer_lenient(const Signature& sig, const Context& ctx, const Comp& term);

}  // namespace fmc
