#pragma once

// Translations in and out of the calculus:
//  - call-by-name and call-by-value encodings of the λ-calculus, covering
//    tuples, patterns, probabilistic choice and first-order store;
//  - the structure-preserving translation of simply typed λ-terms into the
//    single-location fragment, and the interpretation reading such terms
//    back as λ-terms;
//  - the embedding of a single-location term over a collapsed signature
//    into the full calculus, and the collapse serializing every location
//    into the main one, with the stack shuffles kappa / kappa_inv mediating
//    between a memory and its collapsed image.

#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmc/check.hpp"
#include "fmc/lambda.hpp"
#include "fmc/term.hpp"
#include "fmc/types.hpp"

namespace fmc {

enum class TranslateErr {
  UnsupportedConstruct,
  IllTyped,
  UnknownLocation,
};

struct TranslateError : std::runtime_error {
  TranslateErr kind;
  TranslateError(TranslateErr k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
};

// Location of the coin-toss read stream used by the choice encoding.
inline const std::string kRandLoc = "rnd";

// ---- λ-calculus encodings ----

// Store the top of the main stack in the cell (replacing its old content);
// the cell must already hold a value.
Comp set_cell(const std::string& cell, Comp next);
// Copy the content of the cell onto the main stack.
Comp get_cell(const std::string& cell, Comp next);

// Call-by-name: a variable forces what it names, application pushes the
// thunked argument, abstraction pops.  A tuple pushes one thunk per
// component; a pattern abstraction pops one thunk, forces it and pops the
// components.  Choice draws a boolean from the rnd stream and lets it pick
// between the thunked branches; assignment runs the bound term, stores the
// result, and continues; dereference copies from the cell.
Comp cbn(const lam::Lam& m);

// Call-by-value: a variable pushes its value, abstraction pushes a thunk
// that pops its argument, application runs argument then function and
// forces the resulting value.  A tuple becomes one thunk running its
// components in order; effects are encoded as for cbn.
Comp cbv(const lam::Lam& m);

// ---- location order ----

// Total order on locations with the main location first; the collapse of a
// memory concatenates its stacks in this order.
struct LocationOrder {
  std::vector<std::string> locs;

  LocationOrder();
  explicit LocationOrder(std::vector<std::string> ls);

  bool contains(const std::string& loc) const;
  std::size_t position(const std::string& loc) const;  // UnknownLocation
};

// ---- simply typed λ-terms to the single-location fragment ----

// Image of a λ-type as a stack, bottom first: bases map to themselves,
// arrows to arrows between the images over the main location, products
// concatenate their parts, unit vanishes.
StackType functor_stack(const lam::LType& t);
ValueType functor_value_type(const lam::LType& t);  // base or arrow only

// Signature carried across: bases keep their names, value constants must
// be base-typed, unary sequential constants become computation constants.
Signature functor_signature(const lam::LambdaSig& lsig);

// Image of a typed λ-term in context: a closed single-location computation
// of type (image of ctx) > (image of its λ-type) whose input stack lays the
// context out bottom to top, the last context entry on top.
Comp free_functor(const lam::LambdaSig& lsig, const lam::LamContext& ctx,
                  const lam::Lam& m);

// ---- single-location terms back to λ-terms ----

// λ-type read off a single-location value type: bases map to themselves,
// arrows take the tuple reading of both stacks.
lam::LType interp_value_type(const ValueType& t);
lam::LType interp_stack(const StackType& s);  // unit / single / product

struct SlcInterp {
  lam::Lam term;
  // Free variables standing for the input stack, bottom first, with their
  // λ-types.  Empty for terms that consume no input.
  lam::LamContext stack_vars;
};

// Reads a single-location computation as a λ-term: the input stack becomes
// free variables and the output stack becomes a tuple (unit when empty, the
// bare term when a singleton).  Sequential constants must be unary.
SlcInterp interpret_slc(const Signature& sig, const Comp& m);
// The same, requiring the input side to be empty.
lam::Lam interpret_slc_closed(const Signature& sig, const Comp& m);

// ---- collapse to the main location and the embedding back ----

// Concatenation of the stacks of m in location order, entries collapsed.
StackType collapse_stack(const MemoryType& m, const LocationOrder& order);
ValueType collapse_value_type(const ValueType& t, const LocationOrder& order);
CompType collapse_comp_type(const CompType& t, const LocationOrder& order);
Signature collapse_signature(const Signature& sig, const LocationOrder& order);

// Serializes a computation onto the main stack: each action first pops the
// collapsed row of the current memory, rearranges it, and pushes the row
// for the next step.  The input must carry annotations on every pop that is
// not fed by an earlier push, so that its full type is inferable.  The
// result is a single-location term over the collapsed signature whose type
// is the collapse of the original type.
Comp collapse(const Signature& sig, const Comp& m, const LocationOrder& order);

// Rebuilds a term of the full calculus from a single-location term over the
// collapsed signature: pushes, pops and forces move to location at, value
// types are read back per entry, and every sequential constant is bracketed
// by the shuffles presenting its collapsed interface at at.
Comp embed(const Signature& sig, const LocationOrder& order, const Comp& slc,
           const std::string& at);
// Per-entry type reading: bases stay, an arrow over the main stack becomes
// the same arrow over location at.
ValueType embed_value_type(const ValueType& t, const std::string& at);

// kappa(mem) pops mem from its locations and pushes its collapsed row onto
// hub; kappa_inv(mem) pops the row at hub and rebuilds mem.  Arrow entries
// are wrapped in adapter thunks on the way down and back up, so both
// composites are behaviorally the identity.
Comp kappa(const MemoryType& mem, const LocationOrder& order,
           const std::string& hub = kMainLoc);
Comp kappa_inv(const MemoryType& mem, const LocationOrder& order,
               const std::string& hub = kMainLoc);

// ---- staged single-location corpus ----

// Random constant-free single-location computations in staged form: all
// input popped up front, then a run of force stages, each pushing exactly
// the forced arrow's arguments and popping all its outputs into fresh
// binders, and finally a row of pushes.  Every pop is annotated.  On staged
// terms the collapse of the embedding normalizes back to the normal form of
// the term itself; free shapes would leave residual shuffle code behind.
struct StagedGenConfig {
  std::vector<std::string> bases{"t", "s"};
  int max_stages = 3;
  int max_arity = 2;   // stack width of generated arrow domains/codomains
  int max_pushes = 2;  // final output row
};
Comp generate_staged_slc(std::mt19937_64& rng, const StagedGenConfig& cfg);

}  // namespace fmc
