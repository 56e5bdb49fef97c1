#pragma once

// Two-sorted abstract syntax: computations (star, constant prefix, push, pop,
// force) and values (variable, constant, thunk).  Terms are immutable shared
// trees; every computation path ends in an explicit Star even when the
// printer elides it.  Pop binders may carry a value-type annotation used by
// the checker; alpha-equivalence ignores annotations and binder names.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "fmc/types.hpp"

namespace fmc {

struct VarName {
  std::string base;
  int index = 0;  // 0 prints as the bare base name, k as base'k

  auto operator<=>(const VarName&) const = default;
  std::string str() const {
    return index == 0 ? base : base + "'" + std::to_string(index);
  }
};

struct Computation;
struct Value;
using Comp = std::shared_ptr<const Computation>;
using Val = std::shared_ptr<const Value>;

struct Var {
  VarName name;
};
struct ValConst {
  std::string sym;
};
struct Thunk {
  Comp body;
};
struct Value {
  std::variant<Var, ValConst, Thunk> node;
};

struct Star {};
struct SeqConst {
  std::string sym;
  Comp next;
};
struct Push {
  Val value;
  std::string loc;
  Comp next;
};
struct Pop {
  std::string loc;
  VarName binder;
  std::optional<ValueType> ann;
  Comp next;
};
struct Force {
  Val value;
  Comp next;
};
struct Computation {
  std::variant<Star, SeqConst, Push, Pop, Force> node;
};

// ---- constructors ----

Comp star();
Comp seqconst(std::string sym, Comp next);
Comp push(Val v, std::string loc, Comp next);
Comp pop(std::string loc, VarName binder, std::optional<ValueType> ann, Comp next);
Comp force(Val v, Comp next);

Val var(VarName name);
Val var(std::string base);
Val vconst(std::string sym);
Val thunk(Comp body);

// ---- inspection ----

template <class T>
const T* as(const Comp& c) {
  return std::get_if<T>(&c->node);
}
template <class T>
const T* as(const Val& v) {
  return std::get_if<T>(&v->node);
}

std::size_t term_size(const Comp& c);  // number of constructors
std::size_t term_size(const Val& v);

std::set<VarName> free_vars(const Comp& c);
std::set<VarName> free_vars(const Val& v);

// Every variable name occurring in the term, free or bound (for freshness).
std::set<VarName> all_names(const Comp& c);
std::set<VarName> all_names(const Val& v);

// A name with the same base as hint not occurring in avoid.
VarName fresh_name(const VarName& hint, const std::set<VarName>& avoid);

bool alpha_equal(const Comp& a, const Comp& b);
bool alpha_equal(const Val& a, const Val& b);

// Canonical string with binders numbered by traversal order: two terms are
// alpha-equal iff their keys coincide.  Used for memo sets; not the printer.
std::string canon_key(const Comp& c);

// ---- substitution and sequencing ----

// Capture-avoiding {V/x}target.
Comp substitute(const Val& v, const VarName& x, const Comp& target);
Val substitute(const Val& v, const VarName& x, const Val& target);

// Capture-avoiding composition: replaces the trailing Star of first.
Comp sequence(const Comp& first, const Comp& second);

// ---- vector notation ----

// [S].N with per-location value vectors written bottom-first; expansion
// pushes in location order (main location first, then lexicographic).
Comp vector_push(const std::map<std::string, std::vector<Val>>& mem, Comp next);
// <?x>.N: pops reverse each vector (binders listed bottom-first, popped
// top-first); same location order.
Comp vector_pop(const std::map<std::string, std::vector<VarName>>& binders, Comp next);

// Location order used by vector notation: main location first, then by name.
std::vector<std::string> ordered_locs(const std::set<std::string>& locs);

}  // namespace fmc
